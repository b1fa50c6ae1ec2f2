#!/usr/bin/env python3
"""
Test script for the settings manager
"""

import json
import os
import tempfile

from errors import ConfigError
from settings_manager import DEFAULT_SETTINGS, SettingsManager


def _write_config(tmp, settings, messages=None):
    path = os.path.join(tmp, "config.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"settings": settings, "messages": messages or {}}, f)
    return path


def test_missing_file_uses_defaults():
    with tempfile.TemporaryDirectory() as tmp:
        settings = SettingsManager(os.path.join(tmp, "absent.json"))
        assert settings.resolved() == DEFAULT_SETTINGS
        assert settings.get_message("wrote_output", path="x") == "✅ wrote x"
    print("✅ missing config falls back to defaults")


def test_override_precedence():
    with tempfile.TemporaryDirectory() as tmp:
        settings = SettingsManager(_write_config(tmp, {"rel_tol": 1e-8, "find_good_budget_factor": 5}))
        assert settings.get_setting("rel_tol") == 1e-8
        assert settings.get_setting("abs_tol") == DEFAULT_SETTINGS["abs_tol"]
        settings.apply_overrides({"rel_tol": 1e-9, "find_good_budget_factor": None})
        assert settings.get_setting("rel_tol") == 1e-9
        assert settings.get_setting("find_good_budget_factor") == 5
        assert settings.integrator_config().rel_tol == 1e-9
    print("✅ command line beats file beats defaults")


def test_bad_settings_raise():
    with tempfile.TemporaryDirectory() as tmp:
        settings = SettingsManager(_write_config(tmp, {}))
        try:
            settings.apply_overrides({"step_size": 0.1})
            raise AssertionError("unknown override accepted")
        except ConfigError:
            pass
        for bad in ({"rel_tol": 5.0}, {"wkb_decay_target": "high"}):
            settings = SettingsManager(_write_config(tmp, bad))
            try:
                settings.integrator_config()
                raise AssertionError(f"{bad} accepted")
            except ConfigError:
                pass
    print("✅ invalid settings are rejected")


def test_messages():
    with tempfile.TemporaryDirectory() as tmp:
        settings = SettingsManager(_write_config(tmp, {}, {"found_good": "good after {flips}"}))
        assert settings.get_message("found_good", flips=3) == "good after 3"
        assert settings.get_message("found_good", wrong=1) == "good after {flips}"
        assert settings.get_message("no_such_key") == "Message not found: no_such_key"
    print("✅ message templates")


def test_save_and_reload():
    with tempfile.TemporaryDirectory() as tmp:
        settings = SettingsManager(_write_config(tmp, {"max_step": 0.1}))
        settings.apply_overrides({"tau_eq": 1e-10})
        out = os.path.join(tmp, "saved.json")
        settings.save_config(out)
        again = SettingsManager(out)
        assert again.resolved() == settings.resolved()
        assert again.get_setting("max_step") == 0.1 and again.get_setting("tau_eq") == 1e-10
    print("✅ saved settings reload unchanged")


def main():
    """Run all tests"""
    print("🚀 Settings tests\n")
    tests = [
        test_missing_file_uses_defaults,
        test_override_precedence,
        test_bad_settings_raise,
        test_messages,
        test_save_and_reload,
    ]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")

    print("\n" + "=" * 50)
    print(f"📊 {len(tests) - failed} passed, {failed} failed")
    print("=" * 50)
    return failed


if __name__ == "__main__":
    raise SystemExit(main())
