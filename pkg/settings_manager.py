import json
import logging
import os
from typing import Any, Dict, Optional

from errors import ConfigError
from ode import IntegratorConfig

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS: Dict[str, Any] = {
    "rel_tol": 1e-10,
    "abs_tol": 1e-13,
    "max_step": 0.25,
    "renorm_threshold": 1e8,
    "wkb_decay_target": 25.0,
    "seed_radius_max": 1e3,
    "tau_eq": 1e-9,
    "tau_cls": 1e-8,
    "tau_match": 1e-6,
    "find_good_budget_factor": 20,
    "flip_walk_seed": 0,
    "sweep_phase_step": 0.5,
}

DEFAULT_MESSAGES: Dict[str, str] = {
    "config_echo": "resolved settings: {settings}",
    "validation_error": "❌ invalid input: {error}",
    "numerical_error": "❌ numerical failure: {error}",
    "wrote_output": "✅ wrote {path}",
    "degenerate": "⚠️ framed system is degenerate: {kind}",
    "nondegenerate": "✅ framed system is non-degenerate",
    "found_good": "✅ every coordinate regular after {flips} flips",
    "selftest_pass": "✅ {name}",
    "selftest_fail": "❌ {name}: {error}",
    "selftest_summary": "{passed} passed, {failed} failed",
}


class SettingsManager:
    """Numerical settings and CLI message templates loaded from a JSON file."""

    def __init__(self, config_file: str = "config.json"):
        self.config_file = config_file
        self.settings: Dict[str, Any] = {}
        self.messages: Dict[str, str] = {}
        self.overrides: Dict[str, Any] = {}
        self.load_config()

    def load_config(self) -> None:
        """Load configuration from JSON file."""
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, "r", encoding="utf-8") as f:
                    config = json.load(f)
                self.settings = config.get("settings", {})
                self.messages = config.get("messages", {})
                unknown = sorted(set(self.settings) - set(DEFAULT_SETTINGS))
                if unknown:
                    logger.warning(f"⚠️ ignoring unknown settings {unknown} in {self.config_file}")
                logger.info(f"✅ Loaded {len(self.settings)} settings from {self.config_file}")
            else:
                logger.warning(f"⚠️ Config file {self.config_file} not found, using default settings")
                self._set_default_settings()
        except (OSError, ValueError, AttributeError) as e:
            logger.error(f"❌ Error loading config: {e}")
            self._set_default_settings()

    def get_setting(self, key: str, default: Any = None) -> Any:
        if key in self.overrides:
            return self.overrides[key]
        if key in self.settings:
            return self.settings[key]
        return DEFAULT_SETTINGS.get(key, default)

    def get_message(self, key: str, **kwargs) -> str:
        message = self.messages.get(key, DEFAULT_MESSAGES.get(key, f"Message not found: {key}"))
        if kwargs:
            try:
                return message.format(**kwargs)
            except KeyError as e:
                logger.warning(f"⚠️ Missing format key {e} for message '{key}'")
                return message
        return message

    def apply_overrides(self, mapping: Dict[str, Any]) -> None:
        """Command-line values win over the file; None means not given."""
        unknown = sorted(k for k in mapping if k not in DEFAULT_SETTINGS)
        if unknown:
            raise ConfigError(f"unknown settings {unknown}", {"unknown": unknown})
        self.overrides.update({k: v for k, v in mapping.items() if v is not None})

    def resolved(self) -> Dict[str, Any]:
        return {key: self.get_setting(key) for key in DEFAULT_SETTINGS}

    def integrator_config(self) -> IntegratorConfig:
        s = self.resolved()
        try:
            return IntegratorConfig(
                rel_tol=float(s["rel_tol"]),
                abs_tol=float(s["abs_tol"]),
                max_step=float(s["max_step"]),
                renorm_threshold=float(s["renorm_threshold"]),
                wkb_decay_target=float(s["wkb_decay_target"]),
                seed_radius_max=float(s["seed_radius_max"]),
                tau_match=float(s["tau_match"]),
                tau_cls=float(s["tau_cls"]),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"settings are not numbers: {e}")

    def save_config(self, path: Optional[str] = None) -> None:
        """Write the resolved settings and the messages as JSON."""
        path = path or self.config_file
        config = {"settings": self.resolved(), "messages": {**DEFAULT_MESSAGES, **self.messages}}
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(config, f, ensure_ascii=False, indent=2)
            logger.info(f"✅ Configuration saved to {path}")
        except OSError as e:
            raise ConfigError(f"cannot write {path}: {e}")

    def _set_default_settings(self) -> None:
        self.settings = dict(DEFAULT_SETTINGS)
        self.messages = dict(DEFAULT_MESSAGES)
