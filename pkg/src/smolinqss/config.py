"""Flat ``key = value`` session configuration files.

Example::

    # noiseless run
    copies = 1000
    check_fraction = 0.5
    seed = 7
    attack = none

Keys may be written with ``-`` or ``_``. Every key can also be given on the
command line as ``--key value``; command-line values win.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Mapping

from .adversary import AttackSpec, CLONE_P_BOUND
from .errors import ConfigError, InvalidParameterError
from .protocol import SessionConfig


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _attack(text: str) -> str:
    t = text.strip().lower()
    if t not in ("none", "clone", "bell-resend"):
        raise ValueError("must be one of none, clone, bell-resend")
    return t


PARSERS: dict[str, Callable[[str], object]] = {
    "copies": int,
    "check_fraction": float,
    "seed": _u64,
    "attack": _attack,
    "p": float,
    "attack_probability": float,
    "allow_weak_clone": _bool,
    "verdict_k": float,
    "schedule": str,
}

DEFAULTS: dict[str, object] = {
    "copies": 1000,
    "check_fraction": 0.5,
    "seed": 0,
    "attack": "none",
    "p": CLONE_P_BOUND,
    "attack_probability": 1.0,
    "allow_weak_clone": False,
    "verdict_k": 3.0,
    "schedule": "random",
}


def normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_value(key: str, text) -> object:
    key = normalize_key(key)
    if key not in PARSERS:
        raise ConfigError(key, "unknown configuration key")
    if not isinstance(text, str):
        return text
    try:
        return PARSERS[key](text.strip())
    except ValueError as exc:
        raise ConfigError(key, f"invalid value {text.strip()!r} ({exc})") from None


def parse_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        values[normalize_key(key)] = parse_value(key, value)
    return values


def load(path: str | Path | None, overrides: Mapping[str, object] | None = None) -> dict[str, object]:
    values = dict(DEFAULTS)
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from None
        values.update(parse_text(text))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[normalize_key(key)] = parse_value(key, value)
    return values


def to_session_config(values: Mapping[str, object]) -> SessionConfig:
    """Build a SessionConfig, reporting the offending key on any domain error."""
    attack = None
    if values["attack"] != "none":
        try:
            attack = AttackSpec(
                values["attack"],
                p=float(values["p"]),
                attack_probability=float(values["attack_probability"]),
                allow_weak_clone=bool(values["allow_weak_clone"]),
            )
        except InvalidParameterError as exc:
            field = "attack_probability" if "attack_probability" in str(exc) else "p"
            raise ConfigError(field, str(exc)) from None
    checks = {
        "copies": lambda: SessionConfig(int(values["copies"])),
        "check_fraction": lambda: SessionConfig(int(values["copies"]), float(values["check_fraction"])),
        "verdict_k": lambda: SessionConfig(2, 0.5, verdict_k=float(values["verdict_k"])),
        "schedule": lambda: SessionConfig(2, 0.5, schedule=str(values["schedule"])),
    }
    for field, build in checks.items():
        try:
            build()
        except InvalidParameterError as exc:
            raise ConfigError(field, str(exc)) from None
    return SessionConfig(
        n_copies=int(values["copies"]),
        check_fraction=float(values["check_fraction"]),
        master_seed=int(values["seed"]),
        attack=attack,
        verdict_k=float(values["verdict_k"]),
        schedule=str(values["schedule"]),
    )


def dump(values: Mapping[str, object]) -> str:
    return "".join(f"{k} = {values[k]}\n" for k in DEFAULTS)
