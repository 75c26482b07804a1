"""Plain-text key=value configuration for scenarios and channel costs.

One `key=value` per line, `#` starts a comment.  Durations accept ns,
us, ms and s suffixes ("100us"), plus the words "none" (zero) and "inf"
(a sender that never sends).  CLI --override flags reuse the same
key=value syntax.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict

INFINITE = -1  # sentinel duration: never

_SUFFIXES = (("ns", 1), ("us", 1_000), ("ms", 1_000_000), ("s", 1_000_000_000))


class ConfigError(ValueError):
    pass


def parse_duration_ns(text) -> int:
    if isinstance(text, (int, float)):
        return int(text)
    t = text.strip().lower()
    if t in ("none", "0", "off"):
        return 0
    if t in ("inf", "infinite", "never"):
        return INFINITE
    for suffix, mult in _SUFFIXES:
        if t.endswith(suffix):
            number = t[: -len(suffix)]
            try:
                return int(float(number) * mult)
            except ValueError:
                break
    try:
        return int(t)  # bare integer means nanoseconds
    except ValueError:
        raise ConfigError(f"cannot parse duration {text!r}") from None


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def parse_size(text) -> int:
    if isinstance(text, int):
        return text
    t = str(text).strip().lower()
    for suffix, mult in (("kb", 1024), ("mb", 1024 * 1024), ("b", 1)):
        if t.endswith(suffix):
            return int(float(t[: -len(suffix)]) * mult)
    return int(t)


def parse_kv_file(path: Path) -> Dict[str, str]:
    out: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def apply_overrides(kv: Dict[str, str], overrides) -> Dict[str, str]:
    out = dict(kv)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out
