"""Flat key = value config files with '#' comments and line-numbered errors.

Dotted keys group settings: dataset.dir or sbm.* pick the data, model.* the
preset and its knobs, train.* the optimizer, out.dir the output directory.
The full schema is documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ConfigValue:
    raw: str
    line: int


def parse_config_text(text: str, source: str = "<config>") -> dict[str, ConfigValue]:
    out: dict[str, ConfigValue] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' in {source}", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"empty key in {source}", line=lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        out[key] = ConfigValue(raw=value, line=lineno)
    return out


def parse_config(path) -> dict[str, ConfigValue]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


_REQUIRED = object()


class ConfigView:
    """Typed getters over a parsed config; errors carry the line number."""

    def __init__(self, values: dict[str, ConfigValue]):
        self.values = values
        self._used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.values

    def _fetch(self, key: str, default):
        if key not in self.values:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r}")
            return None, default
        self._used.add(key)
        return self.values[key], None

    def get_str(self, key: str, default=None) -> str | None:
        cv, dflt = self._fetch(key, default)
        return cv.raw if cv else dflt

    def _convert(self, key: str, cv: ConfigValue, fn, what: str):
        try:
            return fn(cv.raw)
        except ValueError:
            raise ConfigError(f"key {key!r} needs {what}, got {cv.raw!r}",
                              line=cv.line) from None

    def get_int(self, key: str, default=None):
        cv, dflt = self._fetch(key, default)
        return self._convert(key, cv, int, "an integer") if cv else dflt

    def get_float(self, key: str, default=None):
        cv, dflt = self._fetch(key, default)
        return self._convert(key, cv, float, "a number") if cv else dflt

    def get_int_tuple(self, key: str, default=None):
        cv, dflt = self._fetch(key, default)
        if not cv:
            return dflt
        return self._convert(key, cv,
                             lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
                             "comma-separated integers")

    def get_paths(self, key: str, default=None):
        """Wavelet-scale paths: scales comma-separated, paths split on '|'."""
        cv, dflt = self._fetch(key, default)
        if not cv:
            return dflt
        return self._convert(
            key, cv,
            lambda s: tuple(tuple(int(x) for x in part.split(",") if x.strip())
                            for part in s.split("|")),
            "paths like '1|2,3'")

    def unknown_keys(self, known_prefixes) -> list[str]:
        return sorted(k for k in self.values
                      if not any(k == p or k.startswith(p + ".") for p in known_prefixes))
