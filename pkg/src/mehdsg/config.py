"""Flat ``key = value`` scenario files with ``[section]`` headers.

Every key belongs to exactly one section (see ``Scenario`` field metadata);
unknown keys, misplaced keys, duplicates and bad values are errors that
name the offending line.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

from .mesh import ConfigError
from .scenarios import Scenario

SECTIONS = ("scenario", "mesh", "discretization", "solver", "output")
_FIELDS = {f.name: f for f in dataclasses.fields(Scenario)}


class ConfigSyntaxError(ConfigError):
    def __init__(self, message, line=None, source="<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _convert(name, text):
    kind = _FIELDS[name].type
    kind = kind if isinstance(kind, str) else kind.__name__
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got '{text}'")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def parse_config(text: str, source: str = "<config>") -> Scenario:
    values = {}
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigSyntaxError(f"malformed section header '{raw.strip()}'", no, source)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigSyntaxError(f"unknown section '{section}', expected one of {SECTIONS}", no, source)
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"expected 'key = value', got '{raw.strip()}'", no, source)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigSyntaxError(f"unknown key '{key}'", no, source)
        want = _FIELDS[key].metadata["section"]
        if section is None:
            raise ConfigSyntaxError(f"key '{key}' appears before any section header", no, source)
        if section != want:
            raise ConfigSyntaxError(f"key '{key}' belongs in section [{want}], not [{section}]", no, source)
        if key in values:
            raise ConfigSyntaxError(f"duplicate key '{key}' (first set on line {lines[key]})", no, source)
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigSyntaxError(f"bad value for '{key}': {exc}", no, source) from None
        lines[key] = no
    try:
        return Scenario(**values).validate()
    except ConfigError as exc:
        # validation messages start with the key name
        msg = str(exc)
        line = lines.get(msg.split(":", 1)[0])
        raise ConfigSyntaxError(msg, line, source) from None


def load_config(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigSyntaxError(f"cannot read config: {exc.strerror}", None, str(p)) from None
    return parse_config(text, str(p))


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(sc: Scenario) -> str:
    out = []
    for sec in SECTIONS:
        out.append(f"[{sec}]")
        for f in dataclasses.fields(Scenario):
            if f.metadata["section"] == sec:
                out.append(f"{f.name} = {_format(getattr(sc, f.name))}")
        out.append("")
    return "\n".join(out)


def save_config(sc: Scenario, path):
    Path(path).write_text(serialize_config(sc))
    return Path(path)
