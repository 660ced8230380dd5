"""Flat key=value run manifests.

A manifest pins everything a run needs to be reproduced: dataset path, cell,
encoding mode, seed, shot budgets. Floats are written with 17 significant
digits so load(save(m)) returns bit-identical values. The QML_SEED
environment variable overrides the stored seed without editing the file.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

_KEY_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = f"{value:.17g}"
        if not any(c in text for c in ".eEnif"):  # keep 1.0 from reloading as int
            text += ".0"
        return text
    text = str(value)
    if "\n" in text or "=" in text:
        raise ValueError(f"manifest values cannot contain '=' or newlines: {text!r}")
    return text


def parse_value(text):
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text) or text in ("inf", "-inf", "nan"):
        return float(text)
    return text


@dataclass
class RunManifest:
    """Ordered mapping of run settings with typed round-tripping."""

    entries: dict = field(default_factory=dict)

    def set(self, key, value):
        if not _KEY_RE.match(key):
            raise ValueError(f"bad manifest key {key!r}")
        self.entries[key] = value

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def seed(self, default=0):
        """The run seed; QML_SEED in the environment wins over the file."""
        env = os.environ.get("QML_SEED")
        if env is not None:
            return int(env)
        value = self.entries.get("seed", default)
        return int(value)

    def dumps(self):
        lines = [f"{k}={format_value(self.entries[k])}" for k in sorted(self.entries)]
        return "\n".join(lines) + ("\n" if lines else "")

    def save(self, path):
        with open(path, "w") as handle:
            handle.write(self.dumps())

    @classmethod
    def loads(cls, text):
        entries = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"manifest line {lineno} is not key=value: {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if not _KEY_RE.match(key):
                raise ValueError(f"bad manifest key {key!r} on line {lineno}")
            entries[key] = parse_value(value.strip())
        return cls(entries)

    @classmethod
    def from_file(cls, path):
        with open(path) as handle:
            return cls.loads(handle.read())
