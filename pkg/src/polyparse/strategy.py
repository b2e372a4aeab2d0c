"""Sharing strategies over the character (C), word (W) and state (S) parameter sets."""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass


class Mode(enum.Enum):
    SEPARATE = "x"
    HARD = "h"
    SOFT = "id"

    @property
    def shared(self) -> bool:
        return self is not Mode.SEPARATE

    @property
    def symbol(self) -> str:
        return {"x": "✗", "h": "✓", "id": "ID"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Mode":
        key = text.strip().lower()
        aliases = {
            "x": "x", "✗": "x", "no": "x", "separate": "x", "none": "x",
            "h": "h", "✓": "h", "hard": "h", "yes": "h",
            "id": "id", "soft": "id",
        }
        if key not in aliases:
            raise ValueError(f"unknown sharing mode {text!r}")
        return cls(aliases[key])


# less sharing first; used for tie-breaks
MODE_PRIORITY = {Mode.SEPARATE: 0, Mode.SOFT: 1, Mode.HARD: 2}

COMPONENTS = ("char", "word", "state")


@dataclass(frozen=True, order=False)
class SharingStrategy:
    char: Mode = Mode.SEPARATE
    word: Mode = Mode.SEPARATE
    state: Mode = Mode.SEPARATE

    def mode(self, component: str) -> Mode:
        return getattr(self, component)

    def __str__(self) -> str:
        return f"C={self.char.value},W={self.word.value},S={self.state.value}"

    def symbols(self, ascii: bool = False) -> tuple[str, str, str]:
        modes = (self.char, self.word, self.state)
        return tuple(m.value if ascii else m.symbol for m in modes)

    @classmethod
    def parse(cls, text: str) -> "SharingStrategy":
        parts = dict(
            (k.strip().upper(), v) for k, v in (p.split("=", 1) for p in re.split(r"[,\s]+", text.strip()) if p)
        ) if "=" in text else None
        if parts is None or set(parts) != {"C", "W", "S"}:
            raise ValueError(f"strategy must look like 'C=x,W=h,S=id', got {text!r}")
        return cls(Mode.parse(parts["C"]), Mode.parse(parts["W"]), Mode.parse(parts["S"]))


def all_strategies() -> list[SharingStrategy]:
    """The 27 strategies, C varying slowest."""
    modes = (Mode.SEPARATE, Mode.HARD, Mode.SOFT)
    return [SharingStrategy(c, w, s) for c, w, s in itertools.product(modes, repeat=3)]


MONO = SharingStrategy()
