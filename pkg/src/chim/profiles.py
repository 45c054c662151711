"""Tap delay line profiles.

A profile names the discrete multipath taps of a channel: each tap has an
excess delay and a relative mean power. The built-in profiles (etu, eva,
peda) are loaded from the plain-text files shipped in ``chim/data``; the
same format can be used to define custom profiles.

Profile file format (UTF-8, ``#`` starts a comment):

    name <identifier>
    tap <delay_ns> <power_db>
    tap <delay_ns> <power_db>
    ...

Delays must be non-decreasing and start at 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ProfileError

BUILTIN_NAMES = ("etu", "eva", "peda")


@dataclass(frozen=True)
class TapProfile:
    """Ordered multipath taps: (delay [s], mean power [dB]) per tap."""

    name: str
    taps: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.taps:
            raise ProfileError(f"profile {self.name!r} has no taps")
        delays = [d for d, _ in self.taps]
        powers = [p for _, p in self.taps]
        if delays[0] != 0.0:
            raise ProfileError(f"profile {self.name!r}: first tap delay must be 0")
        if any(b < a for a, b in zip(delays, delays[1:])):
            raise ProfileError(f"profile {self.name!r}: delays must be non-decreasing")
        if not all(map(math.isfinite, delays)) or not all(map(math.isfinite, powers)):
            raise ProfileError(f"profile {self.name!r}: non-finite tap value")
        if sum(10.0 ** (p / 10.0) for p in powers) <= 0.0:
            raise ProfileError(f"profile {self.name!r}: total linear power must be positive")

    @property
    def num_taps(self) -> int:
        return len(self.taps)

    def delays(self) -> np.ndarray:
        """Tap delays in seconds, shape (num_taps,)."""
        return np.array([d for d, _ in self.taps], dtype=float)

    def powers_db(self) -> np.ndarray:
        """Tap mean powers in dB, shape (num_taps,)."""
        return np.array([p for _, p in self.taps], dtype=float)

    def normalized_linear_powers(self) -> np.ndarray:
        """Linear tap powers scaled so they sum to 1."""
        p = 10.0 ** (self.powers_db() / 10.0)
        return p / p.sum()


def parse_profile(text: str, source: str = "<string>") -> TapProfile:
    """Parse a profile from its text form; raises ProfileError on bad input."""
    name = None
    taps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "name" and len(fields) == 2:
            name = fields[1]
        elif fields[0] == "tap" and len(fields) == 3:
            try:
                delay_ns, power_db = float(fields[1]), float(fields[2])
            except ValueError:
                raise ProfileError(f"{source}:{lineno}: bad tap numbers: {line!r}") from None
            taps.append((delay_ns * 1e-9, power_db))
        else:
            raise ProfileError(f"{source}:{lineno}: unrecognized line: {line!r}")
    if name is None:
        raise ProfileError(f"{source}: missing 'name' line")
    return TapProfile(name=name, taps=tuple(taps))


def load_profile(path) -> TapProfile:
    """Load a profile from a file path."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh.read(), source=str(path))


def format_profile(profile: TapProfile) -> str:
    """Render a profile back to the text file format."""
    lines = [f"name {profile.name}"]
    for delay_s, power_db in profile.taps:
        lines.append(f"tap {delay_s * 1e9:g} {power_db:g}")
    return "\n".join(lines) + "\n"


def builtin_profile(name: str) -> TapProfile:
    """Return a built-in profile (one of BUILTIN_NAMES) by name."""
    key = name.lower()
    if key not in BUILTIN_NAMES:
        raise ProfileError(
            f"unknown profile {name!r}; built-ins are: {', '.join(BUILTIN_NAMES)}"
        )
    text = resources.files("chim.data").joinpath(f"{key}.profile").read_text("utf-8")
    return parse_profile(text, source=f"builtin:{key}")


def single_tap_profile(name: str = "flat", power_db: float = 0.0) -> TapProfile:
    """One tap at delay 0: frequency-flat fading, useful for calibration."""
    return TapProfile(name=name, taps=((0.0, power_db),))
