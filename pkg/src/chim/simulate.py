"""Tapped-delay-line sum-of-sinusoids fading simulator.

Each tap of a profile fades as a sum of N sinusoids

    g(t) = sum_n c_n * exp(j * (2*pi*f_n*t + theta_n))

with equal amplitudes c_n, Doppler shifts f_n = f_d*cos(alpha_n) for
uniform arrival angles alpha_n, and uniform phases theta_n (the classic
isotropic-scattering construction, which gives a Rayleigh envelope and a
J0(2*pi*f_d*tau) temporal autocorrelation). The channel's time-frequency
response over m subcarriers and n slots is assembled per slot as

    H(f, t) = sum_l g_l(t) * exp(-j*2*pi*f*tau_l)

with block fading inside a slot. Tap powers are normalized so the grid's
expected power is 1.

Randomness: everything derives from a 64-bit dataset seed. Sample i of a
dataset draws from the counter-based substream Philox(key=[seed, i]); this
derivation rule is part of the on-disk reproducibility contract and must
not change between releases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .image import ChannelLabel
from .profiles import TapProfile

SPEED_OF_LIGHT = 299792458.0  # m/s

# Upper bound on the (paths x time samples) work matrix in complex_gain.
_GAIN_CHUNK = 1 << 20


def max_doppler(speed_kmh: float, carrier_hz: float) -> float:
    """Maximum Doppler shift f_d = v * f_c / c for a user moving at v km/h."""
    if not (math.isfinite(speed_kmh) and math.isfinite(carrier_hz)):
        raise ValueError("speed and carrier frequency must be finite")
    if speed_kmh < 0:
        raise ValueError(f"speed must be >= 0, got {speed_kmh}")
    if carrier_hz <= 0:
        raise ValueError(f"carrier frequency must be > 0, got {carrier_hz}")
    return (speed_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


def substream(seed: int, index: int) -> np.random.Generator:
    """Counter-based RNG substream for sample `index` of a dataset seed.

    Stable rule: Philox with the two 64-bit key words (seed, index). Equal
    (seed, index) pairs produce identical streams on every platform.
    """
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if not 0 <= index < 2**64:
        raise ValueError("sample index must be a 64-bit unsigned integer")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: amplitude gain, Doppler shift, initial phase."""

    gain: float
    doppler: float
    phase: float

    def __post_init__(self):
        if not (math.isfinite(self.gain) and self.gain >= 0):
            raise ValueError(f"gain must be finite and >= 0, got {self.gain}")
        if not math.isfinite(self.doppler):
            raise ValueError("doppler must be finite")
        if not (math.isfinite(self.phase) and 0 <= self.phase < 2 * math.pi):
            raise ValueError(f"phase must lie in [0, 2*pi), got {self.phase}")


class PathSet:
    """Array-backed collection of PathComponent, for fast vector evaluation."""

    __slots__ = ("gains", "dopplers", "phases")

    def __init__(self, gains, dopplers, phases):
        self.gains = np.asarray(gains, dtype=float)
        self.dopplers = np.asarray(dopplers, dtype=float)
        self.phases = np.asarray(phases, dtype=float)
        if not (self.gains.shape == self.dopplers.shape == self.phases.shape):
            raise ValueError("gains, dopplers and phases must have equal length")

    def __len__(self) -> int:
        return self.gains.size

    def __iter__(self):
        for c, f, th in zip(self.gains, self.dopplers, self.phases):
            yield PathComponent(float(c), float(f), float(th))


def _path_arrays(paths):
    if isinstance(paths, PathSet):
        return paths.gains, paths.dopplers, paths.phases
    comps = list(paths)
    gains = np.array([p.gain for p in comps], dtype=float)
    dopplers = np.array([p.doppler for p in comps], dtype=float)
    phases = np.array([p.phase for p in comps], dtype=float)
    return gains, dopplers, phases


def sample_paths(
    tap_power_db: float, num_paths: int, max_doppler_hz: float, rng: np.random.Generator
) -> PathSet:
    """Draw the N sinusoid components of one fading tap.

    Equal amplitudes sqrt(P/N) with P = 10^(tap_power_db/10), so the tap's
    expected power is P. Doppler shifts are f_d*cos(alpha) with alpha
    uniform on [0, 2*pi); phases uniform on [0, 2*pi). The angle and phase
    draws do not depend on f_d, so a fixed substream yields the same path
    geometry at every speed.
    """
    if num_paths < 1:
        raise ValueError(f"num_paths must be >= 1, got {num_paths}")
    if not math.isfinite(tap_power_db):
        raise ValueError("tap power must be finite")
    if not (math.isfinite(max_doppler_hz) and max_doppler_hz >= 0):
        raise ValueError("max Doppler must be finite and >= 0")
    alpha = rng.uniform(0.0, 2.0 * np.pi, size=num_paths)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=num_paths)
    amplitude = math.sqrt(10.0 ** (tap_power_db / 10.0) / num_paths)
    return PathSet(
        gains=np.full(num_paths, amplitude),
        dopplers=max_doppler_hz * np.cos(alpha),
        phases=theta,
    )


def complex_gain(paths, t):
    """Evaluate the sum-of-sinusoids gain of one tap at time(s) t.

    `paths` is a PathSet or an iterable of PathComponent; `t` is a scalar
    (returns complex) or an array of seconds (returns a matching array).
    """
    gains, dopplers, phases = _path_arrays(paths)
    if gains.size == 0:
        raise ValueError("path collection must not be empty")
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValueError("time values must be finite")
    tv = np.atleast_1d(t_arr).ravel()
    out = np.empty(tv.size, dtype=complex)
    step = max(1, _GAIN_CHUNK // gains.size)
    for i in range(0, tv.size, step):
        block = tv[i : i + step]
        phase = 2.0 * np.pi * np.outer(dopplers, block) + phases[:, None]
        out[i : i + step] = (gains[:, None] * np.exp(1j * phase)).sum(axis=0)
    if t_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(t_arr.shape)


def frequency_response(tap_gains, tap_delays, subcarrier_freqs) -> np.ndarray:
    """Delay-phased tap sum H(f) = sum_l g_l * exp(-j*2*pi*f*tau_l).

    `tap_gains` may be shape (L,) for one time instant, or (L, n) for n
    instants; the result is (m,) or (m, n) over the m subcarrier
    frequencies.
    """
    g = np.asarray(tap_gains, dtype=complex)
    tau = np.asarray(tap_delays, dtype=float)
    f = np.asarray(subcarrier_freqs, dtype=float)
    if g.shape[0] != tau.shape[0]:
        raise ValueError(
            f"tap count mismatch: {g.shape[0]} gains vs {tau.shape[0]} delays"
        )
    steering = np.exp(-2j * np.pi * np.outer(f, tau))  # (m, L)
    return steering @ g


def subcarrier_frequencies(num_subcarriers: int, spacing_hz: float) -> np.ndarray:
    """Baseband subcarrier frequencies k*spacing, k = 0..m-1."""
    return np.arange(num_subcarriers) * float(spacing_hz)


@dataclass(frozen=True)
class SimConfig:
    """Grid geometry, mobility and sampling parameters for the simulator.

    Defaults reproduce a 1.4 MHz LTE subframe: 72 subcarriers at 15 kHz,
    14 slots of (1 ms / 14) each, 2.1 GHz carrier.
    """

    user_speed: float  # km/h
    carrier_freq: float = 2.1e9  # Hz
    num_subcarriers: int = 72
    subcarrier_spacing: float = 15e3  # Hz
    num_slots: int = 14
    slot_duration: float = 1e-3 / 14  # s
    paths_per_tap: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.num_subcarriers < 1 or self.num_slots < 1 or self.paths_per_tap < 1:
            raise ValueError("num_subcarriers, num_slots and paths_per_tap must be >= 1")
        if not (math.isfinite(self.user_speed) and self.user_speed >= 0):
            raise ValueError("user_speed must be finite and >= 0")
        if not (math.isfinite(self.carrier_freq) and self.carrier_freq > 0):
            raise ValueError("carrier_freq must be finite and > 0")
        if self.subcarrier_spacing <= 0 or self.slot_duration <= 0:
            raise ValueError("subcarrier_spacing and slot_duration must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def max_doppler_hz(self) -> float:
        return max_doppler(self.user_speed, self.carrier_freq)


@dataclass(frozen=True)
class FadingProcess:
    """One realization of every tap's path components for a profile.

    Tap powers are the profile's linear powers normalized to sum to 1, so
    the expected power of any frequency-response sample is 1.
    """

    tap_delays: np.ndarray
    tap_paths: tuple[PathSet, ...] = field(repr=False)

    @classmethod
    def sample(
        cls,
        profile: TapProfile,
        max_doppler_hz: float,
        paths_per_tap: int,
        rng: np.random.Generator,
    ) -> "FadingProcess":
        powers = profile.normalized_linear_powers()
        paths = tuple(
            sample_paths(10.0 * math.log10(p), paths_per_tap, max_doppler_hz, rng)
            for p in powers
        )
        return cls(tap_delays=profile.delays(), tap_paths=paths)

    def tap_gains(self, times) -> np.ndarray:
        """Complex gain of every tap at the given times, shape (L, len(times))."""
        tv = np.atleast_1d(np.asarray(times, dtype=float)).ravel()
        out = np.empty((len(self.tap_paths), tv.size), dtype=complex)
        for l, paths in enumerate(self.tap_paths):
            out[l] = complex_gain(paths, tv)
        return out


def generate_grid(
    config: SimConfig, profile: TapProfile, sample_index: int = 0
) -> np.ndarray:
    """One m x n complex time-frequency response, reproducible from
    (config.seed, sample_index)."""
    rng = substream(config.seed, sample_index)
    fd = config.max_doppler_hz
    process = FadingProcess.sample(profile, fd, config.paths_per_tap, rng)
    times = np.arange(config.num_slots) * config.slot_duration
    gains = process.tap_gains(times)  # (L, n)
    freqs = subcarrier_frequencies(config.num_subcarriers, config.subcarrier_spacing)
    return frequency_response(gains, process.tap_delays, freqs)  # (m, n)


def generate_dataset(config: SimConfig, profile: TapProfile, count: int) -> Dataset:
    """`count` independent grids (fresh fading process each) as a Dataset.

    Sample i uses substream (config.seed, i), so datasets are reproducible
    and any prefix of a larger dataset is identical to a smaller one.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    m, n = config.num_subcarriers, config.num_slots
    planes = np.empty((count, m, n, 2), dtype=np.float32)
    for i in range(count):
        grid = generate_grid(config, profile, sample_index=i)
        planes[i, :, :, 0] = grid.real
        planes[i, :, :, 1] = grid.imag
    label = ChannelLabel(channel_type=profile.name, user_speed=float(config.user_speed))
    return Dataset(samples=planes, labels=[label] * count)
