"""Fading statistics for sets of time-frequency grids.

The suite evaluates any dataset of channel samples, whatever produced
them: level crossing rate (LCR) and average fade duration (AFD) on the
time-domain envelope, and a cepstral distance on the mean autocorrelation
of 1-D sequences derived from the grids.

An (m, n) grid turns into a length m*n sequence by one of three schemes:

    ifft-time:   inverse DFT of each column (a frequency response per
                 slot), results concatenated in slot order; the envelope
                 source for LCR/AFD.
    freq-concat: columns concatenated as-is; quasi-periodic with period m,
                 used to compare channel types.
    time-concat: rows concatenated (per-subcarrier time series);
                 quasi-periodic with period n, used to compare user speeds.

The autocorrelation pipeline works on the mean-removed magnitude of a
sequence with the biased estimator (divide by L), keeping its spectrum
positive semidefinite. The cepstrum is

    c = real(ifft(log(max(abs(fft(R)), floor))))

with a floor relative to the spectrum's peak, and the cepstral distance
between two datasets is the mean squared error of the first K cepstral
coefficients of their mean autocorrelations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

SCHEME_IFFT_TIME = "ifft-time"
SCHEME_FREQ_CONCAT = "freq-concat"
SCHEME_TIME_CONCAT = "time-concat"
SCHEMES = (SCHEME_IFFT_TIME, SCHEME_FREQ_CONCAT, SCHEME_TIME_CONCAT)

DEFAULT_K = 32
DEFAULT_EPSILON = 1e-12
DEFAULT_LEVELS_DB = np.linspace(-30.0, 10.0, 40)


# ---------------------------------------------------------------------------
# grid -> 1-D sequence conversions


def grid_to_time_sequence(grid: np.ndarray) -> np.ndarray:
    """Per-slot inverse DFT over subcarriers, slots concatenated."""
    g = _check_grid(grid)
    return np.fft.ifft(g, axis=0).ravel(order="F")


def grid_to_freqconcat_sequence(grid: np.ndarray) -> np.ndarray:
    """Frequency responses (columns) concatenated in slot order."""
    return _check_grid(grid).ravel(order="F")


def grid_to_timeconcat_sequence(grid: np.ndarray) -> np.ndarray:
    """Per-subcarrier time series (rows) concatenated in subcarrier order."""
    return _check_grid(grid).ravel(order="C")


_CONVERTERS = {
    SCHEME_IFFT_TIME: grid_to_time_sequence,
    SCHEME_FREQ_CONCAT: grid_to_freqconcat_sequence,
    SCHEME_TIME_CONCAT: grid_to_timeconcat_sequence,
}


def grid_to_sequence(grid: np.ndarray, scheme: str) -> np.ndarray:
    if scheme not in _CONVERTERS:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return _CONVERTERS[scheme](grid)


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid)
    if g.ndim != 2:
        raise ValueError(f"grid must be 2-D, got shape {g.shape}")
    return g


# ---------------------------------------------------------------------------
# autocorrelation and cepstrum


def biased_autocorr(x: np.ndarray) -> np.ndarray:
    """Biased estimator R[m] = (1/L) * sum_k x[k] * conj(x[k+m]), lags 0..L-1.

    Computed via FFT (zero-padded, so no circular aliasing); real input
    gives real output. R[0] is the mean squared magnitude.
    """
    x = np.asarray(x)
    L = x.size
    if L == 0:
        raise ValueError("sequence must be non-empty")
    nfft = 1 << (2 * L - 1).bit_length()
    spec = np.fft.fft(x, nfft)
    r = np.fft.ifft(spec * np.conj(spec))[:L] / L
    # ifft yields sum x[k+m]conj(x[k]); the estimator wants its conjugate
    r = np.conj(r)
    if np.isrealobj(x):
        return r.real
    return r


def autocorr(seq: np.ndarray) -> np.ndarray:
    """Autocorrelation of a sequence's mean-removed magnitude.

    The magnitude preprocessing makes the statistic real and envelope-like
    regardless of the sequence's phase convention.
    """
    mag = np.abs(np.asarray(seq, dtype=complex)).astype(float)
    return biased_autocorr(mag - mag.mean())


@dataclass(frozen=True)
class AutocorrMean:
    """Mean of per-sample autocorrelations, with provenance."""

    values: np.ndarray
    sample_count: int
    scheme: str


def mean_autocorr(data, scheme: str) -> AutocorrMean:
    """Elementwise mean of autocorr over every sample of a dataset (or a
    list of equally sized grids)."""
    if isinstance(data, Dataset):
        grids = list(data.grids())
    else:
        grids = [np.asarray(g) for g in data]
    if not grids:
        raise ValueError("need at least one grid")
    shape = grids[0].shape
    if any(g.shape != shape for g in grids):
        raise ValueError("all grids must have the same size")
    acs = np.stack([autocorr(grid_to_sequence(g, scheme)) for g in grids])
    return AutocorrMean(values=acs.mean(axis=0), sample_count=len(grids), scheme=scheme)


@dataclass(frozen=True)
class CepstrumVector:
    """Real cepstral coefficients and the absolute log-floor applied."""

    coefficients: np.ndarray
    epsilon_floor: float


def cepstrum(mean_ac, epsilon: float = DEFAULT_EPSILON) -> CepstrumVector:
    """Real cepstrum of an autocorrelation sequence.

    Pipeline: FFT, magnitude floored at epsilon * max magnitude, log,
    inverse FFT, real part. The relative floor keeps spectral nulls finite
    without breaking scale behaviour (scaling the input by k > 0 moves
    only coefficient 0, by log k). Output length equals input length.
    """
    values = np.asarray(getattr(mean_ac, "values", mean_ac), dtype=float)
    if values.size == 0:
        raise ValueError("autocorrelation must be non-empty")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    spec = np.abs(np.fft.fft(values))
    floor = epsilon * spec.max()
    if floor == 0.0:
        # all-zero input: log of the bare epsilon keeps the result finite
        floor = epsilon
    coeffs = np.real(np.fft.ifft(np.log(np.maximum(spec, floor))))
    if not np.all(np.isfinite(coeffs)):
        raise FloatingPointError("cepstrum produced non-finite coefficients")
    return CepstrumVector(coefficients=coeffs, epsilon_floor=float(floor))


def cdm(cep_a, cep_b, k: int = DEFAULT_K) -> float:
    """Mean squared error of the first k cepstral coefficients."""
    a = np.asarray(getattr(cep_a, "coefficients", cep_a), dtype=float)
    b = np.asarray(getattr(cep_b, "coefficients", cep_b), dtype=float)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > a.size or k > b.size:
        raise ValueError(f"k={k} exceeds cepstrum length ({a.size}, {b.size})")
    d = a[:k] - b[:k]
    return float(d @ d / k)


@dataclass(frozen=True)
class CdmMatrix:
    """Pairwise cepstral distances between reference and candidate sets."""

    row_names: tuple[str, ...]
    col_names: tuple[str, ...]
    entries: np.ndarray
    k: int
    epsilon: float
    scheme: str

    def to_dict(self) -> dict:
        return {
            "row_names": list(self.row_names),
            "col_names": list(self.col_names),
            "entries": self.entries.tolist(),
            "K": self.k,
            "epsilon": self.epsilon,
            "scheme": self.scheme,
        }


def dataset_name(dataset: Dataset) -> str:
    """Short identifier from the labels, e.g. 'etu@50'."""
    types = sorted({lab.channel_type for lab in dataset.labels})
    speeds = sorted({lab.user_speed for lab in dataset.labels})
    type_part = types[0] if len(types) == 1 else "mixed"
    if len(speeds) == 1:
        return f"{type_part}@{speeds[0]:g}"
    return type_part


def cdm_matrix(
    references,
    candidates,
    scheme: str,
    k: int = DEFAULT_K,
    epsilon: float = DEFAULT_EPSILON,
    row_names=None,
    col_names=None,
) -> CdmMatrix:
    """Entry (i, j) = cdm between reference i and candidate j.

    Use freq-concat to compare channel types and time-concat to compare
    user speeds. All datasets must share the grid size.
    """
    references, candidates = list(references), list(candidates)
    if not references or not candidates:
        raise ValueError("need at least one reference and one candidate dataset")
    sizes = {(d.m, d.n) for d in references + candidates}
    if len(sizes) != 1:
        raise ValueError(f"datasets disagree on grid size: {sorted(sizes)}")
    row_names = tuple(row_names or (dataset_name(d) for d in references))
    col_names = tuple(col_names or (dataset_name(d) for d in candidates))
    ref_ceps = [cepstrum(mean_autocorr(d, scheme), epsilon) for d in references]
    cand_ceps = [cepstrum(mean_autocorr(d, scheme), epsilon) for d in candidates]
    entries = np.array(
        [[cdm(r, c, k) for c in cand_ceps] for r in ref_ceps], dtype=float
    )
    return CdmMatrix(
        row_names=row_names,
        col_names=col_names,
        entries=entries,
        k=k,
        epsilon=epsilon,
        scheme=scheme,
    )


# ---------------------------------------------------------------------------
# level crossing rate / average fade duration


@dataclass(frozen=True)
class LevelCurve:
    """Per-level statistic; levels are linear thresholds relative to the
    RMS envelope (the RMS itself is kept for unit conversion)."""

    levels: np.ndarray
    values: np.ndarray
    rms: float
    kind: str

    def __post_init__(self):
        if np.any(np.diff(self.levels) <= 0):
            raise ValueError("levels must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("curve values must be >= 0")


def default_levels() -> np.ndarray:
    """40 linear thresholds spanning -30 dB .. +10 dB relative to RMS."""
    return 10.0 ** (DEFAULT_LEVELS_DB / 20.0)


def dataset_envelopes(dataset: Dataset) -> np.ndarray:
    """|ifft-time sequence| of every sample, shape (count, m*n)."""
    return np.stack(
        [np.abs(grid_to_time_sequence(g)) for g in dataset.grids()]
    )


def _as_envelopes(envelopes) -> list[np.ndarray]:
    if isinstance(envelopes, np.ndarray) and envelopes.ndim == 2:
        envs = [envelopes[i] for i in range(envelopes.shape[0])]
    else:
        envs = [np.asarray(e, dtype=float).ravel() for e in envelopes]
    if not envs:
        raise ValueError("empty envelope set")
    if any(e.size < 1 for e in envs):
        raise ValueError("envelopes must be non-empty")
    return envs


def _pooled_rms(envs) -> float:
    total = sum(float(e @ e) for e in envs)
    count = sum(e.size for e in envs)
    return float(np.sqrt(total / count))


def lcr(envelopes, sample_interval: float, levels=None) -> LevelCurve:
    """Mean up-crossing rate (crossings per second) per level.

    A crossing is a strict sample pair e[k] < threshold <= e[k+1]; the
    rate of each envelope is crossings / (samples * sample_interval), and
    the curve is the mean rate over the envelope set.
    """
    envs = _as_envelopes(envelopes)
    if sample_interval <= 0:
        raise ValueError("sample_interval must be > 0")
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    rms = _pooled_rms(envs)
    thresholds = levels * rms
    rates = np.zeros(levels.size)
    for e in envs:
        up = (e[:-1, None] < thresholds) & (e[1:, None] >= thresholds)
        rates += up.sum(axis=0) / (e.size * sample_interval)
    return LevelCurve(levels=levels, values=rates / len(envs), rms=rms, kind="lcr")


def afd(envelopes, sample_interval: float, levels=None) -> LevelCurve:
    """Average fade duration per level: total time below the threshold
    divided by the number of maximal below-runs, pooled over the set;
    0 where nothing ever fades below. Sample-and-hold timing."""
    envs = _as_envelopes(envelopes)
    if sample_interval <= 0:
        raise ValueError("sample_interval must be > 0")
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    rms = _pooled_rms(envs)
    thresholds = levels * rms
    time_below = np.zeros(levels.size)
    excursions = np.zeros(levels.size)
    for e in envs:
        below = e[:, None] < thresholds
        time_below += below.sum(axis=0) * sample_interval
        excursions += below[0].astype(float)
        excursions += (below[1:] & ~below[:-1]).sum(axis=0)
    values = np.divide(
        time_below, excursions, out=np.zeros_like(time_below), where=excursions > 0
    )
    return LevelCurve(levels=levels, values=values, rms=rms, kind="afd")


# ---------------------------------------------------------------------------
# time-axis variation


def time_variation(data) -> float:
    """Mean absolute slot-to-slot change of |grid|; grows with Doppler.

    Accepts one grid or a Dataset (mean over its samples)."""
    if isinstance(data, Dataset):
        return float(np.mean([time_variation(g) for g in data.grids()]))
    g = _check_grid(data)
    if g.shape[1] < 2:
        raise ValueError("need at least 2 slots to measure time variation")
    return float(np.mean(np.abs(np.diff(np.abs(g), axis=1))))
