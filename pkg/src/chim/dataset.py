"""The .chim binary dataset format and dataset manipulation.

A dataset is a stack of channel images with one label per sample and an
optional normalization scale. The on-disk layout is little-endian
throughout:

    header (26 bytes):
        magic               4 bytes, b"CHIM"
        version             u16  (currently 1)
        sample_count        u32
        m                   u16  subcarriers
        n                   u16  time slots
        normalization_scale f64  (0.0 means unnormalized)
        label_block_length  u32  byte length of the label block
    label block:
        type_count          u16
        type_count entries: name_length u16, then UTF-8 bytes
        sample_count records: type_id u16, speed f32
    payload:
        sample_count * m * n * 2 float32 values; per sample the whole
        real plane row-major, then the whole imaginary plane.

Identical datasets serialize to identical bytes; label speeds are held at
float32 precision inside the container so a read-back dataset compares
equal bit for bit.
"""
from __future__ import annotations

import csv
import os
import struct
import tempfile

import numpy as np

from .errors import (
    DatasetCorruptionError,
    DatasetFormatError,
    DatasetVersionError,
    EmptyDatasetError,
)
from .image import ChannelLabel, NormalizationSpec, apply_normalization, fit_normalization

MAGIC = b"CHIM"
VERSION = 1
_HEADER = struct.Struct("<4sHIHHdI")
_LABEL_RECORD = struct.Struct("<Hf")
_U16 = struct.Struct("<H")


class Dataset:
    """In-memory dataset: (count, m, n, 2) float32 planes plus labels."""

    def __init__(self, samples, labels, normalization_scale: float = 0.0):
        arr = np.ascontiguousarray(samples, dtype=np.float32)
        if arr.ndim != 4 or arr.shape[3] != 2:
            raise ValueError(f"samples must have shape (count, m, n, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        labels = [
            ChannelLabel(lab.channel_type, float(np.float32(lab.user_speed)))
            for lab in labels
        ]
        if len(labels) != arr.shape[0]:
            raise ValueError(
                f"label count {len(labels)} does not match sample count {arr.shape[0]}"
            )
        if not normalization_scale >= 0.0:
            raise ValueError("normalization_scale must be >= 0 (0 = unnormalized)")
        self.samples = arr
        self.labels = labels
        self.normalization_scale = float(normalization_scale)

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]

    @property
    def m(self) -> int:
        return self.samples.shape[1]

    @property
    def n(self) -> int:
        return self.samples.shape[2]

    def __len__(self) -> int:
        return self.sample_count

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.samples.shape == other.samples.shape
            and self.samples.tobytes() == other.samples.tobytes()
            and self.labels == other.labels
            and self.normalization_scale == other.normalization_scale
        )

    def grid(self, index: int, denormalize: bool = True) -> np.ndarray:
        """Sample `index` as an (m, n) complex grid, in physical units when
        the dataset carries a normalization scale and denormalize is True."""
        planes = self.samples[index].astype(np.float64)
        grid = planes[:, :, 0] + 1j * planes[:, :, 1]
        if denormalize and self.normalization_scale > 0.0:
            grid *= self.normalization_scale
        return grid

    def grids(self, denormalize: bool = True):
        for i in range(self.sample_count):
            yield self.grid(i, denormalize=denormalize)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            samples=self.samples[idx],
            labels=[self.labels[i] for i in idx],
            normalization_scale=self.normalization_scale,
        )


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".chim-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        # mkstemp files are 0600; give the target normal umask permissions
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _encode_labels(labels) -> bytes:
    type_table: list[str] = []
    type_ids = {}
    for lab in labels:
        if lab.channel_type not in type_ids:
            type_ids[lab.channel_type] = len(type_table)
            type_table.append(lab.channel_type)
    if len(type_table) > 0xFFFF:
        raise ValueError("too many distinct channel types for the label table")
    parts = [_U16.pack(len(type_table))]
    for name in type_table:
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"channel type name too long: {name[:32]!r}...")
        parts.append(_U16.pack(len(raw)))
        parts.append(raw)
    for lab in labels:
        parts.append(_LABEL_RECORD.pack(type_ids[lab.channel_type], lab.user_speed))
    return b"".join(parts)


def _decode_labels(block: bytes, sample_count: int) -> list[ChannelLabel]:
    offset = 0
    try:
        (type_count,) = _U16.unpack_from(block, offset)
        offset += _U16.size
        names = []
        for _ in range(type_count):
            (length,) = _U16.unpack_from(block, offset)
            offset += _U16.size
            if offset + length > len(block):
                raise struct.error("name runs past label block")
            names.append(block[offset : offset + length].decode("utf-8"))
            offset += length
        labels = []
        for _ in range(sample_count):
            type_id, speed = _LABEL_RECORD.unpack_from(block, offset)
            offset += _LABEL_RECORD.size
            if type_id >= type_count:
                raise DatasetFormatError(f"label type id {type_id} out of range")
            labels.append(ChannelLabel(names[type_id], float(speed)))
    except struct.error as exc:
        raise DatasetCorruptionError(f"label block truncated: {exc}") from None
    if offset != len(block):
        raise DatasetCorruptionError(
            f"label block length mismatch: {len(block)} declared, {offset} used"
        )
    return labels


def write_dataset(dataset: Dataset, path) -> None:
    """Serialize to the byte layout above. Deterministic: equal datasets
    produce byte-identical files."""
    label_block = _encode_labels(dataset.labels)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        dataset.sample_count,
        dataset.m,
        dataset.n,
        dataset.normalization_scale,
        len(label_block),
    )
    # disk layout is (sample, plane, row, col)
    payload = np.ascontiguousarray(dataset.samples.transpose(0, 3, 1, 2))
    if payload.dtype.byteorder not in ("<", "="):
        payload = payload.astype("<f4")
    atomic_write_bytes(path, header + label_block + payload.tobytes())


def read_dataset(path) -> Dataset:
    """Read and validate a .chim file."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise DatasetFormatError(f"{path}: not a chim dataset (bad magic)")
    if len(blob) < _HEADER.size:
        raise DatasetCorruptionError(f"{path}: truncated header")
    magic, version, count, m, n, scale, label_len = _HEADER.unpack_from(blob, 0)
    if version != VERSION:
        raise DatasetVersionError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    if offset + label_len > len(blob):
        raise DatasetCorruptionError(f"{path}: label block runs past end of file")
    labels = _decode_labels(blob[offset : offset + label_len], count)
    offset += label_len
    expected = count * m * n * 2 * 4
    actual = len(blob) - offset
    if actual != expected:
        raise DatasetCorruptionError(
            f"{path}: payload is {actual} bytes, header declares {expected}"
        )
    flat = np.frombuffer(blob, dtype="<f4", count=count * m * n * 2, offset=offset)
    samples = flat.reshape(count, 2, m, n).transpose(0, 2, 3, 1)
    if not np.all(np.isfinite(samples)):
        raise DatasetCorruptionError(f"{path}: payload contains non-finite floats")
    return Dataset(samples=samples, labels=labels, normalization_scale=scale)


def import_csi_csv(
    path,
    m: int,
    n: int,
    polar: bool = False,
    skip_header: bool = False,
    channel_type: str = "csi",
    user_speed: float = 0.0,
):
    """Window a CSV of channel-state snapshots into (m, n) grids.

    Each row is one time snapshot: 2*m floats, interleaved per subcarrier.
    The default convention is (real, imag); with polar=True rows are read
    as (magnitude, phase[rad]) and converted. Consecutive non-overlapping
    windows of n rows become one grid each.

    Returns (dataset, dropped_rows) where dropped_rows counts the leftover
    rows after the last complete window.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for rownum, fields in enumerate(reader, start=1):
            if skip_header and rownum == 1:
                continue
            if not fields:
                continue
            if len(fields) != 2 * m:
                raise DatasetFormatError(
                    f"{path}: row {rownum}: expected {2 * m} fields, got {len(fields)}"
                )
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: row {rownum}: non-numeric field"
                ) from None
    if len(rows) < n:
        raise EmptyDatasetError(
            f"{path}: {len(rows)} data rows, need at least {n} for one grid"
        )
    count = len(rows) // n
    dropped = len(rows) % n
    data = np.asarray(rows[: count * n], dtype=float).reshape(count, n, m, 2)
    first, second = data[..., 0], data[..., 1]
    if polar:
        grids = first * np.exp(1j * second)
    else:
        grids = first + 1j * second
    # rows are time snapshots: (count, n, m) -> (count, m, n)
    grids = grids.transpose(0, 2, 1)
    planes = np.stack([grids.real, grids.imag], axis=-1).astype(np.float32)
    label = ChannelLabel(channel_type=channel_type, user_speed=user_speed)
    return Dataset(samples=planes, labels=[label] * count), dropped


def split_dataset(dataset: Dataset, fraction: float, seed: int):
    """Random disjoint split, reproducible from the seed.

    The first part gets floor(fraction * count) samples (clamped so both
    parts are non-empty); original sample order is kept inside each part.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    count = dataset.sample_count
    if count < 2:
        raise ValueError("cannot split a dataset with fewer than 2 samples")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(count)
    size_a = min(max(int(fraction * count), 1), count - 1)
    idx_a = np.sort(perm[:size_a])
    idx_b = np.sort(perm[size_a:])
    return dataset.subset(idx_a), dataset.subset(idx_b)


def filter_by_label(dataset: Dataset, predicate) -> Dataset:
    """Samples whose label satisfies the predicate, in original order.
    An empty result is a valid (zero-sample) dataset."""
    idx = [i for i, lab in enumerate(dataset.labels) if predicate(lab)]
    return dataset.subset(idx)


def normalize_dataset(dataset: Dataset, method: str):
    """Fit a normalization on the dataset and apply it.

    Returns (normalized_dataset, spec, clamp_count); the scale is stored in
    the dataset header so downstream consumers denormalize identically.
    """
    if dataset.normalization_scale > 0.0:
        raise ValueError("dataset is already normalized")
    spec = fit_normalization(dataset.samples, method=method)
    values, clamped = apply_normalization(dataset.samples, spec)
    out = Dataset(
        samples=values.astype(np.float32),
        labels=dataset.labels,
        normalization_scale=spec.scale,
    )
    return out, spec, clamped


def denormalize_dataset(dataset: Dataset) -> Dataset:
    """Fold the stored scale back into the plane values (scale becomes 0)."""
    if dataset.normalization_scale <= 0.0:
        return dataset
    spec = NormalizationSpec(scale=dataset.normalization_scale)
    return Dataset(
        samples=(dataset.samples.astype(np.float64) * spec.scale).astype(np.float32),
        labels=dataset.labels,
        normalization_scale=0.0,
    )
