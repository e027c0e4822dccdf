"""Current traces and their binary file format."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .._validation import check_1d
from ..exceptions import BadMagicError, BadVersionError, FormatError, InvalidInputError, TruncatedError

MAGIC = b"PWTR"
VERSION = 1
_HEADER = struct.Struct("<4sBdQ")


@dataclass(frozen=True, eq=False)
class PowerTrace:
    """Uniformly sampled current draw in amperes."""

    samples: np.ndarray
    sampling_rate: float

    def __post_init__(self):
        samples = check_1d("samples", self.samples, min_length=0)
        if not (self.sampling_rate > 0 and math.isfinite(self.sampling_rate)):
            raise InvalidInputError(f"sampling rate must be positive, got {self.sampling_rate!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sampling_rate", float(self.sampling_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sampling_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.sampling_rate

    def __eq__(self, other):
        if not isinstance(other, PowerTrace):
            return NotImplemented
        return self.sampling_rate == other.sampling_rate and np.array_equal(self.samples, other.samples)

    def prepend(self, level: float, count: int) -> "PowerTrace":
        pad = np.full(count, level, dtype=float)
        return PowerTrace(np.concatenate([pad, self.samples]), self.sampling_rate)


def trace_to_bytes(trace: PowerTrace) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, trace.sampling_rate, len(trace))
    return header + trace.samples.astype("<f4").tobytes()


def trace_from_bytes(buf: bytes) -> PowerTrace:
    if len(buf) < _HEADER.size:
        raise TruncatedError(f"trace header needs {_HEADER.size} bytes, got {len(buf)}", len(buf))
    magic, version, fs, count = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise BadVersionError(f"unsupported trace version {version}", 4)
    if not (fs > 0 and math.isfinite(fs)):
        raise FormatError(f"invalid sampling rate {fs!r}", 5)
    if count == 0:
        raise FormatError("trace holds no samples", 13)
    body = len(buf) - _HEADER.size
    if body < 4 * count:
        raise TruncatedError(f"header declares {count} samples, body holds {body // 4}", len(buf))
    if body > 4 * count:
        raise FormatError("trailing bytes after samples", _HEADER.size + 4 * count)
    samples = np.frombuffer(buf, dtype="<f4", count=count, offset=_HEADER.size).astype(float)
    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        raise FormatError("non-finite sample", _HEADER.size + 4 * int(bad[0]))
    return PowerTrace(samples, fs)


def write_trace(path, trace: PowerTrace) -> None:
    Path(path).write_bytes(trace_to_bytes(trace))


def read_trace(path) -> PowerTrace:
    return trace_from_bytes(Path(path).read_bytes())
