"""Plain-text ``key=value`` model files."""

from __future__ import annotations

from pathlib import Path

from ..exceptions import FormatError
from .models import NetworkModel, TimingModel

_KEYS = {
    "timing": ("beta0", "beta1", "beta2", "beta3", "sigma_m"),
    "network": ("slope", "intercept", "sigma_n"),
}


def dumps_model(model) -> str:
    if isinstance(model, TimingModel):
        values = dict(zip(_KEYS["timing"], (*model.beta, model.sigma_m_)))
        kind = "timing"
    elif isinstance(model, NetworkModel):
        values = dict(zip(_KEYS["network"], (model.slope_, model.intercept_, model.sigma_n_)))
        kind = "network"
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    lines = [f"kind={kind}"] + [f"{k}={float(v)!r}" for k, v in values.items()]
    return "\n".join(lines) + "\n"


def loads_model(text: str):
    """Parse a model file; ``#`` starts a comment line. Errors name the byte offset."""
    values = {}
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.strip()
        if body and not body.startswith("#"):
            key, sep, raw = body.partition("=")
            key = key.strip()
            if not sep or not key:
                raise FormatError(f"expected key=value, got {body!r}", offset)
            if key in values:
                raise FormatError(f"duplicate key {key!r}", offset)
            if key == "kind":
                values[key] = raw.strip()
            else:
                try:
                    values[key] = float(raw)
                except ValueError:
                    raise FormatError(f"value for {key!r} is not a number: {raw.strip()!r}", offset) from None
        offset += len(line.encode())
    kind = values.pop("kind", None)
    if kind not in _KEYS:
        raise FormatError(f"missing or unknown model kind {kind!r}", 0)
    expected = set(_KEYS[kind])
    if set(values) != expected:
        missing = sorted(expected - set(values))
        extra = sorted(set(values) - expected)
        raise FormatError(f"{kind} model keys mismatch: missing {missing}, unexpected {extra}", 0)
    if kind == "timing":
        beta = [values[k] for k in _KEYS["timing"][:4]]
        return TimingModel.from_coefficients(beta, values["sigma_m"])
    return NetworkModel.from_coefficients(values["slope"], values["intercept"], values["sigma_n"])


def save_model(path, model) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path):
    return loads_model(Path(path).read_text())


SAMPLE_COLUMNS = {"timing": ("N", "c", "t_us"), "network": ("bytes", "t_us")}


def dumps_samples(kind: str, rows) -> str:
    lines = [",".join(SAMPLE_COLUMNS[kind])]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def loads_samples(kind: str, text: str):
    """Parse a measurement CSV (header line then numeric rows) into an ``(n, k)`` array."""
    import numpy as np

    if kind not in SAMPLE_COLUMNS:
        raise FormatError(f"unknown sample kind {kind!r}", 0)
    cols = SAMPLE_COLUMNS[kind]
    rows, offset, header = [], 0, None
    for line in text.splitlines(keepends=True):
        body = line.strip()
        if body and not body.startswith("#"):
            fields = [f.strip() for f in body.split(",")]
            if header is None:
                if tuple(fields) != cols:
                    raise FormatError(f"expected header {','.join(cols)}, got {body!r}", offset)
                header = fields
            else:
                if len(fields) != len(cols):
                    raise FormatError(f"expected {len(cols)} fields, got {len(fields)}", offset)
                try:
                    rows.append([float(f) for f in fields])
                except ValueError:
                    raise FormatError(f"non-numeric field in {body!r}", offset) from None
        offset += len(line.encode())
    if header is None:
        raise FormatError("empty sample file", 0)
    if not rows:
        raise FormatError("sample file has a header but no rows", offset)
    return np.array(rows, dtype=float)
