"""Raw IQ file I/O.

Samples are stored as little-endian 32-bit float pairs (I, Q) interleaved
with no header.  Metadata lives in a sidecar text file at ``<path>.meta``
holding ``key=value`` lines (fs, fc, c).
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_META = {"fs": 192_000.0, "fc": 20_000.0, "c": 345.664}


def sidecar_path(path) -> str:
    return os.fspath(path) + ".meta"


def write_iq(path, samples: np.ndarray, meta: dict | None = None) -> None:
    samples = np.asarray(samples, dtype=complex)
    interleaved = np.empty(2 * samples.size, dtype="<f4")
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    interleaved.tofile(path)

    fields = dict(DEFAULT_META)
    fields.update(meta or {})
    with open(sidecar_path(path), "w") as fh:
        for key, value in fields.items():
            fh.write(f"{key}={value!r}\n" if isinstance(value, str) else f"{key}={value}\n")


def read_iq(path) -> tuple[np.ndarray, dict]:
    """Returns (complex samples, metadata dict with float values)."""
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 2:
        raise ValueError(f"{path}: odd number of float32 values, not interleaved IQ")
    samples = raw[0::2].astype(float) + 1j * raw[1::2].astype(float)

    meta_path = sidecar_path(path)
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"missing sidecar metadata file: {meta_path}")
    meta = {}
    with open(meta_path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{meta_path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            meta[key.strip()] = float(value)
    return samples, meta
