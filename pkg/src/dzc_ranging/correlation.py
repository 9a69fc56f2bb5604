"""Circular cross-correlation and differential sliding correlation.

Each operation has a direct O(N^2) reference implementation and an
FFT-accelerated fast path; the test suite pins their agreement.  The
differential sliding correlation first forms consecutive-sample products of
the template and the received frame (which cancels any channel phase that is
slowly varying across ``m`` samples) and then reduces to a single circular
correlation of the two product sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sequences import SequenceSpec, code_sequence


@dataclass(frozen=True)
class CorrelationResult:
    values: np.ndarray
    peak_index: int
    peak_magnitude: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "CorrelationResult":
        mags = np.abs(values)
        peak = int(np.argmax(mags))  # argmax takes the smallest index on ties
        return cls(values=values, peak_index=peak, peak_magnitude=float(mags[peak]))


def circular_xcorr(template: np.ndarray, received: np.ndarray,
                   direct: bool = False) -> CorrelationResult:
    """r[n] = sum_k conj(template[k]) * received[(k+n) mod N]."""
    template = np.asarray(template, dtype=complex)
    received = np.asarray(received, dtype=complex)
    if template.size != received.size:
        raise ValueError(f"length mismatch: {template.size} != {received.size}")
    n = template.size
    if direct:
        values = np.array([np.vdot(template, np.roll(received, -lag)) for lag in range(n)])
    else:
        values = np.fft.ifft(np.conj(np.fft.fft(template)) * np.fft.fft(received))
        # vdot conjugates its first argument, matching conj(template) here
    return CorrelationResult.from_values(values)


def _differential_product(seq: np.ndarray, frame_len: int, m: int) -> np.ndarray:
    """p[k] = seq[k] * conj(seq[k+m]) for k < frame_len.

    Uses the samples beyond the frame when the caller supplied them (the
    stream continuation); otherwise wraps circularly over the frame.
    """
    seq = np.asarray(seq, dtype=complex)
    if seq.size >= frame_len + m:
        return seq[:frame_len] * np.conj(seq[m:frame_len + m])
    head = seq[:frame_len]
    return head * np.conj(np.roll(head, -m))


def diff_sliding_corr(template: np.ndarray, received: np.ndarray,
                      m: int = 1, direct: bool = False,
                      frame_len: int | None = None) -> CorrelationResult:
    """Circular differential sliding correlation.

    r_D[n] = sum_k conj(template[k]) template[k+m] received[k+n] conj(received[k+m+n])

    The frame length N defaults to the shorter input; either input may carry
    up to ``m`` extra trailing samples (the continuation of its stream),
    which keeps the consecutive products exact at the frame boundary.  Pass
    ``frame_len`` explicitly when both inputs carry continuation samples.
    """
    template = np.asarray(template, dtype=complex)
    received = np.asarray(received, dtype=complex)
    n = min(template.size, received.size) if frame_len is None else frame_len
    for size in (template.size, received.size):
        if not n <= size <= n + m:
            raise ValueError(
                f"input length {size} outside [N, N+m] = [{n}, {n + m}]")
    if not 1 <= m < n:
        raise ValueError(f"m must be in [1, {n - 1}], got {m}")

    p = np.conj(_differential_product(template, n, m))  # conj(x[k]) x[k+m]
    q = _differential_product(received, n, m)           # y[k] conj(y[k+m])
    if direct:
        values = np.array([np.dot(p, np.roll(q, -lag)) for lag in range(n)])
        return CorrelationResult.from_values(values)
    # sum_k p[k] q[k+n] is circular_xcorr with template conj(p)
    return circular_xcorr(np.conj(p), q)


def multi_code_scan(template_spec: SequenceSpec, received: np.ndarray,
                    m: int = 1) -> CorrelationResult:
    """Differential scan of a (possibly superposed) frame against one code.

    The template is emitted ``m`` samples past the frame so its differential
    product follows the stream, not the circular wrap of one period.
    """
    received = np.asarray(received, dtype=complex)
    n = template_spec.n
    if received.size < n:
        raise ValueError("received frame shorter than the code length")
    template = code_sequence(template_spec, n + m)
    return diff_sliding_corr(template, received[:n + m], m=m, frame_len=n)
