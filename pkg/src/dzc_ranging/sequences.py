"""Zadoff-Chu and differential Zadoff-Chu code generation.

A Zadoff-Chu (ZC) code of length N and root exponent M (coprime with N) is a
unit-modulus sequence with a quadratic phase.  Its differential counterpart
(DZC) carries a cubic phase chosen so that the step-1 differential decode
``conj(a[k]) * a[k+1]`` reproduces the ZC code of the same (N, M).  The DZC
stream emitted by the cubic phase formula is periodic, but the period can be a
multiple of N (up to 12N); :func:`dzc_period` returns it.

All phases are handled as exact rationals of a full turn (Python integers
reduced modulo the denominator) before the single final call to ``exp``, so
emitting long streams loses no precision to growing k**3 terms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .tolerances import UNIT_MODULUS_TOL  # noqa: F401  (re-exported for tests)


class CodeKind(enum.Enum):
    ZC = "zc"
    DZC = "dzc"


@dataclass(frozen=True)
class SequenceSpec:
    """Identifies a code family: length ``n``, root exponent ``m``, kind."""

    n: int
    m: int
    kind: CodeKind = CodeKind.DZC

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"sequence length must be >= 2, got {self.n}")
        if not (0 < self.m < self.n):
            raise ValueError(f"root exponent must satisfy 0 < M < N, got M={self.m}, N={self.n}")
        if math.gcd(self.m, self.n) != 1:
            raise ValueError(f"M and N must be coprime, got M={self.m}, N={self.n}")


def _phases_from_turns(numerators, denominator: int) -> np.ndarray:
    """exp(2j*pi*num/den) with the integer numerators reduced mod den first."""
    frac = np.array([n % denominator for n in numerators], dtype=float) / denominator
    return np.exp(2j * np.pi * frac)


def zc_sequence(spec: SequenceSpec) -> np.ndarray:
    """Generate the length-N ZC code for ``spec``.

    Phase is M*pi/N * k*(k+1) for odd N and M*pi/N * k**2 for even N.
    """
    if spec.kind is not CodeKind.ZC:
        raise ValueError("zc_sequence requires a spec with kind=ZC")
    n, m = spec.n, spec.m
    ks = range(n)
    if n % 2:
        # phase/2pi = M*k*(k+1) / (2N)
        nums = [m * k * (k + 1) for k in ks]
    else:
        nums = [m * k * k for k in ks]
    return _phases_from_turns(nums, 2 * n)


def dzc_sequence(spec: SequenceSpec, length: int | None = None) -> np.ndarray:
    """Emit ``length`` samples of the DZC stream for ``spec``.

    ``length`` defaults to N; values above N continue the cubic phase formula
    (no modular reduction of k), which by the periodicity rules is equivalent
    to repeating the full-period stream.
    """
    if spec.kind is not CodeKind.DZC:
        raise ValueError("dzc_sequence requires a spec with kind=DZC")
    n, m = spec.n, spec.m
    if length is None:
        length = n
    if length < n:
        raise ValueError(f"length must be >= N, got {length} < {n}")
    ks = range(length)
    if n % 2:
        # phase/2pi = M*k*(k+1)*(k-1) / (6N)
        nums = [m * k * (k + 1) * (k - 1) for k in ks]
        den = 6 * n
    else:
        # phase = pi*M/(3N) * k*(k-1/2)*(k-1)  ->  phase/2pi = M*k*(2k-1)*(k-1) / (12N)
        nums = [m * k * (2 * k - 1) * (k - 1) for k in ks]
        den = 12 * n
    return _phases_from_turns(nums, den)


def code_sequence(spec: SequenceSpec, length: int | None = None) -> np.ndarray:
    """Dispatch on spec.kind; ZC codes longer than N repeat periodically."""
    if spec.kind is CodeKind.ZC:
        base = zc_sequence(spec)
        if length is None or length == spec.n:
            return base
        reps = -(-length // spec.n)
        return np.tile(base, reps)[:length]
    return dzc_sequence(spec, length)


def dzc_period(spec: SequenceSpec) -> int:
    """Period of the DZC stream emitted by the cubic phase formula.

    N for odd N not divisible by 3; 3N for odd N divisible by 3; 4N for even
    N with 3 | (2N-1) or 3 | (N-1); 12N otherwise.
    """
    if spec.kind is not CodeKind.DZC:
        raise ValueError("dzc_period requires a spec with kind=DZC")
    n = spec.n
    if n % 2:
        return n if n % 3 else 3 * n
    if (2 * n - 1) % 3 == 0 or (n - 1) % 3 == 0:
        return 4 * n
    return 12 * n


def differential_decode(seq: np.ndarray, step: int = 1) -> np.ndarray:
    """conj(seq[k]) * seq[k+step] with circular wrap over the sequence length.

    Decoding a DZC stream emitted over a full period with step=1 yields the ZC
    code of the same (N, M), repeated.
    """
    seq = np.asarray(seq)
    if seq.size == 0:
        raise ValueError("sequence must be non-empty")
    if not 0 < step < seq.size:
        raise ValueError(f"step must be in [1, {seq.size - 1}], got {step}")
    return np.conj(seq) * np.roll(seq, -step)
