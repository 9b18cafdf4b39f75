"""Truncated matrix-valued Laurent series in the spectral variable.

A series is stored as a dense stack of square complex coefficient matrices
for the retained orders ``min_order .. trunc_order``.  Coefficients below
``min_order`` are exactly zero; coefficients above ``trunc_order`` are
*unknown*, and every operation truncates its result so that all retained
coefficients are exact given the truncations of the inputs.
"""

import math

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EvalAtPole, NegativeOrderRecenter

__all__ = [
    "LaurentMatrixSeries",
    "series_add",
    "series_mul",
    "series_commutator",
    "series_eval",
    "recenter",
    "transform_to_origin",
    "truncate",
    "entry_norm",
]


def entry_norm(matrix):
    """Max absolute entry; the norm used for all residual reporting."""
    m = np.asarray(matrix)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def _as_stack(coeffs):
    stack = np.array(coeffs, dtype=np.complex128)
    if stack.ndim == 2:
        stack = stack[np.newaxis]
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2] or stack.shape[1] == 0:
        raise ValueError("coefficients must be a sequence of square matrices")
    if not np.all(np.isfinite(stack.view(np.float64))):
        raise ValueError("coefficients must be finite")
    return stack


class LaurentMatrixSeries:
    """Finitely many retained matrix coefficients of a Laurent series."""

    __slots__ = ("_min_order", "_coeffs")

    def __init__(self, min_order, coeffs):
        self._min_order = int(min_order)
        self._coeffs = _as_stack(coeffs)
        self._coeffs.setflags(write=False)

    @classmethod
    def from_coeff_map(cls, coeff_map, dim=None, trunc_order=None):
        """Build from a ``{order: matrix}`` map, zero-filling gaps.

        ``trunc_order`` may extend the retained range beyond the highest
        stored order (the extra coefficients are exactly zero).
        """
        if not coeff_map:
            if dim is None:
                raise ValueError("empty coefficient map needs an explicit dim")
            lo = 0 if trunc_order is None else min(0, trunc_order)
            hi = 0 if trunc_order is None else trunc_order
            return cls(lo, np.zeros((hi - lo + 1, dim, dim)))
        orders = sorted(int(k) for k in coeff_map)
        lo, hi = orders[0], orders[-1]
        if trunc_order is not None:
            if trunc_order < hi:
                raise ValueError("trunc_order below highest stored order")
            hi = trunc_order
        first = np.asarray(next(iter(coeff_map.values())))
        n = first.shape[0] if dim is None else dim
        stack = np.zeros((hi - lo + 1, n, n), dtype=np.complex128)
        for k, mat in coeff_map.items():
            stack[int(k) - lo] = np.asarray(mat, dtype=np.complex128)
        return cls(lo, stack)

    @classmethod
    def constant(cls, matrix, trunc_order=0):
        """Series with a single order-0 coefficient."""
        return cls.from_coeff_map({0: np.asarray(matrix)}, trunc_order=trunc_order)

    @property
    def min_order(self):
        return self._min_order

    @property
    def trunc_order(self):
        return self._min_order + len(self._coeffs) - 1

    @property
    def dim(self):
        return self._coeffs.shape[1]

    @property
    def coeffs(self):
        """Read-only ``(orders, N, N)`` coefficient stack."""
        return self._coeffs

    def orders(self):
        return range(self._min_order, self.trunc_order + 1)

    def coeff(self, order):
        """Coefficient at ``order``; exactly zero below ``min_order``.

        Orders above ``trunc_order`` are unknown and raise.
        """
        if order > self.trunc_order:
            raise ValueError(f"order {order} not retained (trunc {self.trunc_order})")
        if order < self._min_order:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return self._coeffs[order - self._min_order]

    def coeff_map(self):
        return {i: self._coeffs[i - self._min_order] for i in self.orders()}

    def __repr__(self):
        return (
            f"LaurentMatrixSeries(dim={self.dim}, orders {self._min_order}.."
            f"{self.trunc_order})"
        )

    def __add__(self, other):
        return series_add(self, other)

    def __sub__(self, other):
        return series_add(self, scale(other, -1.0))

    def __mul__(self, other):
        return series_mul(self, other)

    def __neg__(self):
        return scale(self, -1.0)


def _check_dims(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")


def scale(a, factor):
    """Scalar multiple of a series."""
    return LaurentMatrixSeries(a.min_order, a.coeffs * complex(factor))


def truncate(a, trunc_order):
    """Drop coefficients above ``trunc_order`` (must not extend the range)."""
    if trunc_order > a.trunc_order:
        raise ValueError("cannot extend a truncated series")
    if trunc_order < a.min_order:
        n = a.dim
        return LaurentMatrixSeries(trunc_order, np.zeros((1, n, n)))
    return LaurentMatrixSeries(a.min_order, a.coeffs[: trunc_order - a.min_order + 1])


def series_add(a, b):
    """Coefficient-wise sum on the common exactly-known window."""
    _check_dims(a, b)
    lo = min(a.min_order, b.min_order)
    hi = min(a.trunc_order, b.trunc_order)
    out = np.zeros((hi - lo + 1, a.dim, a.dim), dtype=np.complex128)
    for src in (a, b):
        s_lo = max(src.min_order, lo)
        s_hi = min(src.trunc_order, hi)
        if s_hi >= s_lo:
            out[s_lo - lo : s_hi - lo + 1] += src.coeffs[
                s_lo - src.min_order : s_hi - src.min_order + 1
            ]
    return LaurentMatrixSeries(lo, out)


def series_mul(a, b):
    """Truncated Cauchy product.

    The result keeps only coefficients that are exact given the input
    truncations: orders up to ``min(a.trunc + b.min, b.trunc + a.min)``.
    """
    _check_dims(a, b)
    lo = a.min_order + b.min_order
    hi = min(a.trunc_order + b.min_order, b.trunc_order + a.min_order)
    nout = hi - lo + 1
    out = kernels.conv_stacks(a.coeffs, b.coeffs, nout)
    return LaurentMatrixSeries(lo, out)


def series_commutator(a, b):
    """[a, b] = a*b - b*a with the product's conservative truncation."""
    ab = series_mul(a, b)
    ba = series_mul(b, a)
    return LaurentMatrixSeries(ab.min_order, ab.coeffs - ba.coeffs)


def series_eval(a, lam):
    """Sum of ``lam**i * coeff[i]`` over retained orders.

    Terms are accumulated in ascending magnitude for stability.
    """
    lam = complex(lam)
    if lam == 0:
        if a.min_order < 0:
            raise EvalAtPole("evaluation at lambda = 0 with negative orders")
        return np.array(a.coeff(0)) if a.min_order == 0 else np.zeros(
            (a.dim, a.dim), dtype=np.complex128
        )
    powers = np.array([lam**i for i in a.orders()], dtype=np.complex128)
    terms = powers[:, None, None] * a.coeffs
    mags = np.max(np.abs(terms), axis=(1, 2))
    total = np.zeros((a.dim, a.dim), dtype=np.complex128)
    for k in np.argsort(mags, kind="stable"):
        total += terms[k]
    return total


def recenter(a, shift):
    """Re-expand a Taylor-part series around a shifted variable.

    For ``A(lam) = sum c_i lam**i`` returns the coefficients of
    ``A(mu + shift)`` in powers of ``mu`` (exact for polynomial input).
    """
    if a.min_order < 0:
        raise NegativeOrderRecenter("recentering a pole part is not supported")
    shift = complex(shift)
    if shift == 0:
        return a
    top = a.trunc_order
    n = a.dim
    out = np.zeros((top + 1, n, n), dtype=np.complex128)
    for k in range(top + 1):
        acc = np.zeros((n, n), dtype=np.complex128)
        for i in range(max(k, a.min_order), top + 1):
            acc += (math.comb(i, k) * shift ** (i - k)) * a.coeff(i)
        out[k] = acc
    return LaurentMatrixSeries(0, out)


def transform_to_origin(a):
    """Map a series at lambda = infinity into the lambda = 0 frame.

    Under ``mu = 1/lambda`` the second-equation coefficient transforms as
    ``-mu**-2 * A(1/mu)``; order ``i`` maps to order ``-i - 2`` with a sign
    flip.  Applying the map twice returns the original series.
    """
    new_min = -a.trunc_order - 2
    out = -a.coeffs[::-1]
    return LaurentMatrixSeries(new_min, out)
