"""Parametrized P-Q pair models.

A model fixes the matrix dimension, the lowest orders ``m`` (x-equation
coefficient) and ``n`` (lambda-equation coefficient), a state vector with
its polynomial/rational vector field ``du/dx = G(u, x)``, and finitely
many coefficient matrices of expressions in the states and ``x``.  The
pair is *valid* when the order-by-order compatibility defect

    Q_x(i) - (i+1) P(i+1) + sum_j [Q(j), P(i-j)]

vanishes along trajectories of the vector field; ``compatibility_residual``
measures it and is the ground-truth oracle used throughout.
"""

import numpy as np

from . import expressions as ex
from .errors import UnknownSymbol
from .series import LaurentMatrixSeries, entry_norm

__all__ = ["PQPairModel", "pair_coeffs_at", "compatibility_residual"]

RESERVED_NAMES = {"x", "i"}


def _as_expr(obj):
    if isinstance(obj, ex.Expression):
        return obj
    return ex.parse_expression(str(obj))


def _coerce_coeff_map(coeffs, dim, where):
    out = {}
    for order, matrix in coeffs.items():
        order = int(order)
        if len(matrix) != dim or any(len(row) != dim for row in matrix):
            raise ValueError(f"{where}[{order}] is not {dim}x{dim}")
        out[order] = [[_as_expr(e) for e in row] for row in matrix]
    return out


class PQPairModel:
    """Immutable, pre-compiled P-Q pair description."""

    def __init__(self, dim, m, n, state_names, x0, u0, vector_field, P_coeffs, Q_coeffs):
        self.dim = int(dim)
        self.m = int(m)
        self.n = int(n)
        self.state_names = list(state_names)
        self.x0 = float(x0)
        self.u0 = np.asarray([complex(v) for v in u0], dtype=np.complex128)
        self.vector_field = [_as_expr(g) for g in vector_field]
        self.P_coeffs = _coerce_coeff_map(P_coeffs, self.dim, "P")
        self.Q_coeffs = _coerce_coeff_map(Q_coeffs, self.dim, "Q")
        self._validate()
        self._compile()

    # -- validation ---------------------------------------------------------

    def _validate(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.m > 0:
            raise ValueError("m must be <= 0")
        if self.n >= 0:
            raise ValueError("n must be < 0")
        for name in self.state_names:
            if name in RESERVED_NAMES:
                raise ValueError(f"state name {name!r} is reserved")
        if len(set(self.state_names)) != len(self.state_names):
            raise ValueError("duplicate state names")
        if len(self.u0) != len(self.state_names):
            raise ValueError("u0 length differs from state count")
        if len(self.vector_field) != len(self.state_names):
            raise ValueError("vector_field length differs from state count")
        if self.P_coeffs and min(self.P_coeffs) < self.m:
            raise ValueError("P order below declared m")
        if self.Q_coeffs and min(self.Q_coeffs) < self.n:
            raise ValueError("Q order below declared n")
        declared = set(self.state_names) | {"x"}
        for label, exprs in self._all_expressions():
            for name in ex.expression_symbols(exprs):
                if name not in declared:
                    raise UnknownSymbol(name, label)

    def _all_expressions(self):
        for k, g in enumerate(self.vector_field):
            yield f"vector_field[{k}]", g
        for family, coeffs in (("P", self.P_coeffs), ("Q", self.Q_coeffs)):
            for order, matrix in coeffs.items():
                for a, row in enumerate(matrix):
                    for b, entry in enumerate(row):
                        yield f"{family}[{order}][{a}][{b}]", entry

    # -- compilation --------------------------------------------------------

    def _compile(self):
        names = tuple(self.state_names) + ("x",)
        index = {name: k for k, name in enumerate(names)}
        self._symbol_index = index
        self._G = [ex.compile_expression(g, index) for g in self.vector_field]

        self.deg_P = max(self.P_coeffs, default=self.m)
        self.deg_Q = max(self.Q_coeffs, default=self.n)
        self._P_top = max(self.deg_P, 0)
        self._Q_top = max(self.deg_Q, -1)

        def compile_family(coeffs, lo, hi):
            stacked = []
            for order in range(lo, hi + 1):
                matrix = coeffs.get(order)
                if matrix is None:
                    stacked.append(None)
                else:
                    stacked.append(
                        [[ex.compile_expression(e, index) for e in row] for row in matrix]
                    )
            return stacked

        self._P_fns = compile_family(self.P_coeffs, self.m, self._P_top)
        self._Q_fns = compile_family(self.Q_coeffs, self.n, self._Q_top)

        # Total x-derivative of each Q entry along the flow, by chain rule:
        # dQ/dx = sum_k (dQ/du_k) G_k + dQ/dx, built symbolically.
        qx = {}
        for order, matrix in self.Q_coeffs.items():
            rows = []
            for row in matrix:
                out_row = []
                for entry in row:
                    total = ex.differentiate(entry, "x")
                    for name, g in zip(self.state_names, self.vector_field):
                        partial = ex.differentiate(entry, name)
                        if isinstance(partial, ex.Lit) and partial.value == 0:
                            continue
                        total = ex.Add(total, ex.Mul(partial, g))
                    out_row.append(ex.compile_expression(total, index))
                rows.append(out_row)
            qx[order] = rows
        self._Qx_fns = qx

    # -- evaluation ---------------------------------------------------------

    def _vals(self, u, x):
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (len(self.state_names),):
            raise ValueError("state vector has wrong length")
        return tuple(u) + (complex(x),)

    def eval_state_rhs(self, u, x):
        """G(u, x) as a complex vector."""
        vals = self._vals(u, x)
        return np.array([g(vals) for g in self._G], dtype=np.complex128)

    def _eval_family(self, fns, lo, vals):
        n = self.dim
        stack = np.zeros((len(fns), n, n), dtype=np.complex128)
        for t, matrix in enumerate(fns):
            if matrix is None:
                continue
            for a in range(n):
                row = matrix[a]
                for b in range(n):
                    stack[t, a, b] = row[b](vals)
        return stack

    def eval_P_stack(self, u, x):
        """P coefficients as a stack over orders ``m .. max(deg_P, 0)``."""
        return self._eval_family(self._P_fns, self.m, self._vals(u, x))

    def eval_Q_stack(self, u, x):
        """Q coefficients as a stack over orders ``n .. max(deg_Q, -1)``."""
        return self._eval_family(self._Q_fns, self.n, self._vals(u, x))

    def eval_Qx_stack(self, u, x):
        """Chain-rule x-derivatives of Q over orders ``n .. max(deg_Q, -1)``."""
        vals = self._vals(u, x)
        n = self.dim
        stack = np.zeros((self._Q_top - self.n + 1, n, n), dtype=np.complex128)
        for order, matrix in self._Qx_fns.items():
            t = order - self.n
            for a in range(n):
                for b in range(n):
                    stack[t, a, b] = matrix[a][b](vals)
        return stack

    # -- equality (document round-trips) ------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PQPairModel):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.m == other.m
            and self.n == other.n
            and self.state_names == other.state_names
            and self.x0 == other.x0
            and np.array_equal(self.u0, other.u0)
            and self.vector_field == other.vector_field
            and self.P_coeffs == other.P_coeffs
            and self.Q_coeffs == other.Q_coeffs
        )

    def __repr__(self):
        return (
            f"PQPairModel(dim={self.dim}, m={self.m}, n={self.n}, "
            f"states={self.state_names})"
        )


def pair_coeffs_at(model, u, x):
    """Numeric coefficient series (P, Q) of the pair at state ``u``, ``x``.

    The returned truncation orders are the polynomial degrees: model
    coefficients are finite Laurent polynomials, exactly zero beyond.
    """
    p_stack = model.eval_P_stack(u, x)
    q_stack = model.eval_Q_stack(u, x)
    return (
        LaurentMatrixSeries(model.m, p_stack),
        LaurentMatrixSeries(model.n, q_stack),
    )


def compatibility_residual(model, u, x):
    """Per-order defect of the pair's compatibility condition at ``(u, x)``.

    Returns ``{order: norm}`` for every order that can carry a nonzero
    term; a valid pair yields roundoff-level norms at any point reachable
    by its flow (for the constructed catalog pairs, at any point at all).
    """
    m, n = model.m, model.n
    deg_p, deg_q = model.deg_P, model.deg_Q
    p = model.eval_P_stack(u, x)
    qx = model.eval_Qx_stack(u, x)
    dim = model.dim

    top = max(deg_q, deg_p - 1, deg_p + deg_q)
    q = model.eval_Q_stack(u, x)
    residuals = {}
    for i in range(m + n, top + 1):
        acc = np.zeros((dim, dim), dtype=np.complex128)
        if n <= i <= model._Q_top:
            acc += qx[i - n]
        if m <= i + 1 <= model._P_top:
            acc -= (i + 1) * p[i + 1 - m]
        j_lo = max(n, i - model._P_top)
        j_hi = min(model._Q_top, i - m)
        for j in range(j_lo, j_hi + 1):
            qj = q[j - n]
            pij = p[i - j - m]
            acc += qj @ pij - pij @ qj
        residuals[i] = entry_norm(acc)
    return residuals
