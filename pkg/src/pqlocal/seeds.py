"""Frozen-x seed solvers for the coefficient systems at the singularity.

Two expansion families are solved at a fixed ``x = x0``:

* irregular (pole order ``K = -n >= 1``): coefficients ``C(1..M)`` of the
  power factor and the pole coefficients ``Omega(n..-1)`` of the essential
  factor, tied together by the lower-triangular recurrence and the defect
  stack ``F``;
* regular (``n = -1``) with logarithmic depth: coefficients ``C(i, j)``
  for powers ``lambda**i (ln lambda)**j``, ``0 <= j < N``, obtained from
  stacked linear solves whose diagonal blocks become singular exactly at
  integer eigenvalue resonances of the residue matrix.

Both solvers report per-order defect norms recomputed through an
independent code path from the one that produced the coefficients.
"""

from dataclasses import dataclass

import numpy as np
import numpy.linalg as la

from . import kernels
from .errors import (
    DegenerateLeadingEigenvalues,
    InsufficientTruncation,
    NotConverged,
    ResidualTooLarge,
)
from .series import entry_norm

__all__ = [
    "IrregularSeed",
    "RegularSeed",
    "omega_recurrence",
    "phi_recurrence",
    "residual_F",
    "solve_irregular_seed",
    "solve_regular_seed",
    "regular_residual_norms",
    "SEED_TOL",
    "GAP_TOL_FACTOR",
]

SEED_TOL = 1e-11
GAP_TOL_FACTOR = 1e-8
MAX_NEWTON = 50
MAX_SWEEPS = 60


@dataclass(frozen=True)
class IrregularSeed:
    """Solved irregular coefficient set at ``x0``.

    ``C`` holds orders 1..M (the order-0 coefficient is the identity),
    ``Omega`` holds orders n..-1 in the original basis.  ``eigenbasis``
    is the eigenvector matrix of the leading coefficient used internally;
    ``omega_offdiag`` records how far Omega is from diagonal in that
    basis (a truncation-scale gauge diagnostic, see the module notes).
    """

    x0: float
    M: int
    n: int
    C: tuple
    Omega: tuple
    residual_report: dict
    eigenbasis: np.ndarray
    leading_eigenvalues: np.ndarray
    omega_offdiag: float
    newton_iterations: int

    @property
    def max_residual(self):
        return max(self.residual_report.values())


@dataclass(frozen=True)
class RegularSeed:
    """Solved regular (log-depth) coefficient set at ``x0``.

    ``C[i][j]`` multiplies ``lambda**i (ln lambda)**j``; the stack has
    shape ``(M+1, N, N, N)`` with ``C[0][0]`` the identity and log depth
    capped at ``N - 1``.
    """

    x0: float
    M: int
    dim: int
    C: np.ndarray
    residual_report: dict

    @property
    def max_residual(self):
        return max(self.residual_report.values())

    @property
    def max_log_norm(self):
        """Largest entry norm among coefficients with log depth >= 1."""
        if self.dim == 1:
            return 0.0
        return float(np.max(np.abs(self.C[:, 1:])))


# ---------------------------------------------------------------------------
# Recurrences and defect stacks


def _c_stack(C, dim):
    if len(C) == 0:
        return np.zeros((0, dim, dim), dtype=np.complex128)
    return np.ascontiguousarray(np.asarray(C, dtype=np.complex128))


def _pole_stack(Q):
    """Q coefficients on orders n..-1, zero-padded (polynomial semantics)."""
    n = Q.min_order
    K = -n
    dim = Q.dim
    stack = np.zeros((K, dim, dim), dtype=np.complex128)
    hi = min(Q.trunc_order, -1)
    if hi >= n:
        stack[: hi - n + 1] = Q.coeffs[: hi - n + 1]
    return stack


def _lower_stack(P):
    """P coefficients on orders m..0, zero-padded."""
    m = P.min_order
    dim = P.dim
    stack = np.zeros((-m + 1, dim, dim), dtype=np.complex128)
    hi = min(P.trunc_order, 0)
    if hi >= m:
        stack[: hi - m + 1] = P.coeffs[: hi - m + 1]
    return stack


def omega_recurrence(C, Q):
    """Pole coefficients of the essential factor, orders n..-1.

    ``Omega(i) = Q(i) + sum_{j=n}^{i-1} (Q(j) C(i-j) - C(i-j) Omega(j))``,
    evaluated in ascending order.  Requires ``len(C) >= -1 - n``.
    """
    n = Q.min_order
    if n >= 0:
        raise ValueError("Q must have a pole (n < 0)")
    K = -n
    if len(C) < K - 1:
        raise InsufficientTruncation(f"need C through order {K - 1}, got {len(C)}")
    cs = _c_stack(C, Q.dim)
    out = kernels.lower_recurrence(_pole_stack(Q), cs)
    return [out[t] for t in range(K)]


def phi_recurrence(C, P):
    """Nonpositive coefficients of the x-direction factor, orders m..0.

    Mirror of :func:`omega_recurrence` driven by P.  Requires
    ``len(C) >= -m``.
    """
    m = P.min_order
    if m > 0:
        raise ValueError("P must include order 0 (m <= 0)")
    if len(C) < -m:
        raise InsufficientTruncation(f"need C through order {-m}, got {len(C)}")
    cs = _c_stack(C, P.dim)
    out = kernels.lower_recurrence(_lower_stack(P), cs)
    return [out[t] for t in range(-m + 1)]


def _q_full_stack(Q):
    """Q coefficients on orders n..max(trunc, -1) (dense, exact zeros)."""
    n = Q.min_order
    hi = max(Q.trunc_order, -1)
    dim = Q.dim
    stack = np.zeros((hi - n + 1, dim, dim), dtype=np.complex128)
    stack[: Q.trunc_order - n + 1] = Q.coeffs
    return stack


def residual_F(C, Omega, Q):
    """Defect matrices of the frozen-x equations for orders n..M-1.

    Out-of-range coefficients are zero (and the order-0 one is the
    identity), matching the truncation convention used by the solver, so
    a solved seed recomputes to roundoff here.
    """
    n = Q.min_order
    K = -n
    if len(Omega) != K:
        raise ValueError(f"Omega must cover orders {n}..-1")
    cs = _c_stack(C, Q.dim)
    oms = _c_stack(Omega, Q.dim)
    out = kernels.residual_f(cs, oms, _q_full_stack(Q))
    return [out[t] for t in range(out.shape[0])]


def irregular_residual_report(C, Omega, Q):
    """Per-order norms of :func:`residual_F` keyed by order."""
    mats = residual_F(C, Omega, Q)
    n = Q.min_order
    return {n + t: entry_norm(mat) for t, mat in enumerate(mats)}


# ---------------------------------------------------------------------------
# Irregular seed solve


def _sorted_eig(matrix):
    vals, vecs = la.eig(matrix)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        pivot = int(np.argmax(np.abs(col)))
        vecs[:, k] = col / col[pivot]
    return vals, vecs


def _check_gaps(vals, dim):
    scale = max(1.0, float(np.max(np.abs(vals)))) if dim else 1.0
    gap_tol = GAP_TOL_FACTOR * scale
    for a in range(dim):
        for b in range(a + 1, dim):
            if abs(vals[a] - vals[b]) < gap_tol:
                raise DegenerateLeadingEigenvalues(
                    f"leading eigenvalues {vals[a]:.6g} and {vals[b]:.6g} "
                    f"closer than {gap_tol:.3g}"
                )
    return gap_tol


def solve_irregular_seed(
    Q,
    M,
    x0=0.0,
    seed_tol=SEED_TOL,
    max_newton=MAX_NEWTON,
    max_sweeps=MAX_SWEEPS,
    damping=0.7,
):
    """Solve the frozen-x coefficient system at an irregular singularity.

    ``Q`` is the lambda-equation coefficient series at ``x0`` (a Laurent
    polynomial with ``n < 0``); the leading coefficient must have
    pairwise-distinct eigenvalues.  Works in the eigenbasis of the leading
    coefficient with the essential-factor coefficients constrained
    diagonal (the generic normalization): the square polynomial system
    stacks the off-diagonal parts of ``Omega(n+1..-1)``, the full defects
    ``F(0..M-K)``, and the diagonal parts of ``F(M-K+1..M-1)`` over the
    unknowns ``C(1..M)``.  The dropped top off-diagonal components would
    be carried by coefficients beyond the truncation order; their leftover
    size is tail-scale and is included in the reported residuals.  Damped
    fixed-point sweeps build an initial guess, then Newton iteration with
    a directionally assembled Jacobian drives the defect below
    ``seed_tol``.  Coefficients above order M are truncated to zero,
    consistently here and in :func:`residual_F`.
    """
    n = Q.min_order
    if n >= 0:
        raise ValueError("irregular seed needs a pole: n < 0")
    K = -n
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    if M < K - 1:
        raise InsufficientTruncation(f"M = {M} cannot close the recurrence; need M >= {K - 1}")
    dim = Q.dim

    leading = np.array(Q.coeff(n))
    if dim == 1:
        vals = np.array([leading[0, 0]])
        W = np.eye(1, dtype=np.complex128)
    else:
        vals, W = _sorted_eig(leading)
        _check_gaps(vals, dim)
    Winv = la.inv(W)

    q_full = _q_full_stack(Q)
    qe = np.ascontiguousarray(Winv @ q_full @ W)
    qe_pole = np.ascontiguousarray(qe[:K])
    d = vals

    if K == 1:
        # A simple pole without logs: the per-order multipliers
        # (i+1) + d_b - d_a must stay away from zero.
        for p in range(1, M + 1):
            for a in range(dim):
                for b in range(dim):
                    if a != b and abs((d[a] - d[b]) - p) < GAP_TOL_FACTOR:
                        raise NotConverged(
                            "integer eigenvalue resonance at a simple pole; "
                            "use solve_regular_seed"
                        )

    off_mask = ~np.eye(dim, dtype=bool)

    def residual(cstack):
        om = kernels.lower_recurrence(qe_pole, cstack)
        return kernels.residual_f(cstack, om, qe), om

    def select(F, om):
        """Components of the square system (see the docstring)."""
        parts = []
        if K >= 2 and dim > 1:
            parts.append(om[1:K][:, off_mask].reshape(-1))
        parts.append(F[K : M + 1].reshape(-1))
        for u in range(M + 1, M + K):
            parts.append(np.diagonal(F[u]))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.complex128)

    # Damped fixed-point sweeps for the initial guess.  Each unknown block
    # is corrected only through the equation that determines it at leading
    # order: diagonals through the (i+1)-weighted term of F(i), the
    # off-diagonal of C(i+K) through the eigenvalue-gap commutator term,
    # and the off-diagonal of C(1..K-1) through diagonality of Omega.
    C = np.zeros((M, dim, dim), dtype=np.complex128)
    best_C = C.copy()
    F, om = residual(C)
    best_r = prev_r = float(np.max(np.abs(select(F, om))))
    gaps = d[None, :] - d[:, None]
    diag_mask = np.eye(dim, dtype=bool)
    for _ in range(max_sweeps):
        F, om = residual(C)
        if K == 1:
            for i in range(M):
                denom = (i + 1) + gaps
                C[i] -= damping * F[K + i] / denom
        else:
            for i in range(M):
                upd = np.zeros((dim, dim), dtype=np.complex128)
                upd[diag_mask] = F[K + i][diag_mask] / (i + 1)
                C[i] -= damping * upd
            if dim > 1:
                for i in range(0, M - K + 1):
                    upd = np.zeros((dim, dim), dtype=np.complex128)
                    upd[off_mask] = F[K + i][off_mask] / gaps[off_mask]
                    C[i + K - 1] -= damping * upd
                for s in range(1, K):
                    upd = np.zeros((dim, dim), dtype=np.complex128)
                    upd[off_mask] = om[s][off_mask] / (-gaps[off_mask])
                    C[s - 1] -= damping * upd
        F, om = residual(C)
        r = float(np.max(np.abs(select(F, om))))
        if r < best_r:
            best_r = r
            best_C = C.copy()
        if r < 1e-6 or r > 1e8 or (r > prev_r and r > 10 * best_r):
            break
        prev_r = r
    C = best_C if best_r < 1e3 else np.zeros_like(C)

    # Newton polish on the square selected system.
    target = min(1e-13, 0.05 * seed_tol)
    nun = M * dim * dim
    F, om = residual(C)
    r = float(np.max(np.abs(select(F, om))))
    iterations = 0
    while r >= target and iterations < max_newton:
        jac = np.empty((nun, nun), dtype=np.complex128)
        dC = np.zeros_like(C)
        for col in range(nun):
            slot, rem = divmod(col, dim * dim)
            a, b = divmod(rem, dim)
            dC[slot, a, b] = 1.0
            dom = kernels.lower_recurrence_dir(qe_pole, C, dC, om)
            dF = kernels.residual_f_dir(C, dC, om, dom, qe)
            jac[:, col] = select(dF, dom)
            dC[slot, a, b] = 0.0
        rhs = -select(F, om)
        try:
            step = la.solve(jac, rhs)
        except la.LinAlgError:
            step, *_ = la.lstsq(jac, rhs, rcond=None)
        step = step.reshape(M, dim, dim)
        accepted = False
        for t in (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125):
            Ct = C + t * step
            Ft, omt = residual(Ct)
            rt = float(np.max(np.abs(select(Ft, omt))))
            if rt < r:
                C, F, om, r = Ct, Ft, omt, rt
                accepted = True
                break
        iterations += 1
        if not accepted:
            break

    omega_offdiag = 0.0
    if dim > 1 and K:
        omega_offdiag = float(np.max(np.abs(om[:, off_mask])))

    # Back to the original basis; report through the independent path.
    C_orig = tuple(W @ C[i] @ Winv for i in range(M))
    Om_orig = tuple(W @ om[t] @ Winv for t in range(K))
    report = irregular_residual_report(C_orig, Om_orig, Q)
    if max(report.values()) >= seed_tol:
        raise NotConverged(
            f"seed defect {max(report.values()):.3e} above tolerance {seed_tol:.1e} "
            f"after {iterations} Newton iterations"
        )
    return IrregularSeed(
        x0=float(x0),
        M=M,
        n=n,
        C=C_orig,
        Omega=Om_orig,
        residual_report=report,
        eigenbasis=W,
        leading_eigenvalues=vals,
        omega_offdiag=omega_offdiag,
        newton_iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Regular (log-depth) seed solve


def _q_regular_stack(Q):
    if Q.min_order != -1:
        raise ValueError("regular seed needs a simple pole: n = -1")
    return _q_full_stack(Q)


def regular_residual_norms(C, Q):
    """Per-order defect norms of the log-depth equations, orders 1..M.

    ``C`` is the ``(M+1, depth, N, N)`` stack; independent recomputation
    path for solver output and for propagation monitoring.
    """
    q = _q_regular_stack(Q)
    res = kernels.residual_log_stack(np.ascontiguousarray(C), q)
    return {t + 1: float(np.max(np.abs(res[t]))) for t in range(res.shape[0])}


def solve_regular_seed(Q, M, x0=0.0, seed_tol=SEED_TOL, rcond=1e-10):
    """Solve the frozen-x coefficient system at a regular singularity.

    Builds, order by order, the stacked linear system over the log-depth
    column ``(C(i+1,0), ..., C(i+1,N-1))``: diagonal blocks apply
    ``X -> (i+1) X + [X, Q(-1)]``, the superdiagonal couples depth ``j``
    to ``j+1`` with weight ``j+1``.  Solved by rank-revealing least
    squares with minimum-norm selection of the free (resonant kernel)
    components; nonzero log coefficients appear exactly when eigenvalues
    of ``Q(-1)`` differ by the integer ``i+1``.
    """
    q = _q_regular_stack(Q)
    dim = Q.dim
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    qm1 = q[0]
    nn = dim * dim
    eye_nn = np.eye(nn, dtype=np.complex128)
    eye = np.eye(dim, dtype=np.complex128)

    C = np.zeros((M + 1, dim, dim, dim), dtype=np.complex128)
    C[0, 0] = eye

    comm_op = np.kron(eye, qm1.T) - np.kron(qm1, eye)
    deg = q.shape[0] - 2  # highest nonnegative order present
    for ip1 in range(1, M + 1):
        i = ip1 - 1
        lop = ip1 * eye_nn + comm_op
        A = np.zeros((dim * nn, dim * nn), dtype=np.complex128)
        rhs = np.zeros(dim * nn, dtype=np.complex128)
        for j in range(dim):
            A[j * nn : (j + 1) * nn, j * nn : (j + 1) * nn] = lop
            if j + 1 < dim:
                A[j * nn : (j + 1) * nn, (j + 1) * nn : (j + 2) * nn] = (j + 1) * eye_nn
            acc = np.zeros((dim, dim), dtype=np.complex128)
            for k in range(0, min(i, deg) + 1):
                acc += q[k + 1] @ C[i - k, j]
            rhs[j * nn : (j + 1) * nn] = acc.reshape(-1)
        sol, *_ = la.lstsq(A, rhs, rcond=rcond)
        defect = float(np.max(np.abs(A @ sol - rhs)))
        if defect > seed_tol:
            raise ResidualTooLarge(
                f"stacked solve at order {ip1} inconsistent: defect {defect:.3e}"
            )
        C[ip1] = sol.reshape(dim, dim, dim)

    report = regular_residual_norms(C, Q)
    if max(report.values()) > seed_tol:
        raise ResidualTooLarge(
            f"recomputed defect {max(report.values()):.3e} above {seed_tol:.1e}"
        )
    return RegularSeed(x0=float(x0), M=M, dim=dim, C=C, residual_report=report)
