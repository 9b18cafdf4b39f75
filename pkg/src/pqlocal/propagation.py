"""Propagation of seed expansions along x, with residual monitors.

The coefficient families solved at ``x0`` evolve under normal ODE systems
driven by the x-equation coefficients; the state vector, the expansion
coefficients, and the gauge factor ``Psi0`` are co-integrated as one
vector by a deterministic fixed-step fourth-order Runge-Kutta scheme.
Along the way the frozen-x defect stacks, the cross-derivative defect of
the essential factors, the pair's compatibility defect, and the matrix
conservation laws are sampled; their drifts are the numerical witnesses
of the propagation identities that hold exactly for the untruncated
system.
"""

from dataclasses import dataclass, field

import numpy as np
import numpy.linalg as la
import scipy.integrate
import scipy.linalg

from . import kernels
from .errors import (
    DegeneratePsi0,
    EvalAtPole,
    GridTooCoarse,
    StepFailure,
    UnsupportedLambdaEvaluation,
    UnsupportedModel,
)
from .seeds import IrregularSeed, RegularSeed, regular_residual_norms
from .series import LaurentMatrixSeries, entry_norm

__all__ = [
    "StatePath",
    "Psi0Path",
    "Trajectory",
    "ConservationReport",
    "RecomposeResult",
    "evolve_state",
    "evolve_expansion",
    "evolve_expansion_regular",
    "evolve_psi0",
    "conservation_laws",
    "residual_H",
    "eval_lambda_regular",
    "recompose_solution",
    "DET_TOL",
]

DET_TOL = 1e-10
ODE_TOL = 1e-6
DEFAULT_ANNULUS = (0.01, 0.5)


def _require_forward(model, x_end):
    if not x_end > model.x0:
        raise ValueError("x_end must exceed the model's x0")


def _rk4_steps(f, x0, y0, x_end, steps, collect=True):
    """Classical fixed-step RK4; returns the sample matrix (steps+1, len)."""
    xs = np.linspace(x0, x_end, steps + 1)
    h = (x_end - x0) / steps
    y = np.array(y0, dtype=np.complex128)
    out = np.empty((steps + 1, y.size), dtype=np.complex128) if collect else None
    if collect:
        out[0] = y
    for k in range(steps):
        x = xs[k]
        k1 = f(x, y)
        k2 = f(x + 0.5 * h, y + (0.5 * h) * k1)
        k3 = f(x + 0.5 * h, y + (0.5 * h) * k2)
        k4 = f(x + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y.view(np.float64))):
            raise StepFailure(f"non-finite state at step {k + 1} (x = {xs[k + 1]:.6g})")
        if collect:
            out[k + 1] = y
    return xs, (out if collect else y)


@dataclass(frozen=True)
class StatePath:
    """Sampled state trajectory with a step-halving error estimate."""

    xs: np.ndarray
    states: np.ndarray
    error_estimate: float


def evolve_state(model, x_end, steps, ode_tol=ODE_TOL):
    """Integrate the state ODE ``du/dx = G(u, x)`` from ``x0`` to ``x_end``.

    Fixed-step RK4; every step is also taken as two half steps and the
    accumulated deviation is reported as the global error estimate (the
    half-step values are the ones kept).  Raises :class:`StepFailure`
    when the estimate exceeds ``ode_tol``.
    """
    _require_forward(model, x_end)
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be positive")
    xs = np.linspace(model.x0, x_end, steps + 1)
    h = (x_end - model.x0) / steps
    f = lambda x, y: model.eval_state_rhs(y, x)  # noqa: E731

    def rk4(x, y, hh):
        k1 = f(x, y)
        k2 = f(x + 0.5 * hh, y + (0.5 * hh) * k1)
        k3 = f(x + 0.5 * hh, y + (0.5 * hh) * k2)
        k4 = f(x + hh, y + hh * k3)
        return y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    y = np.array(model.u0, dtype=np.complex128)
    out = np.empty((steps + 1, y.size), dtype=np.complex128)
    out[0] = y
    err = 0.0
    for k in range(steps):
        x = xs[k]
        coarse = rk4(x, y, h)
        fine = rk4(x + 0.5 * h, rk4(x, y, 0.5 * h), 0.5 * h)
        err += float(np.max(np.abs(coarse - fine))) if y.size else 0.0
        y = fine
        if not np.all(np.isfinite(y.view(np.float64))):
            raise StepFailure(f"non-finite state at step {k + 1}")
        out[k + 1] = y
    if err > ode_tol:
        raise StepFailure(f"step-halving error estimate {err:.3e} exceeds {ode_tol:.1e}")
    return StatePath(xs=xs, states=out, error_estimate=err)


# ---------------------------------------------------------------------------
# Coupled expansion trajectories


@dataclass
class Trajectory:
    """Sampled expansion data along x.

    ``mode`` is ``"irregular"`` or ``"regular"``.  ``coeffs`` holds the
    expansion coefficients per sample: shape ``(K, M+1, N, N)`` including
    the order-0 slot in irregular mode, ``(K, M+1, N, N, N)`` (order, log
    depth, matrix) in regular mode.  ``F_norms`` are the per-sample defect
    norms of the frozen-x equations (orders ``F_orders``); in regular mode
    these are the stacked log-depth defects.  ``J`` carries the sampled
    conservation-law matrices for ``J_orders``.
    """

    mode: str
    model: object
    M: int
    xs: np.ndarray
    states: np.ndarray
    coeffs: np.ndarray
    psi0: np.ndarray
    det_psi0: np.ndarray
    psi0_coeff_trace: np.ndarray
    F_orders: list
    F_norms: np.ndarray
    compat_orders: list
    compat_norms: np.ndarray
    Omega: np.ndarray = None
    Phi: np.ndarray = None
    Qm1: np.ndarray = None
    H_orders: list = field(default_factory=list)
    H_norms: np.ndarray = None
    J_orders: list = field(default_factory=list)
    J: np.ndarray = None
    J_drift: dict = field(default_factory=dict)
    J_eig_drift: dict = field(default_factory=dict)

    @property
    def max_F(self):
        return float(np.max(self.F_norms))

    @property
    def max_H(self):
        if self.H_norms is None or self.H_norms.size == 0:
            return 0.0
        vals = self.H_norms[np.isfinite(self.H_norms)]
        return float(np.max(vals)) if vals.size else 0.0

    @property
    def max_compat(self):
        return float(np.max(self.compat_norms)) if self.compat_norms.size else 0.0

    @property
    def C0_deviation(self):
        """Largest deviation of the order-0 coefficient from the identity."""
        eye = np.eye(self.coeffs.shape[-1])
        if self.mode == "irregular":
            c0 = self.coeffs[:, 0]
        else:
            c0 = self.coeffs[:, 0, 0]
        return float(np.max(np.abs(c0 - eye)))

    @property
    def abel_residual(self):
        """Mismatch of det(Psi0) against exp of the integrated trace."""
        integ = scipy.integrate.cumulative_simpson(
            self.psi0_coeff_trace, x=self.xs, initial=0.0
        )
        expected = np.exp(integ)
        scale = max(1.0, float(np.max(np.abs(expected))))
        return float(np.max(np.abs(self.det_psi0 - expected))) / scale


def _compat_norms(model, u, x, orders):
    from .model import compatibility_residual

    res = compatibility_residual(model, u, x)
    return np.array([res[i] for i in orders])


def _check_psi0(det, k, det_tol):
    if abs(det) < det_tol:
        raise DegeneratePsi0(f"|det Psi0| = {abs(det):.3e} at sample {k}")


def evolve_expansion(seed, model, x_end, steps, det_tol=DET_TOL):
    """Co-integrate state, irregular expansion coefficients, and Psi0.

    The coefficient ODEs are closed with the x-direction factor
    recomputed from the running coefficients at every integrator stage;
    coefficients above order M are dropped, consistently with the seed.
    The defect stacks, compatibility defect, cross-derivative defect, and
    conservation laws are sampled on the integration grid.
    """
    if not isinstance(seed, IrregularSeed):
        raise TypeError("evolve_expansion needs an IrregularSeed")
    _require_forward(model, x_end)
    if seed.n != model.n:
        raise ValueError("seed and model disagree on n")
    dim = model.dim
    d = len(model.state_names)
    M = seed.M
    nn = dim * dim
    m = model.m
    use_phi0 = m < 0

    c0 = np.zeros((M + 1, dim, dim), dtype=np.complex128)
    c0[0] = np.eye(dim)
    for i, mat in enumerate(seed.C):
        c0[i + 1] = mat
    y0 = np.concatenate(
        [model.u0, c0.reshape(-1), np.eye(dim, dtype=np.complex128).reshape(-1)]
    )

    def rhs(x, y):
        u = y[:d]
        c = np.ascontiguousarray(y[d : d + (M + 1) * nn].reshape(M + 1, dim, dim))
        psi0 = y[d + (M + 1) * nn :].reshape(dim, dim)
        p = model.eval_P_stack(u, x)
        phi = kernels.lower_recurrence(np.ascontiguousarray(p[: -m + 1]), c[1:])
        dc = kernels.c_rhs_irregular(p, m, c, phi)
        du = model.eval_state_rhs(u, x)
        coeff = phi[-m] if use_phi0 else p[-m]
        dpsi0 = coeff @ psi0
        return np.concatenate([du, dc.reshape(-1), dpsi0.reshape(-1)])

    xs, ys = _rk4_steps(rhs, model.x0, y0, x_end, int(steps))
    ns = len(xs)

    states = ys[:, :d]
    coeffs = ys[:, d : d + (M + 1) * nn].reshape(ns, M + 1, dim, dim)
    psi0 = ys[:, d + (M + 1) * nn :].reshape(ns, dim, dim)

    n = model.n
    K = -n
    F_orders = list(range(n, M))
    compat_orders = None
    Omega = np.empty((ns, K, dim, dim), dtype=np.complex128)
    Phi = np.empty((ns, -m + 1, dim, dim), dtype=np.complex128)
    F_norms = np.empty((ns, len(F_orders)))
    det_psi0 = np.empty(ns, dtype=np.complex128)
    trace = np.empty(ns, dtype=np.complex128)
    compat_rows = []
    for k in range(ns):
        u, x = states[k], xs[k]
        cstack = np.ascontiguousarray(coeffs[k, 1:])
        q = model.eval_Q_stack(u, x)
        p = model.eval_P_stack(u, x)
        Omega[k] = kernels.lower_recurrence(np.ascontiguousarray(q[:K]), cstack)
        Phi[k] = kernels.lower_recurrence(np.ascontiguousarray(p[: -m + 1]), cstack)
        F = kernels.residual_f(cstack, Omega[k], q)
        F_norms[k] = np.max(np.abs(F), axis=(1, 2))
        det_psi0[k] = la.det(psi0[k])
        _check_psi0(det_psi0[k], k, det_tol)
        trace[k] = np.trace(Phi[k][-m] if use_phi0 else p[-m])
        from .model import compatibility_residual

        res = compatibility_residual(model, u, x)
        if compat_orders is None:
            compat_orders = sorted(res)
        compat_rows.append([res[i] for i in compat_orders])

    traj = Trajectory(
        mode="irregular",
        model=model,
        M=M,
        xs=xs,
        states=states,
        coeffs=coeffs,
        psi0=psi0,
        det_psi0=det_psi0,
        psi0_coeff_trace=trace,
        F_orders=F_orders,
        F_norms=F_norms,
        compat_orders=compat_orders,
        compat_norms=np.array(compat_rows),
        Omega=Omega,
        Phi=Phi,
    )
    traj.H_orders, traj.H_norms = residual_H(traj)
    report = conservation_laws(traj)
    traj.J_orders = report.orders
    traj.J = report.samples
    traj.J_drift = report.drift
    traj.J_eig_drift = report.eig_drift
    return traj


def evolve_expansion_regular(seed, model, x_end, steps, det_tol=DET_TOL):
    """Co-integrate state, log-depth coefficients, and Psi0 (regular case).

    Only models with ``m = 0`` are covered by the log-depth propagation
    equations; the frozen-x defects are recomputed and reported at every
    sample.
    """
    if not isinstance(seed, RegularSeed):
        raise TypeError("evolve_expansion_regular needs a RegularSeed")
    if model.m < 0:
        raise UnsupportedModel("regular propagation requires m = 0")
    if model.n != -1:
        raise UnsupportedModel("regular propagation requires n = -1")
    _require_forward(model, x_end)
    dim = model.dim
    d = len(model.state_names)
    M = seed.M
    nn = dim * dim
    block = (M + 1) * dim * nn

    y0 = np.concatenate(
        [model.u0, seed.C.reshape(-1), np.eye(dim, dtype=np.complex128).reshape(-1)]
    )

    def rhs(x, y):
        u = y[:d]
        c = np.ascontiguousarray(y[d : d + block].reshape(M + 1, dim, dim, dim))
        psi0 = y[d + block :].reshape(dim, dim)
        p = model.eval_P_stack(u, x)
        dc = kernels.c_rhs_regular(p, c)
        du = model.eval_state_rhs(u, x)
        dpsi0 = p[0] @ psi0
        return np.concatenate([du, dc.reshape(-1), dpsi0.reshape(-1)])

    xs, ys = _rk4_steps(rhs, model.x0, y0, x_end, int(steps))
    ns = len(xs)
    states = ys[:, :d]
    coeffs = ys[:, d : d + block].reshape(ns, M + 1, dim, dim, dim)
    psi0 = ys[:, d + block :].reshape(ns, dim, dim)

    F_orders = list(range(1, M + 1))
    F_norms = np.empty((ns, M))
    det_psi0 = np.empty(ns, dtype=np.complex128)
    trace = np.empty(ns, dtype=np.complex128)
    Qm1 = np.empty((ns, dim, dim), dtype=np.complex128)
    compat_orders = None
    compat_rows = []
    from .model import compatibility_residual

    for k in range(ns):
        u, x = states[k], xs[k]
        q = model.eval_Q_stack(u, x)
        res_stack = kernels.residual_log_stack(np.ascontiguousarray(coeffs[k]), q)
        F_norms[k] = np.max(np.abs(res_stack), axis=(1, 2, 3))
        Qm1[k] = q[0]
        det_psi0[k] = la.det(psi0[k])
        _check_psi0(det_psi0[k], k, det_tol)
        trace[k] = np.trace(model.eval_P_stack(u, x)[0])
        res = compatibility_residual(model, u, x)
        if compat_orders is None:
            compat_orders = sorted(res)
        compat_rows.append([res[i] for i in compat_orders])

    traj = Trajectory(
        mode="regular",
        model=model,
        M=M,
        xs=xs,
        states=states,
        coeffs=coeffs,
        psi0=psi0,
        det_psi0=det_psi0,
        psi0_coeff_trace=trace,
        F_orders=F_orders,
        F_norms=F_norms,
        compat_orders=compat_orders,
        compat_norms=np.array(compat_rows),
        Qm1=Qm1,
    )
    report = conservation_laws(traj)
    traj.J_orders = report.orders
    traj.J = report.samples
    traj.J_drift = report.drift
    traj.J_eig_drift = report.eig_drift
    return traj


@dataclass(frozen=True)
class Psi0Path:
    xs: np.ndarray
    psi0: np.ndarray
    det_psi0: np.ndarray
    coeff_trace: np.ndarray


def evolve_psi0(model, x_end, steps, seed=None, det_tol=DET_TOL):
    """Integrate the gauge factor ``Psi0`` (identity at ``x0``) along x.

    The driving coefficient is the order-0 x-equation coefficient for
    ``m = 0`` models and the order-0 x-direction factor for ``m < 0``
    (which requires the expansion, hence a seed).
    """
    if model.m < 0:
        if seed is None:
            raise ValueError("m < 0 needs an IrregularSeed to form the coefficient")
        traj = evolve_expansion(seed, model, x_end, steps, det_tol=det_tol)
        return Psi0Path(traj.xs, traj.psi0, traj.det_psi0, traj.psi0_coeff_trace)
    _require_forward(model, x_end)
    dim = model.dim
    d = len(model.state_names)

    def rhs(x, y):
        u = y[:d]
        psi0 = y[d:].reshape(dim, dim)
        p0 = model.eval_P_stack(u, x)[-model.m]
        return np.concatenate([model.eval_state_rhs(u, x), (p0 @ psi0).reshape(-1)])

    y0 = np.concatenate([model.u0, np.eye(dim, dtype=np.complex128).reshape(-1)])
    xs, ys = _rk4_steps(rhs, model.x0, y0, x_end, int(steps))
    psi0 = ys[:, d:].reshape(len(xs), dim, dim)
    det = np.array([la.det(pk) for pk in psi0])
    for k, dk in enumerate(det):
        _check_psi0(dk, k, det_tol)
    trace = np.array(
        [np.trace(model.eval_P_stack(ys[k, :d], xs[k])[-model.m]) for k in range(len(xs))]
    )
    return Psi0Path(xs, psi0, det, trace)


# ---------------------------------------------------------------------------
# Analyses


@dataclass(frozen=True)
class ConservationReport:
    """Sampled conservation-law matrices and their drifts."""

    orders: list
    samples: np.ndarray  # (n_orders, n_samples, N, N)
    drift: dict
    eig_drift: dict


def conservation_laws(traj):
    """Similarity-transported conservation laws along the trajectory.

    Irregular mode with ``m = 0``: all pole orders of the essential
    factor; ``m < 0``: only order -1 (with the gauge factor driven by the
    order-0 x-direction coefficient, as built by the trajectory).
    Regular mode: the transported residue matrix.
    """
    ns = len(traj.xs)
    dim = traj.psi0.shape[-1]
    inv = np.array([la.inv(traj.psi0[k]) for k in range(ns)])
    if traj.mode == "regular":
        orders = [-1]
        mats = [traj.Qm1]
    else:
        n = traj.model.n
        if traj.model.m == 0:
            orders = list(range(n, 0))
            mats = [traj.Omega[:, t] for t in range(-n)]
        else:
            orders = [-1]
            mats = [traj.Omega[:, -1]]
    samples = np.empty((len(orders), ns, dim, dim), dtype=np.complex128)
    drift = {}
    eig_drift = {}
    for t, mat in enumerate(mats):
        for k in range(ns):
            samples[t, k] = inv[k] @ mat[k] @ traj.psi0[k]
        base = samples[t, 0]
        scale = 1.0 + entry_norm(base)
        drift[orders[t]] = float(
            np.max(np.abs(samples[t] - base[np.newaxis])) / scale
        )
        eigs = np.empty((ns, dim), dtype=np.complex128)
        for k in range(ns):
            vals = la.eigvals(samples[t, k])
            eigs[k] = vals[np.lexsort((vals.imag, vals.real))]
        escale = 1.0 + float(np.max(np.abs(eigs[0]))) if dim else 1.0
        eig_drift[orders[t]] = float(np.max(np.abs(eigs - eigs[0]))) / escale
    return ConservationReport(orders, samples, drift, eig_drift)


def residual_H(traj):
    """Cross-derivative defect of the essential factors, orders m+n..-1.

    The x-derivative of the pole coefficients is taken by centered finite
    differences on the sample grid with one Richardson level; edge samples
    carry NaN.  Only defined for irregular-mode trajectories.
    """
    if traj.mode != "irregular":
        raise UnsupportedModel("cross-derivative defect applies to irregular mode")
    ns = len(traj.xs)
    if ns < 5:
        raise GridTooCoarse("need at least 5 samples for the Richardson stencil")
    model = traj.model
    m, n = model.m, model.n
    K = -n
    dim = traj.psi0.shape[-1]
    h = float(traj.xs[1] - traj.xs[0])
    orders = list(range(m + n, 0))
    H = np.full((ns, len(orders)), np.nan)

    om = traj.Omega
    dom = np.empty_like(om)
    d1 = (om[3:-1] - om[1:-3]) / (2 * h)
    d2 = (om[4:] - om[:-4]) / (4 * h)
    dom[2:-2] = (4.0 * d1 - d2) / 3.0

    def omega_at(k, order):
        if n <= order <= -1:
            return om[k, order - n]
        return np.zeros((dim, dim), dtype=np.complex128)

    def domega_at(k, order):
        if n <= order <= -1:
            return dom[k, order - n]
        return np.zeros((dim, dim), dtype=np.complex128)

    def phi_at(k, order):
        if m <= order <= 0:
            return traj.Phi[k, order - m]
        return np.zeros((dim, dim), dtype=np.complex128)

    for k in range(2, ns - 2):
        for t, i in enumerate(orders):
            acc = domega_at(k, i) - (i + 1) * phi_at(k, i + 1)
            j_lo = max(n, i)
            j_hi = min(-1, i - m)
            for j in range(j_lo, j_hi + 1):
                oj = omega_at(k, j)
                pij = phi_at(k, i - j)
                acc += oj @ pij - pij @ oj
            H[k, t] = entry_norm(acc)
    return orders, H


# ---------------------------------------------------------------------------
# Closed-form lambda evaluation and recomposition (regular case)


def eval_lambda_regular(psi0, J, lam):
    """Essential factor ``Psi0 * lam**J`` via the matrix exponential.

    Principal branch of the logarithm; scaling-and-squaring through
    :func:`scipy.linalg.expm`.
    """
    lam = complex(lam)
    if lam == 0:
        raise EvalAtPole("lambda must be nonzero")
    power = scipy.linalg.expm(np.asarray(J, dtype=np.complex128) * np.log(lam))
    return np.asarray(psi0, dtype=np.complex128) @ power


@dataclass(frozen=True)
class RecomposeResult:
    psi: np.ndarray
    residual_lambda: float
    residual_x: float


def recompose_solution(model, seed, lam, sample=None, annulus_max=DEFAULT_ANNULUS[1]):
    """Rebuild the solution from a regular seed and measure both defects.

    ``Psi = sum_{i,j} lam**i (ln lam)**j C(i,j) Lambda`` with the
    closed-form essential factor; the lambda-defect and x-defect are the
    entry norms of ``Psi_lam - Q Psi`` and ``Psi_x - P Psi``, both
    evaluated analytically (term-wise derivative of the truncated sum,
    exact derivative of the essential factor, coefficient ODE for the
    x-derivatives).  ``sample`` may be ``(trajectory, index)`` to evaluate
    at a propagated point instead of the seed's ``x0``.
    """
    if isinstance(seed, IrregularSeed):
        raise UnsupportedLambdaEvaluation(
            "closed-form essential factor exists only in the regular case"
        )
    if not isinstance(seed, RegularSeed):
        raise TypeError("recompose_solution needs a RegularSeed")
    lam = complex(lam)
    if lam == 0:
        raise EvalAtPole("lambda must be nonzero")
    if abs(lam) > annulus_max:
        raise ValueError(f"|lambda| must be <= {annulus_max} for a meaningful defect")

    dim = model.dim
    if sample is None:
        u, x = model.u0, model.x0
        psi0 = np.eye(dim, dtype=np.complex128)
        cstack = seed.C
    else:
        traj, k = sample
        u, x = traj.states[k], traj.xs[k]
        psi0 = traj.psi0[k]
        cstack = traj.coeffs[k]

    q = model.eval_Q_stack(u, x)
    p = model.eval_P_stack(u, x)
    psi0_inv = la.inv(psi0)
    J = psi0_inv @ q[0] @ psi0
    lam_factor = eval_lambda_regular(psi0, J, lam)
    qm1_eff = psi0 @ J @ psi0_inv  # == q[0] up to conservation drift

    M = cstack.shape[0] - 1
    ln = np.log(lam)
    # Powers lam**i (ln lam)**j of the truncated double sum.
    weights = np.array(
        [[lam**i * ln**j for j in range(dim)] for i in range(M + 1)],
        dtype=np.complex128,
    )
    series_sum = np.einsum("ij,ijab->ab", weights, cstack)
    psi = series_sum @ lam_factor

    # lambda-defect: d/dlam of (sum) * Lambda + sum * dLambda, minus Q Psi.
    dweights = np.zeros_like(weights)
    for i in range(M + 1):
        for j in range(dim):
            val = 0.0 + 0.0j
            if i > 0 or True:
                val += i * lam ** (i - 1) * ln**j
            if j > 0:
                val += j * lam ** (i - 1) * ln ** (j - 1)
            dweights[i, j] = val
    dsum = np.einsum("ij,ijab->ab", dweights, cstack)
    dlam_factor = (qm1_eff / lam) @ lam_factor
    psi_lam = dsum @ lam_factor + series_sum @ dlam_factor
    q_of_lam = sum(lam ** (model.n + t) * q[t] for t in range(q.shape[0]))
    res_lambda = entry_norm(psi_lam - q_of_lam @ psi)

    # x-defect: coefficient ODE for dC, exact derivative of lam**J factor.
    dc = kernels.c_rhs_regular(p, np.ascontiguousarray(cstack))
    dsum_x = np.einsum("ij,ijab->ab", weights, dc)
    dlam_factor_x = p[0] @ lam_factor
    psi_x = dsum_x @ lam_factor + series_sum @ dlam_factor_x
    p_of_lam = sum(lam ** (model.m + t) * p[t] for t in range(p.shape[0]))
    res_x = entry_norm(psi_x - p_of_lam @ psi)

    return RecomposeResult(psi=psi, residual_lambda=res_lambda, residual_x=res_x)
