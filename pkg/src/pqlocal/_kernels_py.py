"""Pure-numpy coefficient kernels.

Reference implementations of the hot loops; the Cython module
``pqlocal._coeffcore`` mirrors these signatures and semantics exactly.
All stacks are C-contiguous complex128 arrays of shape ``(orders, N, N)``
(the log-depth stacks are ``(orders, depth, N, N)``).

Index conventions shared by both backends:

* ``c`` stacks holding expansion coefficients start at order 1, so slot
  ``k`` is the coefficient of order ``k + 1``; the order-0 coefficient is
  the identity and order ``> len`` coefficients are zero.
* lower-triangular recurrences receive the driving stack ``s`` starting at
  its lowest order.
"""

import numpy as np


def _ident(n):
    return np.eye(n, dtype=np.complex128)


def conv_stacks(a, b, nout):
    """First ``nout`` coefficients of the Cauchy product of two stacks.

    ``out[k] = sum_{i+j=k} a[i] @ b[j]``.
    """
    la, n = a.shape[0], a.shape[1]
    lb = b.shape[0]
    out = np.zeros((nout, n, n), dtype=np.complex128)
    for i in range(min(la, nout)):
        jmax = min(lb, nout - i)
        if jmax > 0:
            out[i : i + jmax] += a[i] @ b[:jmax]
    return out


def lower_recurrence(s, c):
    """Solve ``r[t] = s[t] + sum_{u<t} (s[u] @ c[t-u-1] - c[t-u-1] @ r[u])``.

    Used for both coefficient families of the essential factor: feed the
    pole part of the lambda-equation coefficient (orders n..-1) or the
    nonpositive part of the x-equation coefficient (orders m..0).
    Requires ``len(c) >= len(s) - 1``.
    """
    nr, n = s.shape[0], s.shape[1]
    out = np.empty((nr, n, n), dtype=np.complex128)
    for t in range(nr):
        acc = s[t].copy()
        for u in range(t):
            cc = c[t - u - 1]
            acc += s[u] @ cc - cc @ out[u]
        out[t] = acc
    return out


def lower_recurrence_dir(s, c, dc, r):
    """Directional derivative of :func:`lower_recurrence` at ``c`` along ``dc``."""
    nr, n = s.shape[0], s.shape[1]
    out = np.zeros((nr, n, n), dtype=np.complex128)
    for t in range(nr):
        acc = np.zeros((n, n), dtype=np.complex128)
        for u in range(t):
            cc = c[t - u - 1]
            dd = dc[t - u - 1]
            acc += s[u] @ dd - dd @ r[u] - cc @ out[u]
        out[t] = acc
    return out


def residual_f(c, om, q):
    """Defect of the frozen-x coefficient equations, orders n .. M-1.

    ``F(i) = (i+1) C(i+1) + sum_{j=n}^{-1} C(i-j) Om(j)
             - sum_{j=n}^{min(i, deg)} Q(j) C(i-j)``

    with ``C(0) = E`` and ``C(k) = 0`` for ``k < 0`` or ``k > M``.
    ``q`` holds orders ``n .. n + len(q) - 1``.
    """
    M, n_dim = c.shape[0], c.shape[1]
    K = om.shape[0]
    n = -K
    lq = q.shape[0]
    eye = _ident(n_dim)

    def cmat(k):
        if k == 0:
            return eye
        if 1 <= k <= M:
            return c[k - 1]
        return None

    out = np.zeros((M + K, n_dim, n_dim), dtype=np.complex128)
    for t in range(M + K):
        i = n + t
        acc = np.zeros((n_dim, n_dim), dtype=np.complex128)
        top = cmat(i + 1)
        if top is not None and i + 1 != 0:
            acc += (i + 1) * top
        for j in range(n, 0):
            cc = cmat(i - j)
            if cc is not None:
                acc += cc @ om[j - n]
        for j in range(n, min(i, n + lq - 1) + 1):
            cc = cmat(i - j)
            if cc is not None:
                acc -= q[j - n] @ cc
        out[t] = acc
    return out


def residual_f_dir(c, dc, om, dom, q):
    """Directional derivative of :func:`residual_f` along ``(dc, dom)``."""
    M, n_dim = c.shape[0], c.shape[1]
    K = om.shape[0]
    n = -K
    lq = q.shape[0]
    eye = _ident(n_dim)

    def cmat(k):
        if k == 0:
            return eye
        if 1 <= k <= M:
            return c[k - 1]
        return None

    def dcmat(k):
        if 1 <= k <= M:
            return dc[k - 1]
        return None

    out = np.zeros((M + K, n_dim, n_dim), dtype=np.complex128)
    for t in range(M + K):
        i = n + t
        acc = np.zeros((n_dim, n_dim), dtype=np.complex128)
        dtop = dcmat(i + 1)
        if dtop is not None and i + 1 != 0:
            acc += (i + 1) * dtop
        for j in range(n, 0):
            cc = cmat(i - j)
            dd = dcmat(i - j)
            if dd is not None:
                acc += dd @ om[j - n]
            if cc is not None:
                acc += cc @ dom[j - n]
        for j in range(n, min(i, n + lq - 1) + 1):
            dd = dcmat(i - j)
            if dd is not None:
                acc -= q[j - n] @ dd
        out[t] = acc
    return out


def c_rhs_irregular(p, m, c, phi):
    """x-derivatives of the expansion coefficients (irregular form).

    ``dC(i) = sum_{j=m}^{min(i, deg)} P(j) C(i-j) - sum_{j=m}^{0} C(i-j) Phi(j)``

    ``c`` holds orders 0..M (slot 0 is the order-0 coefficient), ``p``
    holds orders m..m+len(p)-1 and ``phi`` orders m..0.  Coefficients of
    order above M are dropped (truncation of the infinite system).
    """
    mm1, n = c.shape[0], c.shape[1]
    M = mm1 - 1
    lp = p.shape[0]
    out = np.zeros((mm1, n, n), dtype=np.complex128)
    for i in range(mm1):
        acc = np.zeros((n, n), dtype=np.complex128)
        for j in range(m, min(i, m + lp - 1) + 1):
            k = i - j
            if 0 <= k <= M:
                acc += p[j - m] @ c[k]
        for j in range(m, 1):
            k = i - j
            if 0 <= k <= M:
                acc -= c[k] @ phi[j - m]
        out[i] = acc
    return out


def c_rhs_regular(p, c):
    """x-derivatives of the log-depth coefficient stack (regular form).

    ``dC(i,j) = P(0) C(i,j) - C(i,j) P(0) + sum_{k>=1} P(k) C(i-k,j)``

    ``c`` has shape ``(M+1, depth, N, N)``; ``p`` holds orders 0..deg.
    """
    mm1, depth, n = c.shape[0], c.shape[1], c.shape[2]
    lp = p.shape[0]
    p0 = p[0]
    out = np.zeros_like(c)
    for i in range(mm1):
        for j in range(depth):
            acc = p0 @ c[i, j] - c[i, j] @ p0
            for k in range(1, min(i, lp - 1) + 1):
                acc += p[k] @ c[i - k, j]
            out[i, j] = acc
    return out


def residual_log_stack(c, q):
    """Defect of the log-depth coefficient equations at orders 1..M.

    ``G(i+1,j) = (i+1) C(i+1,j) + C(i+1,j) Q(-1) - Q(-1) C(i+1,j)
                 + (j+1) C(i+1,j+1) - sum_{k=0}^{min(i, deg)} Q(k) C(i-k,j)``

    ``c`` has shape ``(M+1, depth, N, N)``; ``q`` holds orders -1..deg.
    """
    mm1, depth, n = c.shape[0], c.shape[1], c.shape[2]
    M = mm1 - 1
    lq = q.shape[0]
    q0 = q[0]
    out = np.zeros((M, depth, n, n), dtype=np.complex128)
    for ip1 in range(1, M + 1):
        i = ip1 - 1
        for j in range(depth):
            acc = ip1 * c[ip1, j] + c[ip1, j] @ q0 - q0 @ c[ip1, j]
            if j + 1 < depth:
                acc += (j + 1) * c[ip1, j + 1]
            for k in range(0, min(i, lq - 2) + 1):
                acc -= q[k + 1] @ c[i - k, j]
            out[ip1 - 1, j] = acc
    return out
