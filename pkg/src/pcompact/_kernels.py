"""Compiled inner loops.

Index conventions are 0-based.  Band storage is row-packed: ``band[i, nl + (j - i)]``
holds ``A[i, j]``.  Boundary tables have shape ``(2, m)``: row 0 holds the first
``m`` nodes, row 1 the last ``m`` nodes.
"""
import numpy as np
from numba import njit

TINY_PIVOT = 1e-13


@njit(cache=True)
def band_lu_factor(band, nl, nu):
    """In-place Doolittle LU without pivoting; the diagonal is replaced by its inverse.

    Returns the index of the first tiny pivot, or -1.
    """
    n = band.shape[0]
    for k in range(n):
        piv = band[k, nl]
        if abs(piv) < TINY_PIVOT:
            return k
        inv = 1.0 / piv
        band[k, nl] = inv
        for i in range(k + 1, min(k + nl, n - 1) + 1):
            l = band[i, nl + k - i] * inv
            band[i, nl + k - i] = l
            for j in range(k + 1, min(k + nu, n - 1) + 1):
                band[i, nl + j - i] -= l * band[k, nl + j - k]
    return -1


@njit(cache=True)
def band_lu_solve(band, nl, nu, rhs, out):
    n = band.shape[0]
    for i in range(n):
        s = rhs[i]
        for k in range(max(0, i - nl), i):
            s -= band[i, nl + k - i] * out[k]
        out[i] = s
    for i in range(n - 1, -1, -1):
        s = out[i]
        for j in range(i + 1, min(i + nu, n - 1) + 1):
            s -= band[i, nl + j - i] * out[j]
        out[i] = s * band[i, nl]


@njit(cache=True)
def thomas_factor(lower, diag, upper):
    """Thomas-algorithm elimination factors: (multipliers, inverse pivots)."""
    n = diag.shape[0]
    mult = np.zeros(n)
    inv = np.empty(n)
    d = diag[0]
    if abs(d) < TINY_PIVOT:
        return mult, inv, 0
    inv[0] = 1.0 / d
    for i in range(1, n):
        mult[i] = lower[i] * inv[i - 1]
        d = diag[i] - mult[i] * upper[i - 1]
        if abs(d) < TINY_PIVOT:
            return mult, inv, i
        inv[i] = 1.0 / d
    return mult, inv, -1


@njit(cache=True)
def thomas_solve(mult, inv, upper, rhs, out):
    n = rhs.shape[0]
    out[0] = rhs[0]
    for i in range(1, n):
        out[i] = rhs[i] - mult[i] * out[i - 1]
    out[n - 1] = out[n - 1] * inv[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = (out[i] - upper[i] * out[i + 1]) * inv[i]


@njit(cache=True)
def central_rhs(u, a, inv_h, m, bvals, out):
    """Right-hand side of the classical scheme with boundary rows set to ``bvals``."""
    n = u.shape[0]
    ne = a.shape[0]
    for j in range(m):
        out[j] = bvals[0, j]
        out[n - m + j] = bvals[1, j]
    for j in range(m, n - m):
        s = 0.0
        for k in range(1, ne + 1):
            s += a[k - 1] * (u[j + k] - u[j - k])
        out[j] = s * inv_h


@njit(cache=True)
def forward_sweep(u, beta, b, beta0_inv, inv_h, m, top, out):
    """Right-to-left sweep of the forward operator; ``top`` fills the last m nodes."""
    n = u.shape[0]
    nc = beta.shape[0]
    ne = b.shape[0]
    bsum = 0.0
    for k in range(ne):
        bsum += b[k]
    for j in range(m):
        out[n - m + j] = top[j]
    for j in range(n - m - 1, -1, -1):
        s = -bsum * u[j]
        for k in range(1, ne + 1):
            s += b[k - 1] * u[j + k]
        s *= inv_h
        for k in range(1, nc + 1):
            s -= beta[k - 1] * out[j + k]
        out[j] = s * beta0_inv


@njit(cache=True)
def backward_sweep(u, beta, b, beta0_inv, inv_h, m, bottom, out):
    """Left-to-right sweep of the backward operator; ``bottom`` fills the first m nodes."""
    n = u.shape[0]
    nc = beta.shape[0]
    ne = b.shape[0]
    bsum = 0.0
    for k in range(ne):
        bsum += b[k]
    for j in range(m):
        out[j] = bottom[j]
    for j in range(m, n):
        s = bsum * u[j]
        for k in range(1, ne + 1):
            s -= b[k - 1] * u[j - k]
        s *= inv_h
        for k in range(1, nc + 1):
            s -= beta[k - 1] * out[j - k]
        out[j] = s * beta0_inv


@njit(cache=True)
def apply_onesided(u, wl, wr, inv_h, out):
    """Boundary derivatives from one-sided stencils.

    ``wl[i]`` differentiates at node ``i`` using nodes ``0..q``; ``wr[i]``
    differentiates at node ``n-m+i`` using nodes ``n-1-q..n-1``.
    """
    n = u.shape[0]
    m, q1 = wl.shape
    for i in range(m):
        s = 0.0
        for p in range(q1):
            s += wl[i, p] * u[p]
        out[0, i] = s * inv_h
        s = 0.0
        for p in range(q1):
            s += wr[i, p] * u[n - q1 + p]
        out[1, i] = s * inv_h


# --- time marching ----------------------------------------------------------------


@njit(cache=True)
def _bvals(u, table, step, analytic, wl, wr, inv_h, out):
    if analytic:
        m = out.shape[1]
        for i in range(m):
            out[0, i] = table[step, 0, i]
            out[1, i] = table[step, 1, i]
    else:
        apply_onesided(u, wl, wr, inv_h, out)


@njit(cache=True)
def _impose(u, vtable, step, impose):
    if impose:
        n = u.shape[0]
        m = vtable.shape[2]
        for i in range(m):
            u[i] = vtable[step, 0, i]
            u[n - m + i] = vtable[step, 1, i]


@njit(cache=True)
def _all_finite(x):
    for v in x:
        if not np.isfinite(v):
            return False
    return True


@njit(cache=True, nogil=True)
def march_maccormack(u, nsteps, dt, speed, burgers, beta, b, beta0_inv, h, m,
                     table, analytic, wl, wr, alternate, vtable, impose):
    """MacCormack predictor/corrector with prefactored sweeps.

    With ``impose`` set, the first and last ``m`` nodes of every stage are
    overwritten with ``vtable[step]`` (exact boundary data).  Returns ``(steps_done, failed_stage)``; ``failed_stage`` is 0 on success.
    """
    n = u.shape[0]
    inv_h = 1.0 / h
    d = np.empty(n)
    us = np.empty(n)
    bv = np.empty((2, m))
    for step in range(nsteps):
        fwd_first = not (alternate and step % 2 == 1)
        # stage 1 at t_n
        _bvals(u, table, step, analytic, wl, wr, inv_h, bv)
        if fwd_first:
            forward_sweep(u, beta, b, beta0_inv, inv_h, m, bv[1], d)
        else:
            backward_sweep(u, beta, b, beta0_inv, inv_h, m, bv[0], d)
        if burgers:
            for j in range(n):
                us[j] = u[j] - dt * u[j] * d[j]
        else:
            for j in range(n):
                us[j] = u[j] - dt * speed * d[j]
        _impose(us, vtable, step + 1, impose)
        if not _all_finite(us):
            return step, 1
        # stage 2 at t_{n+1}
        _bvals(us, table, step + 1, analytic, wl, wr, inv_h, bv)
        if fwd_first:
            backward_sweep(us, beta, b, beta0_inv, inv_h, m, bv[0], d)
        else:
            forward_sweep(us, beta, b, beta0_inv, inv_h, m, bv[1], d)
        if burgers:
            for j in range(n):
                u[j] = 0.5 * (u[j] + us[j] - dt * us[j] * d[j])
        else:
            for j in range(n):
                u[j] = 0.5 * (u[j] + us[j] - dt * speed * d[j])
        _impose(u, vtable, step + 1, impose)
        if not _all_finite(u):
            return step, 2
    return nsteps, 0


@njit(cache=True)
def _classical_apply(u, a, inv_h, m, bv, tri, mult, inv, upper, band, nl, rhs, out):
    central_rhs(u, a, inv_h, m, bv, rhs)
    if tri:
        thomas_solve(mult, inv, upper, rhs, out)
    else:
        band_lu_solve(band, nl, nl, rhs, out)


@njit(cache=True, nogil=True)
def march_rk2(u, nsteps, dt, speed, burgers, a, h, m, tri, mult, inv, upper, band, nl,
              table, analytic, wl, wr, vtable, impose):
    """Two-stage TVD Runge-Kutta with classical compact derivatives."""
    n = u.shape[0]
    inv_h = 1.0 / h
    d = np.empty(n)
    rhs = np.empty(n)
    u1 = np.empty(n)
    bv = np.empty((2, m))
    for step in range(nsteps):
        _bvals(u, table, step, analytic, wl, wr, inv_h, bv)
        _classical_apply(u, a, inv_h, m, bv, tri, mult, inv, upper, band, nl, rhs, d)
        if burgers:
            for j in range(n):
                u1[j] = u[j] - dt * u[j] * d[j]
        else:
            for j in range(n):
                u1[j] = u[j] - dt * speed * d[j]
        _impose(u1, vtable, step + 1, impose)
        if not _all_finite(u1):
            return step, 1
        _bvals(u1, table, step + 1, analytic, wl, wr, inv_h, bv)
        _classical_apply(u1, a, inv_h, m, bv, tri, mult, inv, upper, band, nl, rhs, d)
        if burgers:
            for j in range(n):
                u[j] = 0.5 * u[j] + 0.5 * u1[j] - 0.5 * dt * u1[j] * d[j]
        else:
            for j in range(n):
                u[j] = 0.5 * u[j] + 0.5 * u1[j] - 0.5 * dt * speed * d[j]
        _impose(u, vtable, step + 1, impose)
        if not _all_finite(u):
            return step, 2
    return nsteps, 0


@njit(cache=True)
def repeat_sweeps(u, reps, beta, b, beta0_inv, h, m, bv, out):
    """Kernel-only timing loop: one forward plus one backward sweep per rep."""
    inv_h = 1.0 / h
    for _ in range(reps):
        forward_sweep(u, beta, b, beta0_inv, inv_h, m, bv[1], out)
        backward_sweep(u, beta, b, beta0_inv, inv_h, m, bv[0], out)


@njit(cache=True)
def repeat_classical(u, reps, a, h, m, bv, tri, mult, inv, upper, band, nl, out):
    """Kernel-only timing loop: two classical derivative solves per rep."""
    inv_h = 1.0 / h
    rhs = np.empty(u.shape[0])
    for _ in range(reps):
        _classical_apply(u, a, inv_h, m, bv, tri, mult, inv, upper, band, nl, rhs, out)
        _classical_apply(u, a, inv_h, m, bv, tri, mult, inv, upper, band, nl, rhs, out)


@njit(cache=True)
def ghost_sweep_table(ur, dr, ul, dl, beta, b, beta0_inv, h, m, out):
    """Sweep-consistent boundary derivatives from exact data on ghost extensions.

    Row ``t`` of ``ur`` holds exact ``u`` on nodes ``n-m .. n-1+G`` and ``dr`` the
    exact derivative on the last ``m`` of them; ``ul``/``dl`` mirror this on the
    left.  ``out[t, 0]`` receives backward-operator values on the first ``m``
    nodes, ``out[t, 1]`` forward-operator values on the last ``m`` nodes.
    """
    inv_h = 1.0 / h
    L, w = ur.shape
    tmp = np.empty(w)
    for t in range(L):
        forward_sweep(ur[t], beta, b, beta0_inv, inv_h, m, dr[t], tmp)
        for i in range(m):
            out[t, 1, i] = tmp[i]
        backward_sweep(ul[t], beta, b, beta0_inv, inv_h, m, dl[t], tmp)
        for i in range(m):
            out[t, 0, i] = tmp[w - m + i]
