"""Pure numpy implementations of the hot kernels.

Signatures and results match the compiled ``_core`` module; see
:mod:`gefzeros.kernels` for the selection logic.
"""

import math

import numpy as np

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)

GOLDEN = 2.399963229728653

# refine_segments status codes
OK = 0
ZERO_ON_CONTOUR = 1
DEPTH_EXCEEDED = 2


def series_eval(coeffs, z, log_scale):
    """``exp(-log_scale) * sum_k c_k z^k / sqrt(k!)`` at every point of ``z``.

    Running-term recurrence ``t_{k+1} = t_k z / sqrt(k+1)``; terms and
    partial sums are rescaled by ``1e-150`` whenever a term grows past
    ``1e150`` so large ``|z|`` never overflows.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    log_scale = np.broadcast_to(np.asarray(log_scale, dtype=np.float64), z.shape)
    term = np.ones(z.shape, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.complex128)
    shift = -np.array(log_scale, dtype=np.float64)
    for k, c in enumerate(coeffs):
        if c != 0:
            acc += c * term
        term *= z / math.sqrt(k + 1.0)
        if k % 16 == 15:
            big = np.abs(term) > _RESCALE
            if big.any():
                term[big] /= _RESCALE
                acc[big] /= _RESCALE
                shift[big] += _LOG_RESCALE
    return acc * np.exp(shift)


def _midpoint_values(coeffs, center, radius, log_scale, theta, local=False):
    pts = center + radius * np.exp(1j * theta)
    return series_eval(coeffs, pts, 0.5 * np.abs(pts) ** 2 if local else log_scale)


def refine_segments(coeffs, center, radius, log_scale, dbound, floor,
                    theta, values, max_depth, local=False):
    """Certified argument increment along ``center + radius*e^{i theta}``.

    ``theta`` is an increasing grid and ``values`` the scaled function on it.
    A segment ``[a, b]`` is accepted when
    ``dbound*(b - a) + floor < max(|F(a)|, |F(b)|)``: the image of the segment
    then stays in a disk around an endpoint value that excludes 0, so the
    principal phase difference is the true increment.  Rejected segments are
    bisected, level by level.  With ``local`` set, values are scaled by
    ``exp(-|z|^2/2)`` at each point instead of the fixed ``exp(-log_scale)``.

    Returns ``(increment, n_evals, min_modulus, status)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    values = np.asarray(values, dtype=np.complex128)
    ta, tb = theta[:-1], theta[1:]
    fa, fb = values[:-1], values[1:]
    total = 0.0
    n_evals = 0
    min_mod = float(np.min(np.abs(values))) if values.size else math.inf
    for _ in range(max_depth + 1):
        if ta.size == 0:
            return total, n_evals, min_mod, OK
        ma, mb = np.abs(fa), np.abs(fb)
        width = dbound * (tb - ta)
        good = width + floor < np.maximum(ma, mb)
        if good.any():
            total += float(np.sum(np.angle(fb[good] / fa[good])))
        bad = ~good
        if not bad.any():
            return total, n_evals, min_mod, OK
        ta, tb, fa, fb = ta[bad], tb[bad], fa[bad], fb[bad]
        if np.any(width[bad] <= floor):
            return total, n_evals, min_mod, ZERO_ON_CONTOUR
        tm = 0.5 * (ta + tb)
        fm = _midpoint_values(coeffs, center, radius, log_scale, tm, local)
        n_evals += tm.size
        min_mod = min(min_mod, float(np.min(np.abs(fm))))
        ta = np.concatenate([ta, tm])
        tb = np.concatenate([tm, tb])
        fa, fb = np.concatenate([fa, fm]), np.concatenate([fm, fb])
    return total, n_evals, min_mod, DEPTH_EXCEEDED


def _horner_with_derivative(b, u):
    """``p(u)`` and ``p'(u)`` for ``p = sum b_k u^k``, vectorized over ``u``."""
    p = np.full(u.shape, b[-1], dtype=np.complex128)
    dp = np.zeros(u.shape, dtype=np.complex128)
    for c in b[-2::-1]:
        dp = dp * u + p
        p = p * u + c
    return p, dp


def aberth(b, roots, max_iter, tol, bound):
    """Aberth-Ehrlich iteration for ``sum b_k u^k`` (lowest degree first).

    Jacobi-style sweep: all corrections computed from the previous iterate.
    A root is frozen once its correction falls below ``tol*|u|``.  An
    iterate that leaves the disk ``|u| <= bound`` (a bound on all root
    moduli) or turns non-finite is restarted at
    ``0.5*bound*exp(i*GOLDEN*(index + iteration))``.
    Returns ``(roots, iterations, converged)``.
    """
    b = np.asarray(b, dtype=np.complex128)
    u = np.array(roots, dtype=np.complex128)
    n = u.size
    active = np.ones(n, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return u, it - 1, True
        ui = u[idx]
        p, dp = _horner_with_derivative(b, ui)
        diff = ui[:, None] - u[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        recip = 1.0 / diff
        recip[np.arange(idx.size), idx] = 0.0
        s = recip.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            step = ratio / (1.0 - ratio * s)
        exact = p == 0
        step[exact] = 0.0
        new = ui - step
        bad = ~np.isfinite(new) | (np.abs(new) > bound)
        new[bad] = 0.5 * bound * np.exp(1j * GOLDEN * (idx[bad] + it))
        u[idx] = new
        done = np.abs(step) <= tol * np.maximum(np.abs(new), 1e-300)
        done &= ~bad
        active[idx[done]] = False
    return u, it, not active.any()
