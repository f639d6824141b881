# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Same contracts as :mod:`gefzeros._pure`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, fabs, atan2, cos, sin, INFINITY

cnp.import_array()

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex cexp(double complex)

cdef double RESCALE = 1e150
cdef double LOG_RESCALE = 345.38776394910684

OK = 0
ZERO_ON_CONTOUR = 1
DEPTH_EXCEEDED = 2


cdef inline double complex _eval_one(const double complex[::1] c, const double[::1] isq,
                                     double zr, double zi, double log_scale) nogil:
    # real arithmetic throughout; isq[k] = 1/sqrt(k+1)
    cdef Py_ssize_t k, n = c.shape[0]
    cdef double tr = 1.0, ti = 0.0, ar = 0.0, ai = 0.0, cr, ci, nr, shift = -log_scale
    for k in range(n):
        cr = c[k].real
        ci = c[k].imag
        ar += cr * tr - ci * ti
        ai += cr * ti + ci * tr
        nr = (tr * zr - ti * zi) * isq[k]
        ti = (tr * zi + ti * zr) * isq[k]
        tr = nr
        if (k & 15) == 15 and (fabs(tr) > RESCALE or fabs(ti) > RESCALE):
            tr /= RESCALE
            ti /= RESCALE
            ar /= RESCALE
            ai /= RESCALE
            shift += LOG_RESCALE
    shift = exp(shift)
    return (ar * shift) + 1j * (ai * shift)


cdef _inv_sqrt_table(Py_ssize_t n):
    return 1.0 / np.sqrt(np.arange(1, n + 1, dtype=np.float64))


def series_eval(coeffs, z, log_scale):
    cdef const double complex[::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef const double[::1] isq = _inv_sqrt_table(c.shape[0])
    za = np.ascontiguousarray(z, dtype=np.complex128)
    shape = za.shape
    cdef const double complex[::1] zf = za.reshape(-1)
    ls = np.ascontiguousarray(
        np.broadcast_to(np.asarray(log_scale, dtype=np.float64), shape)).reshape(-1)
    cdef const double[::1] lsv = ls
    out = np.empty(zf.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(zf.shape[0]):
            o[i] = _eval_one(c, isq, zf[i].real, zf[i].imag, lsv[i])
    return out.reshape(shape)


def refine_segments(coeffs, double complex center, double radius, double log_scale,
                    double dbound, double floor, theta, values, int max_depth,
                    bint local=False):
    cdef const double complex[::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double complex[::1] fv = np.ascontiguousarray(values, dtype=np.complex128)
    cdef const double[::1] isq = _inv_sqrt_table(c.shape[0])
    cdef double cre = center.real, cim = center.imag
    cdef Py_ssize_t nseg = th.shape[0] - 1
    cdef Py_ssize_t j, top
    cdef int cap = max_depth + 2
    # explicit depth-first stack of pending half-segments
    stack_t = np.empty(2 * cap, dtype=np.float64)
    stack_f = np.empty(2 * cap, dtype=np.complex128)
    stack_d = np.empty(cap, dtype=np.int32)
    cdef double[::1] st = stack_t
    cdef double complex[::1] sf = stack_f
    cdef int[::1] sd = stack_d
    cdef double total = 0.0, ta, tb, tm, width, ma, mb, min_mod = INFINITY
    cdef double zr, zi, ls
    cdef double complex fa, fb, fm
    cdef long n_evals = 0
    cdef int depth, status = 0
    with nogil:
        for j in range(nseg + 1):
            ma = cabs(fv[j])
            if ma < min_mod:
                min_mod = ma
        for j in range(nseg):
            top = 0
            st[0] = th[j]; st[1] = th[j + 1]
            sf[0] = fv[j]; sf[1] = fv[j + 1]
            sd[0] = 0
            top = 1
            while top > 0:
                top -= 1
                ta = st[2 * top]; tb = st[2 * top + 1]
                fa = sf[2 * top]; fb = sf[2 * top + 1]
                depth = sd[top]
                ma = cabs(fa); mb = cabs(fb)
                width = dbound * (tb - ta)
                if width + floor < (ma if ma > mb else mb):
                    # arg(fb / fa) without the division
                    total += atan2(fb.imag * fa.real - fb.real * fa.imag,
                                   fb.real * fa.real + fb.imag * fa.imag)
                    continue
                if width <= floor:
                    status = 1
                    break
                if depth >= max_depth:
                    status = 2
                    break
                tm = 0.5 * (ta + tb)
                zr = cre + radius * cos(tm)
                zi = cim + radius * sin(tm)
                # local scaling: exp(-|z|^2/2) at the point itself
                ls = 0.5 * (zr * zr + zi * zi) if local else log_scale
                fm = _eval_one(c, isq, zr, zi, ls)
                n_evals += 1
                if cabs(fm) < min_mod:
                    min_mod = cabs(fm)
                # push right half first so the left half is processed first
                st[2 * top] = tm; st[2 * top + 1] = tb
                sf[2 * top] = fm; sf[2 * top + 1] = fb
                sd[top] = depth + 1
                top += 1
                st[2 * top] = ta; st[2 * top + 1] = tm
                sf[2 * top] = fa; sf[2 * top + 1] = fm
                sd[top] = depth + 1
                top += 1
            if status != 0:
                break
    return total, n_evals, min_mod, status


cdef double GOLDEN = 2.399963229728653


def aberth(b, roots, int max_iter, double tol, double bound):
    cdef const double complex[::1] bc = np.ascontiguousarray(b, dtype=np.complex128)
    u_arr = np.array(roots, dtype=np.complex128)
    new_arr = u_arr.copy()
    act_arr = np.ones(u_arr.shape[0], dtype=np.uint8)
    cdef double complex[::1] u = u_arr
    cdef double complex[::1] un = new_arr
    cdef unsigned char[::1] active = act_arr
    cdef Py_ssize_t n = u.shape[0], deg = bc.shape[0] - 1
    cdef Py_ssize_t i, j, k
    cdef int it = 0, n_active
    cdef double complex p, dp, s, ratio, step, ui
    cdef double mag
    with nogil:
        for it in range(1, max_iter + 1):
            n_active = 0
            for i in range(n):
                un[i] = u[i]
                if not active[i]:
                    continue
                n_active += 1
                ui = u[i]
                p = bc[deg]
                dp = 0.0
                for k in range(deg - 1, -1, -1):
                    dp = dp * ui + p
                    p = p * ui + bc[k]
                if p == 0:
                    active[i] = 0
                    continue
                s = 0.0
                for j in range(n):
                    if j != i:
                        s = s + 1.0 / (ui - u[j])
                ratio = p / dp
                step = ratio / (1.0 - ratio * s)
                un[i] = ui - step
                mag = cabs(un[i])
                if mag != mag or mag > bound:
                    un[i] = 0.5 * bound * cexp(1j * GOLDEN * (i + it))
                    continue
                if mag < 1e-300:
                    mag = 1e-300
                if cabs(step) <= tol * mag:
                    active[i] = 0
            for i in range(n):
                u[i] = un[i]
            if n_active == 0:
                it -= 1
                break
    converged = not np.any(act_arr)
    return u_arr, it, converged
