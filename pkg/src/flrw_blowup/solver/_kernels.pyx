# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled radial RHS and RK4 step.

Same contract as _numpy_kernels; mode 0 = linear, 1 = |v|^p, 2 = |u_r|^p.
Only the first m points are active; u beyond them is taken as zero.
"""

from libc.math cimport fabs, pow, isfinite


cdef void _rhs(const double* u, const double* v, double* du, double* dv,
               double t, double dr, Py_ssize_t m, int n, double alpha,
               double mu, double p, int mode) noexcept nogil:
    cdef double c = pow(t, -2.0 * alpha)
    cdef double inv2 = 1.0 / (dr * dr)
    cdef double half = 0.5 / dr
    cdef double damp = mu / t
    cdef double up, lap, ur, src
    cdef Py_ssize_t i
    for i in range(m):
        up = u[i + 1] if i + 1 < m else 0.0
        if i == 0:
            lap = n * 2.0 * (up - u[0]) * inv2
            ur = 0.0
        else:
            ur = (up - u[i - 1]) * half
            lap = (up - 2.0 * u[i] + u[i - 1]) * inv2 + (n - 1) * ur / (i * dr)
        if mode == 1:
            src = pow(fabs(v[i]), p)
        elif mode == 2:
            src = pow(fabs(ur), p)
        else:
            src = 0.0
        du[i] = v[i]
        dv[i] = c * lap - damp * v[i] + src


def rhs(double[::1] u, double[::1] v, double t, double dr, int n,
        double alpha, double mu, double p, int mode):
    import numpy as np
    cdef Py_ssize_t m = u.shape[0]
    du = np.zeros(m)
    dv = np.zeros(m)
    cdef double[::1] du_v = du
    cdef double[::1] dv_v = dv
    with nogil:
        _rhs(&u[0], &v[0], &du_v[0], &dv_v[0], t, dr, m, n, alpha, mu, p, mode)
    return du, dv


def rk4_step(double[::1] u, double[::1] v, double[:, ::1] work, double t, double dt,
             double dr, Py_ssize_t m, int n, double alpha, double mu, double p, int mode):
    """Advance (u, v) in place by one classical RK4 step; returns sup|v| over the active points.

    ``work`` needs shape (6, >= m).  Returns -1.0 if a non-finite value appears.
    """
    cdef double* ku = &work[0, 0]
    cdef double* kv = &work[1, 0]
    cdef double* su = &work[2, 0]
    cdef double* sv = &work[3, 0]
    cdef double* au = &work[4, 0]
    cdef double* av = &work[5, 0]
    cdef double* pu = &u[0]
    cdef double* pv = &v[0]
    cdef double h2 = 0.5 * dt
    cdef double w
    cdef double sup = 0.0
    cdef Py_ssize_t i
    cdef int stage
    cdef double ts
    with nogil:
        for i in range(m):
            au[i] = 0.0
            av[i] = 0.0
            su[i] = pu[i]
            sv[i] = pv[i]
        for stage in range(4):
            ts = t if stage == 0 else (t + dt if stage == 3 else t + h2)
            _rhs(su, sv, ku, kv, ts, dr, m, n, alpha, mu, p, mode)
            w = 1.0 if (stage == 0 or stage == 3) else 2.0
            for i in range(m):
                au[i] += w * ku[i]
                av[i] += w * kv[i]
            if stage < 3:
                # next stage input: y + c dt k
                for i in range(m):
                    su[i] = pu[i] + (dt if stage == 2 else h2) * ku[i]
                    sv[i] = pv[i] + (dt if stage == 2 else h2) * kv[i]
        for i in range(m):
            pu[i] += dt / 6.0 * au[i]
            pv[i] += dt / 6.0 * av[i]
            if not (isfinite(pu[i]) and isfinite(pv[i])):
                sup = -1.0
            elif sup >= 0.0 and fabs(pv[i]) > sup:
                sup = fabs(pv[i])
    return sup
