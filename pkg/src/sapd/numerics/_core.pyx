# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: Jacobi eigensolver, 4x4 eigenvalues, pivoted LU,
discrete Lyapunov solves and the OpenMP-parallel (tau, sigma, theta) scan.

Contracts match ``_pure.py`` exactly; the pure module is the import-time
fallback and the cross-check reference for these routines.
"""

from cython.parallel cimport prange
from libc.math cimport sqrt, fabs, cos, sin, pi, NAN

import numpy as np

BACKEND_NAME = "compiled"

cdef int DK_ITERS = 200

cdef double STABILITY_CUTOFF_C = 1.0 - 1e-10
STABILITY_CUTOFF = STABILITY_CUTOFF_C


# ---------------------------------------------------------------------------
# quartic roots (Durand-Kerner + Newton polish)

cdef inline double complex _peval(double c1, double c2, double c3, double c4,
                                  double complex z) noexcept nogil:
    return (((z + c1) * z + c2) * z + c3) * z + c4


cdef inline double complex _dpeval(double c1, double c2, double c3,
                                   double complex z) noexcept nogil:
    return ((4.0 * z + 3.0 * c1) * z + 2.0 * c2) * z + c3


cdef void _quartic_roots(double c1, double c2, double c3, double c4,
                         double complex* out) noexcept nogil:
    cdef double r = 1.0
    cdef double m = fabs(c1)
    if fabs(c2) > m: m = fabs(c2)
    if fabs(c3) > m: m = fabs(c3)
    if fabs(c4) > m: m = fabs(c4)
    r += m
    cdef double complex z[4]
    cdef double ang
    cdef int k, j, it
    for k in range(4):
        ang = 0.4 + 2.0 * pi * k / 4.0
        z[k] = r * (cos(ang) + 1j * sin(ang))
    cdef double complex d, step
    cdef double moved
    for it in range(DK_ITERS):
        moved = 0.0
        for k in range(4):
            d = 1.0 + 0.0j
            for j in range(4):
                if j != k:
                    d = d * (z[k] - z[j])
            if d == 0:
                d = 1e-60 + 0.0j
            step = _peval(c1, c2, c3, c4, z[k]) / d
            z[k] = z[k] - step
            if abs(step) > moved:
                moved = abs(step)
        if moved <= 1e-15 * r:
            break
    for k in range(4):
        for it in range(2):
            d = _dpeval(c1, c2, c3, z[k])
            if abs(d) > 1e-30:
                z[k] = z[k] - _peval(c1, c2, c3, c4, z[k]) / d
    for k in range(4):
        out[k] = z[k]


cdef inline double _m2(double* a, int i, int j) noexcept nogil:
    return a[4 * i + i] * a[4 * j + j] - a[4 * i + j] * a[4 * j + i]


cdef inline double _m3(double* a, int i, int j, int k) noexcept nogil:
    return (a[4 * i + i] * (a[4 * j + j] * a[4 * k + k] - a[4 * j + k] * a[4 * k + j])
            - a[4 * i + j] * (a[4 * j + i] * a[4 * k + k] - a[4 * j + k] * a[4 * k + i])
            + a[4 * i + k] * (a[4 * j + i] * a[4 * k + j] - a[4 * j + j] * a[4 * k + i]))


cdef void _char_poly4(double* a, double* c) noexcept nogil:
    """c[0..3] = coefficients c1..c4 of det(lambda I - A)."""
    c[0] = -(a[0] + a[5] + a[10] + a[15])
    c[1] = _m2(a, 0, 1) + _m2(a, 0, 2) + _m2(a, 0, 3) + _m2(a, 1, 2) + _m2(a, 1, 3) + _m2(a, 2, 3)
    c[2] = -(_m3(a, 0, 1, 2) + _m3(a, 0, 1, 3) + _m3(a, 0, 2, 3) + _m3(a, 1, 2, 3))
    cdef double det = 0.0
    cdef double sign = 1.0
    cdef int j, cc, idx
    cdef int cols[3]
    cdef double sub
    for j in range(4):
        idx = 0
        for cc in range(4):
            if cc != j:
                cols[idx] = cc
                idx += 1
        sub = (a[4 + cols[0]] * (a[8 + cols[1]] * a[12 + cols[2]] - a[8 + cols[2]] * a[12 + cols[1]])
               - a[4 + cols[1]] * (a[8 + cols[0]] * a[12 + cols[2]] - a[8 + cols[2]] * a[12 + cols[0]])
               + a[4 + cols[2]] * (a[8 + cols[0]] * a[12 + cols[1]] - a[8 + cols[1]] * a[12 + cols[0]]))
        det += sign * a[j] * sub
        sign = -sign
    c[3] = det


cdef double _block_rho(double* a) noexcept nogil:
    cdef double c[4]
    cdef double complex roots[4]
    cdef double best = 0.0, v
    cdef int k
    _char_poly4(a, c)
    _quartic_roots(c[0], c[1], c[2], c[3], roots)
    for k in range(4):
        v = abs(roots[k])
        if v > best:
            best = v
    return best


# ---------------------------------------------------------------------------
# LU with partial pivoting (n <= 16) and the vectorized 4x4 Lyapunov solve

cdef int _lu_solve(double* a, double* x, int n) noexcept nogil:
    """In-place solve; returns 0 on success, -1 if singular within tolerance."""
    cdef int col, r, c, pk
    cdef double amax = 0.0, piv_tol, f, inv, s, v
    for r in range(n * n):
        v = fabs(a[r])
        if v > amax:
            amax = v
    if amax < 1e-300:
        amax = 1e-300
    piv_tol = 1e-14 * amax
    for col in range(n):
        pk = col
        for r in range(col + 1, n):
            if fabs(a[n * r + col]) > fabs(a[n * pk + col]):
                pk = r
        if fabs(a[n * pk + col]) <= piv_tol:
            return -1
        if pk != col:
            for c in range(n):
                f = a[n * col + c]
                a[n * col + c] = a[n * pk + c]
                a[n * pk + c] = f
            f = x[col]
            x[col] = x[pk]
            x[pk] = f
        inv = 1.0 / a[n * col + col]
        for r in range(col + 1, n):
            f = a[n * r + col] * inv
            if f != 0.0:
                a[n * r + col] = 0.0
                for c in range(col + 1, n):
                    a[n * r + c] -= f * a[n * col + c]
                x[r] -= f * x[col]
    for r in range(n - 1, -1, -1):
        s = x[r]
        for c in range(r + 1, n):
            s -= a[n * r + c] * x[c]
        x[r] = s / a[n * r + r]
    return 0


cdef int _lyap_solve4(double* a, double* q, double* s_out) noexcept nogil:
    cdef double m[256]
    cdef double x[16]
    cdef int i, j, k, l, row
    for i in range(256):
        m[i] = 0.0
    for i in range(4):
        for j in range(4):
            row = 4 * i + j
            for k in range(4):
                for l in range(4):
                    m[16 * row + 4 * k + l] = -a[4 * i + k] * a[4 * j + l]
            m[16 * row + row] += 1.0
    for i in range(16):
        x[i] = q[i]
    if _lu_solve(m, x, 16) != 0:
        return -1
    for i in range(16):
        s_out[i] = x[i]
    return 0


# ---------------------------------------------------------------------------
# block dynamics and the grid scan

cdef void _fill_block(double lam, double tau, double sigma, double theta,
                      double mu_x, double mu_y, double* a, double* b) noexcept nogil:
    cdef double ax = 1.0 / (1.0 + tau * mu_x)
    cdef double ay = 1.0 / (1.0 + sigma * mu_y)
    cdef double axy = ax * ay
    cdef int i
    for i in range(16):
        a[i] = 0.0
        b[i] = 0.0
    a[0] = ax - tau * sigma * (1.0 + theta) * axy * lam * lam
    a[1] = -tau * axy * lam
    a[2] = tau * sigma * theta * axy * lam * lam
    a[4] = sigma * (1.0 + theta) * ay * lam
    a[5] = ay
    a[6] = -sigma * theta * ay * lam
    a[8] = 1.0
    a[13] = 1.0
    b[0] = -tau * ax
    b[1] = -tau * sigma * (1.0 + theta) * axy * lam
    b[3] = tau * sigma * theta * axy * lam
    b[5] = sigma * (1.0 + theta) * ay
    b[7] = -sigma * theta * ay


cdef inline void _bbt(double* b, double* q) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(16):
        q[i] = 0.0
    for i in range(2):
        for j in range(2):
            s = 0.0
            for k in range(4):
                s += b[4 * i + k] * b[4 * j + k]
            q[4 * i + j] = s


cdef void _point_rho_j(double* lams, int d, double tau, double sigma, double theta,
                       double mu_x, double mu_y, bint want_j,
                       double* rho_out, double* j_out) noexcept nogil:
    cdef double a[16]
    cdef double b[16]
    cdef double q[16]
    cdef double s[16]
    cdef double rho_a = 0.0, r, tr_sum
    cdef int i
    for i in range(d):
        _fill_block(lams[i], tau, sigma, theta, mu_x, mu_y, a, b)
        r = _block_rho(a)
        if r > rho_a:
            rho_a = r
    rho_out[0] = rho_a * rho_a
    j_out[0] = NAN
    if (not want_j) or rho_a >= STABILITY_CUTOFF_C:
        return
    tr_sum = 0.0
    for i in range(d):
        _fill_block(lams[i], tau, sigma, theta, mu_x, mu_y, a, b)
        _bbt(b, q)
        if _lyap_solve4(a, q, s) != 0:
            return
        tr_sum += s[0] + s[5] + s[10] + s[15]
    j_out[0] = tr_sum / (2.0 * d)


def scan_grid(lams, taus, sigmas, thetas, double mu_x, double mu_y,
              bint want_j, int threads=1):
    """Dense scan over the (tau, sigma, theta) grid; OpenMP over grid points.

    Returns (rho_true, J, unstable count); flat index is
    ((i_tau * n_sigma) + i_sigma) * n_theta + i_theta.
    """
    cdef double[::1] lam_v = np.ascontiguousarray(lams, dtype=np.float64)
    cdef double[::1] tau_v = np.ascontiguousarray(taus, dtype=np.float64)
    cdef double[::1] sig_v = np.ascontiguousarray(sigmas, dtype=np.float64)
    cdef double[::1] the_v = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef int d = lam_v.shape[0]
    cdef int n1 = tau_v.shape[0], n2 = sig_v.shape[0], n3 = the_v.shape[0]
    cdef long n = n1 * n2 * n3
    rho_arr = np.empty(n, dtype=np.float64)
    j_arr = np.full(n, np.nan, dtype=np.float64)
    cdef double[::1] rho_v = rho_arr
    cdef double[::1] j_v = j_arr
    cdef long idx
    cdef int i1, i2, i3
    cdef long unstable = 0
    cdef double cutoff_sq = STABILITY_CUTOFF_C * STABILITY_CUTOFF_C
    if threads < 1:
        threads = 1
    with nogil:
        for idx in prange(n, num_threads=threads, schedule='dynamic', chunksize=64):
            i1 = <int> (idx // (n2 * n3))
            i2 = <int> ((idx // n3) % n2)
            i3 = <int> (idx % n3)
            _point_rho_j(&lam_v[0], d, tau_v[i1], sig_v[i2], the_v[i3],
                         mu_x, mu_y, want_j, &rho_v[idx], &j_v[idx])
            if rho_v[idx] >= cutoff_sq:
                unstable += 1
    return rho_arr, j_arr, int(unstable)


def point_rho_j(lams, double tau, double sigma, double theta,
                double mu_x, double mu_y, bint want_j):
    cdef double[::1] lam_v = np.ascontiguousarray(lams, dtype=np.float64)
    cdef double rho, j
    _point_rho_j(&lam_v[0], lam_v.shape[0], tau, sigma, theta, mu_x, mu_y,
                 want_j, &rho, &j)
    return rho, j


# ---------------------------------------------------------------------------
# python-facing wrappers matching _pure signatures

def jacobi_eig(a_flat, int n, bint want_vectors):
    cdef double[::1] a = np.array(a_flat, dtype=np.float64).ravel()
    cdef double[:, ::1] v = None
    cdef int i, j, p, q_, sweep
    cdef double scale = 0.0, off, tol, apq, theta, t, c, s_, app, aqq, aip, aiq, vip, viq
    # exact symmetrization, as in the pure backend
    for i in range(n):
        for j in range(i):
            apq = 0.5 * (a[i * n + j] + a[j * n + i])
            a[i * n + j] = apq
            a[j * n + i] = apq
    if want_vectors:
        v = np.eye(n, dtype=np.float64)
    for i in range(n * n):
        scale += a[i] * a[i]
    scale = sqrt(scale)
    if scale == 0.0:
        w0 = [0.0] * n
        return w0, (np.eye(n).tolist() if want_vectors else None)
    tol = 1e-15 * scale
    for sweep in range(60):
        off = 0.0
        for p in range(n):
            for q_ in range(p + 1, n):
                off += a[p * n + q_] * a[p * n + q_]
        off = sqrt(2.0 * off)
        if off <= tol:
            break
        for p in range(n - 1):
            for q_ in range(p + 1, n):
                apq = a[p * n + q_]
                if fabs(apq) <= 1e-18 * scale:
                    a[p * n + q_] = 0.0
                    a[q_ * n + p] = 0.0
                    continue
                theta = (a[q_ * n + q_] - a[p * n + p]) / (2.0 * apq)
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s_ = t * c
                app = a[p * n + p]
                aqq = a[q_ * n + q_]
                a[p * n + p] = app - t * apq
                a[q_ * n + q_] = aqq + t * apq
                a[p * n + q_] = 0.0
                a[q_ * n + p] = 0.0
                for i in range(n):
                    if i != p and i != q_:
                        aip = a[i * n + p]
                        aiq = a[i * n + q_]
                        a[i * n + p] = c * aip - s_ * aiq
                        a[p * n + i] = a[i * n + p]
                        a[i * n + q_] = s_ * aip + c * aiq
                        a[q_ * n + i] = a[i * n + q_]
                if want_vectors:
                    for i in range(n):
                        vip = v[i, p]
                        viq = v[i, q_]
                        v[i, p] = c * vip - s_ * viq
                        v[i, q_] = s_ * vip + c * viq
    w = [a[i * n + i] for i in range(n)]
    order = sorted(range(n), key=lambda k: w[k])
    w_sorted = [w[k] for k in order]
    if not want_vectors:
        return w_sorted, None
    v_np = np.asarray(v)
    v_sorted = v_np[:, order]
    return w_sorted, v_sorted.tolist()


def eig4(a_flat):
    cdef double a[16]
    cdef double c[4]
    cdef double complex roots[4]
    cdef int i
    flat = np.array(a_flat, dtype=np.float64).ravel()
    for i in range(16):
        a[i] = flat[i]
    _char_poly4(a, c)
    _quartic_roots(c[0], c[1], c[2], c[3], roots)
    return [roots[0], roots[1], roots[2], roots[3]]


def quartic_roots(double c1, double c2, double c3, double c4):
    cdef double complex roots[4]
    _quartic_roots(c1, c2, c3, c4, roots)
    return [roots[0], roots[1], roots[2], roots[3]]


def lu_solve(a_flat, b, int n):
    cdef double[::1] a = np.array(a_flat, dtype=np.float64).ravel().copy()
    cdef double[::1] x = np.array(b, dtype=np.float64).ravel().copy()
    if _lu_solve(&a[0], &x[0], n) != 0:
        return None
    return list(x)


def lyap_solve_4(a_flat, q_flat):
    cdef double a[16]
    cdef double q[16]
    cdef double s[16]
    cdef int i
    fa = np.array(a_flat, dtype=np.float64).ravel()
    fq = np.array(q_flat, dtype=np.float64).ravel()
    for i in range(16):
        a[i] = fa[i]
        q[i] = fq[i]
    if _lyap_solve4(a, q, s) != 0:
        return None
    return [s[i] for i in range(16)]
