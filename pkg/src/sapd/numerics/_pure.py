"""Pure-Python kernels: Jacobi eigensolver, 4x4 eigenvalues, pivoted LU,
discrete Lyapunov solves and the (tau, sigma, theta) grid scan.

Same contracts as the compiled backend in ``_core.pyx``; this module is the
fallback used when the extension is unavailable (or forced via SAPD_BACKEND).
Everything here is hand-rolled on Python floats so the two backends can be
cross-checked value for value.
"""

import cmath
import math

BACKEND_NAME = "pure"

_JACOBI_SWEEPS = 60
_DK_ITERS = 200


def jacobi_eig(a_flat, n, want_vectors):
    """Cyclic Jacobi on a symmetric n x n matrix (row-major flat list).

    Returns (eigenvalues ascending, eigenvector columns row-major or None).
    """
    a = [list(a_flat[i * n:(i + 1) * n]) for i in range(n)]
    # symmetrize exactly; callers pass symmetric input but rounding in the
    # packed representation must not leak into the rotations
    for i in range(n):
        for j in range(i):
            v = 0.5 * (a[i][j] + a[j][i])
            a[i][j] = v
            a[j][i] = v
    v = None
    if want_vectors:
        v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    scale = math.sqrt(sum(a[i][j] * a[i][j] for i in range(n) for j in range(n)))
    if scale == 0.0:
        w = [0.0] * n
        return w, ([row[:] for row in v] if want_vectors else None)
    tol = 1e-15 * scale
    for _ in range(_JACOBI_SWEEPS):
        off = math.sqrt(sum(a[p][q] * a[p][q] for p in range(n) for q in range(p + 1, n)) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= 1e-18 * scale:
                    a[p][q] = a[q][p] = 0.0
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app = a[p][p]
                aqq = a[q][q]
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i][p]
                        aiq = a[i][q]
                        a[i][p] = a[p][i] = c * aip - s * aiq
                        a[i][q] = a[q][i] = s * aip + c * aiq
                if want_vectors:
                    for i in range(n):
                        vip = v[i][p]
                        viq = v[i][q]
                        v[i][p] = c * vip - s * viq
                        v[i][q] = s * vip + c * viq
    w = [a[i][i] for i in range(n)]
    order = sorted(range(n), key=lambda i: w[i])
    w_sorted = [w[i] for i in order]
    if not want_vectors:
        return w_sorted, None
    v_sorted = [[v[i][order[j]] for j in range(n)] for i in range(n)]
    return w_sorted, v_sorted


def _char_poly4(a):
    """Coefficients (c1..c4) of det(lambda I - A) = l^4 + c1 l^3 + ... + c4."""
    def m2(i, j):
        return a[i][i] * a[j][j] - a[i][j] * a[j][i]

    def m3(i, j, k):
        return (a[i][i] * (a[j][j] * a[k][k] - a[j][k] * a[k][j])
                - a[i][j] * (a[j][i] * a[k][k] - a[j][k] * a[k][i])
                + a[i][k] * (a[j][i] * a[k][j] - a[j][j] * a[k][i]))

    c1 = -(a[0][0] + a[1][1] + a[2][2] + a[3][3])
    c2 = (m2(0, 1) + m2(0, 2) + m2(0, 3) + m2(1, 2) + m2(1, 3) + m2(2, 3))
    c3 = -(m3(0, 1, 2) + m3(0, 1, 3) + m3(0, 2, 3) + m3(1, 2, 3))
    # det via expansion on the first row of the 4x4
    det = 0.0
    sign = 1.0
    for j in range(4):
        rows = [1, 2, 3]
        cols = [c for c in range(4) if c != j]
        sub = (a[rows[0]][cols[0]] * (a[rows[1]][cols[1]] * a[rows[2]][cols[2]]
                                      - a[rows[1]][cols[2]] * a[rows[2]][cols[1]])
               - a[rows[0]][cols[1]] * (a[rows[1]][cols[0]] * a[rows[2]][cols[2]]
                                        - a[rows[1]][cols[2]] * a[rows[2]][cols[0]])
               + a[rows[0]][cols[2]] * (a[rows[1]][cols[0]] * a[rows[2]][cols[1]]
                                        - a[rows[1]][cols[1]] * a[rows[2]][cols[0]]))
        det += sign * a[0][j] * sub
        sign = -sign
    return c1, c2, c3, det


def quartic_roots(c1, c2, c3, c4):
    """Roots of z^4 + c1 z^3 + c2 z^2 + c3 z + c4 (Durand-Kerner + Newton)."""
    def p(z):
        return (((z + c1) * z + c2) * z + c3) * z + c4

    def dp(z):
        return ((4.0 * z + 3.0 * c1) * z + 2.0 * c2) * z + c3

    r = 1.0 + max(abs(c1), abs(c2), abs(c3), abs(c4))
    z = [r * cmath.exp(1j * (0.4 + 2.0 * math.pi * k / 4.0)) for k in range(4)]
    for _ in range(_DK_ITERS):
        moved = 0.0
        for k in range(4):
            d = complex(1.0, 0.0)
            for j in range(4):
                if j != k:
                    d *= (z[k] - z[j])
            if d == 0:
                d = complex(1e-60, 0.0)
            step = p(z[k]) / d
            z[k] -= step
            moved = max(moved, abs(step))
        if moved <= 1e-15 * r:
            break
    for k in range(4):
        for _ in range(2):
            d = dp(z[k])
            if abs(d) > 1e-30:
                z[k] -= p(z[k]) / d
    return z


def eig4(a_flat):
    """Eigenvalues of a real 4x4 (row-major flat list) as 4 complex numbers."""
    a = [list(a_flat[i * 4:(i + 1) * 4]) for i in range(4)]
    c1, c2, c3, c4 = _char_poly4(a)
    return quartic_roots(c1, c2, c3, c4)


def lu_solve(a_flat, b, n):
    """Solve A x = b by partially pivoted elimination; None if singular."""
    a = [list(a_flat[i * n:(i + 1) * n]) for i in range(n)]
    x = list(b)
    amax = max((abs(v) for row in a for v in row), default=0.0)
    piv_tol = 1e-14 * max(amax, 1e-300)
    perm = list(range(n))
    for col in range(n):
        pk = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pk][col]) <= piv_tol:
            return None
        if pk != col:
            a[col], a[pk] = a[pk], a[col]
            x[col], x[pk] = x[pk], x[col]
            perm[col], perm[pk] = perm[pk], perm[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f != 0.0:
                a[r][col] = 0.0
                for c in range(col + 1, n):
                    a[r][c] -= f * a[col][c]
                x[r] -= f * x[col]
    for r in range(n - 1, -1, -1):
        s = x[r]
        for c in range(r + 1, n):
            s -= a[r][c] * x[c]
        x[r] = s / a[r][r]
    return x


def lyap_solve_4(a_flat, q_flat):
    """S solving S = A S A^T + Q for 4x4 A, Q via the 16x16 vectorized system.

    Returns S row-major (flat list) or None if (I - A (x) A) is singular.
    """
    m = [0.0] * 256
    for i in range(4):
        for j in range(4):
            row = 4 * i + j
            for k in range(4):
                aik = a_flat[4 * i + k]
                for l in range(4):
                    m[16 * row + 4 * k + l] = -aik * a_flat[4 * j + l]
            m[16 * row + row] += 1.0
    return lu_solve(m, list(q_flat), 16)


def _fill_block(lam, tau, sigma, theta, mu_x, mu_y, a, b):
    """Per-eigenvalue 4x4 recursion matrix and noise-input matrix (flat)."""
    ax = 1.0 / (1.0 + tau * mu_x)
    ay = 1.0 / (1.0 + sigma * mu_y)
    axy = ax * ay
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


def _block_rho(a):
    roots = eig4(a)
    return max(abs(z) for z in roots)


def _bbt(b, q):
    for i in range(16):
        q[i] = 0.0
    for i in range(2):
        for j in range(2):
            s = 0.0
            for k in range(4):
                s += b[4 * i + k] * b[4 * j + k]
            q[4 * i + j] = s


STABILITY_CUTOFF = 1.0 - 1e-10


def point_rho_j(lams, tau, sigma, theta, mu_x, mu_y, want_j):
    """(rho_true, J) for one parameter point; J is NaN when unstable/skipped."""
    a = [0.0] * 16
    b = [0.0] * 16
    q = [0.0] * 16
    rho_a = 0.0
    for lam in lams:
        _fill_block(lam, tau, sigma, theta, mu_x, mu_y, a, b)
        r = _block_rho(a)
        if r > rho_a:
            rho_a = r
    rho_t = rho_a * rho_a
    if not want_j or rho_a >= STABILITY_CUTOFF:
        return rho_t, float("nan")
    tr_sum = 0.0
    for lam in lams:
        _fill_block(lam, tau, sigma, theta, mu_x, mu_y, a, b)
        _bbt(b, q)
        s = lyap_solve_4(a, q)
        if s is None:
            return rho_t, float("nan")
        tr_sum += s[0] + s[5] + s[10] + s[15]
    return rho_t, tr_sum / (2.0 * len(lams))


def scan_grid(lams, taus, sigmas, thetas, mu_x, mu_y, want_j, threads=1):
    """Dense scan over the (tau, sigma, theta) grid.

    Returns (rho_true flat list, J flat list, unstable count); the flat index
    is ((i_tau * n_sigma) + i_sigma) * n_theta + i_theta.
    """
    n = len(taus) * len(sigmas) * len(thetas)
    rho_out = [0.0] * n
    j_out = [float("nan")] * n
    unstable = 0
    idx = 0
    for tau in taus:
        for sigma in sigmas:
            for theta in thetas:
                r, jv = point_rho_j(lams, tau, sigma, theta, mu_x, mu_y, want_j)
                rho_out[idx] = r
                j_out[idx] = jv
                if r >= STABILITY_CUTOFF * STABILITY_CUTOFF or r >= 1.0:
                    unstable += 1
                idx += 1
    return rho_out, j_out, unstable
