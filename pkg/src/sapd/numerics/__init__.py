"""Small dense linear algebra built on two interchangeable backends.

The compiled extension (``sapd.numerics._core``, Cython + OpenMP) carries the
hot kernels: 4x4 eigenvalues, 16x16 pivoted solves for discrete Lyapunov
equations, and the fused (tau, sigma, theta) grid scan.  A hand-rolled
pure-Python twin (``_pure``) is selected at import when the extension is
missing, or when ``SAPD_BACKEND=pure`` is set.  ``benchmarks/bench_kernels.py``
compares the two.

Public operations: ``sym_eigen`` (cyclic Jacobi), ``psd_margin``, ``eig4``,
``solve_linear`` (partially pivoted elimination), ``spectral_norm`` (power
iteration on M^T M).
"""

import os

import numpy as np

from . import _pure

_choice = os.environ.get("SAPD_BACKEND", "").strip().lower()
if _choice not in ("", "pure", "compiled"):
    raise ValueError(f"SAPD_BACKEND must be 'pure' or 'compiled', got {_choice!r}")

if _choice == "pure":
    kernels = _pure
else:
    try:
        from . import _core as kernels
    except ImportError:
        if _choice == "compiled":
            raise
        kernels = _pure

BACKEND = kernels.BACKEND_NAME
STABILITY_CUTOFF = _pure.STABILITY_CUTOFF

__all__ = [
    "BACKEND", "SymMatrix", "SingularSystemError", "sym_eigen", "psd_margin",
    "eig4", "solve_linear", "spectral_norm", "kernels",
]


class SingularSystemError(ValueError):
    """Pivot below tolerance in solve_linear (upstream: rho(A) >= 1)."""


class SymMatrix:
    """Symmetric matrix of order <= 8, packed upper triangle.

    Symmetry is exact by construction: only the upper triangle is stored and
    ``to_dense`` mirrors it.
    """

    MAX_ORDER = 8

    def __init__(self, n, packed):
        if not (1 <= n <= self.MAX_ORDER):
            raise ValueError(f"SymMatrix order must be in [1, {self.MAX_ORDER}], got {n}")
        packed = np.asarray(packed, dtype=float)
        if packed.shape != (n * (n + 1) // 2,):
            raise ValueError("packed length does not match order")
        if not np.all(np.isfinite(packed)):
            raise ValueError("SymMatrix entries must be finite")
        self.n = n
        self.packed = packed

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix")
        n = a.shape[0]
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(a).max(initial=0.0)))):
            raise ValueError("matrix is not symmetric")
        iu = np.triu_indices(n)
        return cls(n, a[iu])

    def to_dense(self):
        a = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n)
        a[iu] = self.packed
        a.T[iu] = self.packed
        return a

    def __repr__(self):
        return f"SymMatrix(n={self.n})"


def _as_sym_dense(m, max_order=None):
    if isinstance(m, SymMatrix):
        return m.to_dense()
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if max_order is not None and a.shape[0] > max_order:
        raise ValueError(f"matrix order {a.shape[0]} exceeds {max_order}")
    return a


def sym_eigen(m, vectors=False):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi.

    ``m`` is a SymMatrix or a dense symmetric array of any small order (the
    certificate path uses orders <= 5; the quadratic-problem path feeds d x d
    coupling matrices).  With ``vectors=True`` also returns the orthogonal V
    with columns in eigenvalue order.
    """
    a = _as_sym_dense(m)
    n = a.shape[0]
    w, v = kernels.jacobi_eig(a.ravel().tolist(), n, bool(vectors))
    w = np.asarray(w, dtype=float)
    if not vectors:
        return w
    return w, np.asarray(v, dtype=float)


def psd_margin(m):
    """Smallest eigenvalue; the caller applies the scale-aware tolerance."""
    return float(sym_eigen(m)[0])


def eig4(m):
    """The four eigenvalues (complex) of a real 4x4 matrix."""
    a = np.asarray(m, dtype=float)
    if a.shape != (4, 4):
        raise ValueError("eig4 expects a 4x4 matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return np.asarray(kernels.eig4(a.ravel().tolist()), dtype=complex)


def solve_linear(a, b):
    """Solve A x = b (A square, order <= 16) by partially pivoted elimination."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    if n > 16:
        raise ValueError("solve_linear is limited to order <= 16")
    if b.shape != (n,):
        raise ValueError("right-hand side has wrong length")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("entries must be finite")
    x = kernels.lu_solve(a.ravel().tolist(), b.tolist(), n)
    if x is None:
        raise SingularSystemError("singular system (pivot below 1e-14 * ||A||)")
    return np.asarray(x, dtype=float)


def spectral_norm(m, tol=1e-10, max_iters=10**4):
    """||M||_2 by power iteration on M^T M with a Rayleigh stopping rule."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    n = m.shape[1]
    if n == 0 or m.shape[0] == 0 or not np.any(m):
        return 0.0
    # deterministic start with a mild ramp so no eigenvector is orthogonal by symmetry
    v = 1.0 + np.arange(n) / max(n, 1)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = m.T @ (m @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        lam_new = float(v_new @ (m.T @ (m @ v_new)))
        if abs(lam_new - lam) <= tol * max(lam_new, 1e-300):
            lam = lam_new
            break
        lam = lam_new
        v = v_new
    return float(np.sqrt(max(lam, 0.0)))
