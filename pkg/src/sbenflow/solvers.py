"""Matrix-free conjugate gradient for the periodic elliptic solves."""

from __future__ import annotations

import numpy as np


class SolverConvergenceError(RuntimeError):
    """Iterative solve failed to reach the requested residual."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative residual {achieved:.3e})")
        self.achieved = achieved


def conjugate_gradient(apply_a, b: np.ndarray, *, tol: float, max_iter: int,
                       label: str = "conjugate gradient") -> np.ndarray:
    """Solve A x = b for symmetric positive (semi)definite matrix-free A.

    b must lie in the range of A; starting from x0 = 0 every Krylov vector
    stays in that subspace, so singular-but-consistent systems are fine.
    Convergence is ||b - A x|| <= tol * ||b||.
    """
    b = np.asarray(b, dtype=float)
    bnorm = np.sqrt(np.vdot(b, b).real)
    if bnorm == 0.0:
        return np.zeros_like(b)

    x = np.zeros_like(b)
    r = b.copy()
    d = r.copy()
    rr = np.vdot(r, r).real

    for _ in range(max_iter):
        if np.sqrt(rr) <= tol * bnorm:
            return x
        q = apply_a(d)
        dq = np.vdot(d, q).real
        if dq <= 0.0:
            raise SolverConvergenceError(
                f"{label}: operator lost positivity (d.Ad = {dq:.3e})", np.sqrt(rr) / bnorm)
        alpha = rr / dq
        x += alpha * d
        r -= alpha * q
        rr_new = np.vdot(r, r).real
        d = r + (rr_new / rr) * d
        rr = rr_new

    if np.sqrt(rr) <= tol * bnorm:
        return x
    raise SolverConvergenceError(f"{label}: no convergence in {max_iter} iterations",
                                 np.sqrt(rr) / bnorm)
