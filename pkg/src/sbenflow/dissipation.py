"""Convex dissipation potential, viscous stress and Fenchel conjugation.

The dissipation density is the quadratic

    W(D) = mu [ Tr(D^2) - (1/3) (Tr D)^2 ],

whose stress gradient is the traceless sigma = 2 mu (D - Tr(D) I / 3): pure
dilatation does not dissipate.  The induced elliptic operator

    K(v) = -div( sigma(sym_grad(v)) )

is symmetric positive semidefinite in the discrete calculus with
<K(u), u> = 2 phi(u) exactly.  On the torus K annihilates constants (and the
stencil checkerboards), so conjugation works on mean-free representatives:
phi_star(f) is finite only for zero-mean f and is evaluated as the
dissipation of K^(-1) f, computed matrix-free by conjugate gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields as fd
from .fields import ScalarField, SymTensorField, VectorField, XX, YY, ZZ
from .solvers import conjugate_gradient


class NonZeroMeanError(ValueError):
    """f outside the range of K: a nonzero-mean forcing has no preimage on the torus."""


@dataclass(frozen=True)
class Viscosity:
    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("dynamic viscosity must be positive")


@dataclass(frozen=True)
class ConjugateSolve:
    """Settings for the K^(-1) conjugate-gradient solves."""

    tol: float = 1e-10
    max_iter: int = 50_000
    mean_projection: bool = True  # always on; kept explicit in the contract


def w_density(d: SymTensorField, mu: float) -> ScalarField:
    """Pointwise dissipation density W(D) >= 0."""
    sq = np.einsum("c...,c...,c->...", d.data, d.data, fd._SYM_WEIGHTS)
    tr = d.data[XX] + d.data[YY] + d.data[ZZ]
    return ScalarField(d.grid, mu * (sq - tr**2 / 3.0))


def sigma_i(d: SymTensorField, mu: float) -> SymTensorField:
    """Viscous stress 2 mu (D - Tr(D) I / 3); traceless by construction."""
    out = 2.0 * mu * d.data.copy()
    tr = d.data[XX] + d.data[YY] + d.data[ZZ]
    for c in (XX, YY, ZZ):
        out[c] -= 2.0 * mu * tr / 3.0
    return SymTensorField(d.grid, out)


def phi(v: VectorField, mu: float) -> float:
    """Dissipation functional: integral of W over the box. Zero iff v is constant."""
    return fd.integrate(w_density(fd.sym_grad(v), mu))


def apply_k(v: VectorField, mu: float) -> VectorField:
    """K(v) = -div(sigma(sym_grad v)); zero-mean output for any input."""
    return -fd.div_tensor(sigma_i(fd.sym_grad(v), mu))


def _check_zero_mean(f: VectorField, cfg: ConjugateSolve):
    means = fd.component_means(f)
    scale = float(np.abs(f.data).max())
    if scale == 0.0:
        return
    if np.abs(means).max() > 1e-8 * scale:
        raise NonZeroMeanError(
            f"f outside range of K: component means {means} exceed 1e-8 of the field scale")


def solve_k(f: VectorField, mu: float, cfg: ConjugateSolve) -> VectorField:
    """Mean-free v with K(v) = f, by conjugate gradient on the mean-free subspace.

    The right-hand side is first projected onto the range of the discrete K
    (strips component means and the checkerboard stencil modes).
    """
    _check_zero_mean(f, cfg)
    rhs = fd.remove_stencil_null(f)
    grid = f.grid

    def matvec(flat: np.ndarray) -> np.ndarray:
        v = VectorField(grid, flat.reshape(3, grid.nx, grid.ny))
        return apply_k(v, mu).data.ravel()

    sol = conjugate_gradient(matvec, rhs.data.ravel(), tol=cfg.tol,
                             max_iter=cfg.max_iter, label="viscous conjugate solve")
    v = VectorField(grid, sol.reshape(3, grid.nx, grid.ny))
    return fd.remove_mean(v)


def phi_star(f: VectorField, mu: float, cfg: ConjugateSolve) -> float:
    """Fenchel polar of phi for zero-mean f: the dissipation of K^(-1) f."""
    return phi(solve_k(f, mu, cfg), mu)


def fenchel_gap(v: VectorField, f: VectorField, mu: float, cfg: ConjugateSolve) -> float:
    """phi(v) + phi_star(f) - <f, v>; nonnegative, zero iff f = K(v) mod constants."""
    return phi(v, mu) + phi_star(f, mu, cfg) - fd.inner(f, v)
