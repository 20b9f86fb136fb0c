"""Periodic-grid fields and their discrete calculus.

Everything lives on a rectangular, doubly periodic grid.  The setting is a
planar slab: samples depend on (x, y) only, but vector and tensor fields
keep all three Cartesian components so that the full 3-D formulas (cross
products, deviatoric 1/3 factors) apply verbatim with d/dz == 0.

Derivatives are second-order central differences with periodic wrap,
quadrature is the periodic midpoint rule.  With this pairing the discrete
gradient is exactly minus the adjoint of the discrete divergence, which the
conjugation and projection machinery downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Component order of the symmetric tensor storage.
XX, YY, ZZ, XY, XZ, YZ = range(6)

# Off-diagonal entries count twice in contractions of symmetric tensors.
_SYM_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])


class GridMismatchError(ValueError):
    """Raised when an operation combines fields on incompatible grids."""


@dataclass(frozen=True)
class Grid2P:
    """Doubly periodic rectangular grid with nx*ny collocated cells."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs at least 4 cells per direction, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("box lengths must be positive")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def x(self) -> np.ndarray:
        """Cell-center x coordinates, shape (nx, ny)."""
        xs = (np.arange(self.nx) + 0.5) * self.dx
        return np.broadcast_to(xs[:, None], self.shape).copy()

    def y(self) -> np.ndarray:
        """Cell-center y coordinates, shape (nx, ny)."""
        ys = (np.arange(self.ny) + 0.5) * self.dy
        return np.broadcast_to(ys[None, :], self.shape).copy()


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(
            f"incompatible fields: {a.grid.nx}x{a.grid.ny} box ({a.grid.lx}, {a.grid.ly}) "
            f"vs {b.grid.nx}x{b.grid.ny} box ({b.grid.lx}, {b.grid.ly})"
        )


class _FieldOps:
    """Shared linear-space arithmetic for the field wrappers."""

    __slots__ = ()

    def __add__(self, other):
        _check_same_grid(self, other)
        return type(self)(self.grid, self.data + other.data)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return type(self)(self.grid, self.data - other.data)

    def __mul__(self, a: float):
        return type(self)(self.grid, self.data * float(a))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.grid, -self.data)

    def copy(self):
        return type(self)(self.grid, self.data.copy())


@dataclass(frozen=True)
class ScalarField(_FieldOps):
    grid: Grid2P
    data: np.ndarray  # (nx, ny)

    def __post_init__(self):
        if self.data.shape != self.grid.shape:
            raise ValueError(f"scalar data shape {self.data.shape} != grid {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid2P) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def full(cls, grid: Grid2P, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid2P, fn) -> "ScalarField":
        return cls(grid, np.asarray(fn(grid.x(), grid.y()), dtype=float))


@dataclass(frozen=True)
class VectorField(_FieldOps):
    grid: Grid2P
    data: np.ndarray  # (3, nx, ny)

    def __post_init__(self):
        if self.data.shape != (3, *self.grid.shape):
            raise ValueError(f"vector data shape {self.data.shape} != (3, {self.grid.nx}, {self.grid.ny})")

    @classmethod
    def zeros(cls, grid: Grid2P) -> "VectorField":
        return cls(grid, np.zeros((3, *grid.shape)))

    @classmethod
    def from_components(cls, grid: Grid2P, cx, cy, cz=None) -> "VectorField":
        data = np.zeros((3, *grid.shape))
        data[0] = cx
        data[1] = cy
        if cz is not None:
            data[2] = cz
        return cls(grid, data)

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i].copy())


@dataclass(frozen=True)
class SymTensorField(_FieldOps):
    """Symmetric tensor with the six independent components xx, yy, zz, xy, xz, yz."""

    grid: Grid2P
    data: np.ndarray  # (6, nx, ny)

    def __post_init__(self):
        if self.data.shape != (6, *self.grid.shape):
            raise ValueError(f"tensor data shape {self.data.shape} != (6, {self.grid.nx}, {self.grid.ny})")

    @classmethod
    def zeros(cls, grid: Grid2P) -> "SymTensorField":
        return cls(grid, np.zeros((6, *grid.shape)))

    def trace(self) -> ScalarField:
        return ScalarField(self.grid, self.data[XX] + self.data[YY] + self.data[ZZ])


@dataclass(frozen=True)
class Tensor33Field(_FieldOps):
    """Full 3x3 tensor; entry [i, j] holds the j-derivative of component i."""

    grid: Grid2P
    data: np.ndarray  # (3, 3, nx, ny)

    def __post_init__(self):
        if self.data.shape != (3, 3, *self.grid.shape):
            raise ValueError(f"tensor data shape {self.data.shape} != (3, 3, {self.grid.nx}, {self.grid.ny})")

    @classmethod
    def zeros(cls, grid: Grid2P) -> "Tensor33Field":
        return cls(grid, np.zeros((3, 3, *grid.shape)))


# --- central differences -------------------------------------------------

def _ddx(grid: Grid2P, a: np.ndarray) -> np.ndarray:
    return (np.roll(a, -1, axis=-2) - np.roll(a, 1, axis=-2)) / (2.0 * grid.dx)


def _ddy(grid: Grid2P, a: np.ndarray) -> np.ndarray:
    return (np.roll(a, -1, axis=-1) - np.roll(a, 1, axis=-1)) / (2.0 * grid.dy)


def grad_scalar(s: ScalarField) -> VectorField:
    """Gradient of a scalar; the out-of-plane component is identically zero."""
    g = np.zeros((3, *s.grid.shape))
    g[0] = _ddx(s.grid, s.data)
    g[1] = _ddy(s.grid, s.data)
    return VectorField(s.grid, g)


def grad_vector(v: VectorField) -> Tensor33Field:
    """Jacobian of a vector field: entry [i, j] = d v_i / d x_j (j = z column is zero)."""
    j = np.zeros((3, 3, *v.grid.shape))
    j[:, 0] = _ddx(v.grid, v.data)
    j[:, 1] = _ddy(v.grid, v.data)
    return Tensor33Field(v.grid, j)


def div_vector(v: VectorField) -> ScalarField:
    return ScalarField(v.grid, _ddx(v.grid, v.data[0]) + _ddy(v.grid, v.data[1]))


def div_tensor(t: SymTensorField) -> VectorField:
    """Row-wise divergence of a symmetric tensor field."""
    g = t.grid
    out = np.zeros((3, *g.shape))
    out[0] = _ddx(g, t.data[XX]) + _ddy(g, t.data[XY])
    out[1] = _ddx(g, t.data[XY]) + _ddy(g, t.data[YY])
    out[2] = _ddx(g, t.data[XZ]) + _ddy(g, t.data[YZ])
    return VectorField(g, out)


def curl(v: VectorField) -> VectorField:
    g = v.grid
    out = np.zeros((3, *g.shape))
    out[0] = _ddy(g, v.data[2])
    out[1] = -_ddx(g, v.data[2])
    out[2] = _ddx(g, v.data[1]) - _ddy(g, v.data[0])
    return VectorField(g, out)


def laplacian(v: VectorField) -> VectorField:
    """Componentwise Laplacian, built as div(grad) so it pairs exactly with the stencils above."""
    g = v.grid
    return VectorField(g, _ddx(g, _ddx(g, v.data)) + _ddy(g, _ddy(g, v.data)))


def laplacian_scalar(s: ScalarField) -> ScalarField:
    g = s.grid
    return ScalarField(g, _ddx(g, _ddx(g, s.data)) + _ddy(g, _ddy(g, s.data)))


def sym_grad(v: VectorField) -> SymTensorField:
    """Symmetric velocity gradient D = (grad v + (grad v)^T) / 2."""
    g = v.grid
    dvx_dx = _ddx(g, v.data[0])
    dvy_dy = _ddy(g, v.data[1])
    out = np.zeros((6, *g.shape))
    out[XX] = dvx_dx
    out[YY] = dvy_dy
    out[XY] = 0.5 * (_ddy(g, v.data[0]) + _ddx(g, v.data[1]))
    out[XZ] = 0.5 * _ddx(g, v.data[2])
    out[YZ] = 0.5 * _ddy(g, v.data[2])
    return SymTensorField(g, out)


# --- pointwise algebra ----------------------------------------------------

def advect(a: VectorField, b: VectorField) -> VectorField:
    """(a . grad) b."""
    _check_same_grid(a, b)
    g = a.grid
    return VectorField(g, a.data[0] * _ddx(g, b.data) + a.data[1] * _ddy(g, b.data))


def div_outer(a: VectorField, b: VectorField) -> VectorField:
    """Divergence of the outer product: component i is sum_j d_j (a_j b_i).

    Exact discrete adjoint of -advect(a, .) on periodic grids.
    """
    _check_same_grid(a, b)
    g = a.grid
    return VectorField(g, _ddx(g, a.data[0] * b.data) + _ddy(g, a.data[1] * b.data))


def cross(a: VectorField, b: VectorField) -> VectorField:
    _check_same_grid(a, b)
    ax, ay, az = a.data
    bx, by, bz = b.data
    out = np.empty((3, *a.grid.shape))
    out[0] = ay * bz - az * by
    out[1] = az * bx - ax * bz
    out[2] = ax * by - ay * bx
    return VectorField(a.grid, out)


def jac_dot(j: Tensor33Field, v: VectorField) -> VectorField:
    """(v . grad) applied through a precomputed Jacobian: component i is sum_j J[i,j] v_j."""
    _check_same_grid(j, v)
    return VectorField(v.grid, np.einsum("ij...,j...->i...", j.data, v.data))


def jac_transpose_dot(j: Tensor33Field, v: VectorField) -> VectorField:
    """Component i is sum_j v_j J[j,i] (contraction leaving the derivative index free)."""
    _check_same_grid(j, v)
    return VectorField(v.grid, np.einsum("ji...,j...->i...", j.data, v.data))


def scalar_times_vector(s: ScalarField, v: VectorField) -> VectorField:
    _check_same_grid(s, v)
    return VectorField(v.grid, s.data[None, :, :] * v.data)


def dot_vectors(a: VectorField, b: VectorField) -> ScalarField:
    _check_same_grid(a, b)
    return ScalarField(a.grid, np.einsum("i...,i...->...", a.data, b.data))


# --- quadrature -----------------------------------------------------------

def integrate(s: ScalarField) -> float:
    """Midpoint-rule integral over the periodic box (per unit slab depth)."""
    return float(s.data.sum() * s.grid.cell_area)


def inner(u: VectorField, w: VectorField) -> float:
    """L2 pairing of two vector fields over the box."""
    _check_same_grid(u, w)
    return float((u.data * w.data).sum() * u.grid.cell_area)


def tensor_inner(s: SymTensorField, t: SymTensorField) -> float:
    """Full contraction sum_ij S_ij T_ij integrated over the box."""
    _check_same_grid(s, t)
    prod = (s.data * t.data * _SYM_WEIGHTS[:, None, None]).sum()
    return float(prod * s.grid.cell_area)


def l2_norm(v) -> float:
    if isinstance(v, VectorField):
        return np.sqrt(max(inner(v, v), 0.0))
    return np.sqrt(max(integrate(ScalarField(v.grid, v.data**2)), 0.0))


def linf_norm(v) -> float:
    return float(np.abs(v.data).max())


# --- null modes of the central-difference stencils -------------------------

def component_means(v: VectorField) -> np.ndarray:
    return v.data.mean(axis=(-2, -1))


def remove_mean(v: VectorField) -> VectorField:
    return VectorField(v.grid, v.data - component_means(v)[:, None, None])


def _null_patterns(grid: Grid2P):
    """Orthogonal basis of the central-difference null space (constants and,
    on even-sized grids, the odd-even checkerboards)."""
    ones = np.ones(grid.shape)
    pats = [ones]
    sx = np.where(np.arange(grid.nx) % 2 == 0, 1.0, -1.0)[:, None]
    sy = np.where(np.arange(grid.ny) % 2 == 0, 1.0, -1.0)[None, :]
    if grid.nx % 2 == 0:
        pats.append(ones * sx)
    if grid.ny % 2 == 0:
        pats.append(ones * sy)
    if grid.nx % 2 == 0 and grid.ny % 2 == 0:
        pats.append(sx * sy)
    return pats


def remove_stencil_null(v: VectorField) -> VectorField:
    """Project out all grid modes annihilated by the central-difference operators."""
    data = v.data.copy()
    n = v.grid.nx * v.grid.ny
    for pat in _null_patterns(v.grid):
        coeff = (data * pat).sum(axis=(-2, -1)) / n
        data -= coeff[:, None, None] * pat
    return VectorField(v.grid, data)


def remove_stencil_null_scalar(s: ScalarField) -> ScalarField:
    data = s.data.copy()
    n = s.grid.nx * s.grid.ny
    for pat in _null_patterns(s.grid):
        data -= ((data * pat).sum() / n) * pat
    return ScalarField(s.grid, data)
