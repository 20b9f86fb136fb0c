"""Space-time functional for viscous flow paths and its minimization.

For a time-sampled velocity path the functional accumulates, per interval,

    phi(v) + phi_star(f) + pairing,      f = -(rho Dv/Dt) + rho (g - 2 Omega x v)

with everything evaluated at the interval midpoint.  The conjugate argument
is divergence-projected and mean-projected before conjugation (for the
incompressible kind that projection is the definition of the discrete
functional: the pressure gradient is exactly the part it removes, and it is
recovered afterwards as the multiplier of the constraint).  The pairing term
integrates [rho Dv/Dt + grad p - rho g] . v; the Coriolis force does no work
and therefore appears inside the conjugate only.

Each interval term is a Fenchel gap, so the total is nonnegative and
vanishes exactly on trajectories of the viscous flow equations.  The
minimizer is a matrix-free nonlinear conjugate gradient with Armijo
backtracking, restricted to the divergence-free affine subspace with the
initial state pinned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fields as fd
from .balance import BarotropicPowerEos, Eos, FluidState, IncompressibleEos
from .dissipation import ConjugateSolve, apply_k, phi, solve_k
from .fields import Grid2P, ScalarField, VectorField
from .gravitation import Gravitation
from .solvers import conjugate_gradient


# --- divergence-free projection --------------------------------------------

def leray_project(v: VectorField, tol: float = 1e-12,
                  max_iter: int = 50_000) -> tuple[VectorField, ScalarField]:
    """Split v = v_df + grad(q) with div(v_df) = 0 on the periodic grid.

    The Poisson operator is the composition div(grad(.)), so the projector
    is exactly idempotent and the divergence of the output equals the solver
    residual.  Means pass through untouched.
    """
    grid = v.grid
    # the divergence is orthogonal to the stencil null modes in exact
    # arithmetic; strip their round-off remnants so the system stays in range
    rhs = -fd.remove_stencil_null_scalar(fd.div_vector(v)).data.ravel()

    # an already divergence-free input leaves only round-off in the RHS,
    # and the projector is then the identity
    div_scale = np.sqrt((v.data**2).sum()) * max(1.0 / grid.dx, 1.0 / grid.dy)
    if np.sqrt((rhs**2).sum()) <= 3e-12 * div_scale:
        return v, ScalarField.zeros(grid)

    def neg_laplace(flat: np.ndarray) -> np.ndarray:
        s = ScalarField(grid, flat.reshape(grid.shape))
        return -fd.laplacian_scalar(s).data.ravel()

    q_flat = conjugate_gradient(neg_laplace, rhs, tol=tol, max_iter=max_iter,
                                label="pressure Poisson solve")
    q = ScalarField(grid, q_flat.reshape(grid.shape))
    return v - fd.grad_scalar(q), q


# --- paths ------------------------------------------------------------------

@dataclass
class Path:
    """Uniformly sampled sequence of states over [0, T]; the first is pinned.

    For the incompressible kind every slice is divergence free and the
    density is the constant rho0; for the compressible kind the densities
    ride along with the velocities (slaved to the mass balance when the path
    is produced by slave_density or the reference steppers)."""

    states: list[FluidState]
    pressures: Optional[list[ScalarField]] = None  # per interval, incompressible only

    def __post_init__(self):
        if len(self.states) < 2:
            raise ValueError("a path needs at least two time samples")
        grid = self.states[0].grid
        eos = self.states[0].eos
        dts = np.diff([s.t for s in self.states])
        if np.any(dts <= 0):
            raise ValueError("path times must be strictly increasing")
        if np.abs(dts - dts[0]).max() > 1e-10 * dts[0]:
            raise ValueError("path requires uniform time steps")
        for s in self.states:
            if s.grid != grid or s.eos != eos:
                raise ValueError("all path states must share one grid and one EOS")

    @property
    def grid(self) -> Grid2P:
        return self.states[0].grid

    @property
    def eos(self) -> Eos:
        return self.states[0].eos

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def dt(self) -> float:
        return self.states[1].t - self.states[0].t

    @property
    def n_intervals(self) -> int:
        return len(self.states) - 1

    @property
    def kind(self) -> str:
        return "incompressible" if isinstance(self.eos, IncompressibleEos) else "compressible"

    def velocities(self) -> list[VectorField]:
        return [s.v for s in self.states]

    def with_velocities(self, new_free: list[VectorField]) -> "Path":
        """Same path with the free slices (k >= 1) replaced; densities kept."""
        if len(new_free) != self.n_intervals:
            raise ValueError("need one velocity per free slice")
        states = [self.states[0]]
        for s, v in zip(self.states[1:], new_free):
            states.append(FluidState(s.t, v, s.rho, s.eos))
        return Path(states)


def incompressible_path(grid: Grid2P, eos: IncompressibleEos, times,
                        velocities: list[VectorField]) -> Path:
    rho = ScalarField.full(grid, eos.rho0)
    states = [FluidState(float(t), v, rho, eos) for t, v in zip(times, velocities)]
    return Path(states)


def slave_density(rho_initial: ScalarField, velocities: list[VectorField],
                  times, eos: BarotropicPowerEos,
                  tol: float = 1e-13, max_iter: int = 500) -> list[ScalarField]:
    """March the discrete mass balance: each new density solves
    (rho_next - rho_prev)/dt + div(rho_mid v_mid) = 0 (implicit midpoint,
    fixed-point iteration).  Conservative form: total mass is exact."""
    densities = [rho_initial]
    for k in range(len(velocities) - 1):
        dt = float(times[k + 1] - times[k])
        v_mid = 0.5 * (velocities[k] + velocities[k + 1])
        rho_prev = densities[-1]
        rho_next = rho_prev.copy()
        scale = float(np.abs(rho_prev.data).max())
        for _ in range(max_iter):
            rho_mid = 0.5 * (rho_prev + rho_next)
            update = rho_prev - dt * fd.div_vector(fd.scalar_times_vector(rho_mid, v_mid))
            delta = float(np.abs(update.data - rho_next.data).max())
            rho_next = update
            if delta <= tol * scale:
                break
        else:
            raise RuntimeError(f"mass-balance fixed point stalled at interval {k}")
        densities.append(rho_next)
    return densities


def compressible_path(grid: Grid2P, eos: BarotropicPowerEos, times,
                      velocities: list[VectorField],
                      densities: Optional[list[ScalarField]] = None) -> Path:
    if densities is None:
        densities = slave_density(ScalarField.full(grid, eos.rho0), velocities, times, eos)
    states = [FluidState(float(t), v, rho, eos)
              for t, v, rho in zip(times, velocities, densities)]
    return Path(states)


# --- reports ------------------------------------------------------------------

@dataclass
class SbenReport:
    """Per-interval breakdown of the functional plus minimizer bookkeeping."""

    kind: str
    midpoint_times: np.ndarray
    phi_terms: np.ndarray
    phi_star_terms: np.ndarray
    pairing_terms: np.ndarray
    ns_residual_norms: np.ndarray   # |f - K(v_mid)| per interval
    discarded_mean_norms: np.ndarray
    dt: float
    grad_norm_history: list = field(default_factory=list)
    iterations: int = 0
    wall_time: float = 0.0

    @property
    def gap_terms(self) -> np.ndarray:
        return self.phi_terms + self.phi_star_terms + self.pairing_terms

    @property
    def total_pi(self) -> float:
        return float(self.gap_terms.sum() * self.dt)

    @property
    def dissipation_integral(self) -> float:
        """Time integral of phi along the path; the natural scale of the functional."""
        return float(self.phi_terms.sum() * self.dt)

    def summary_text(self) -> str:
        lines = [
            f"kind                 : {self.kind}",
            f"intervals            : {len(self.phi_terms)} (dt = {self.dt:.6g})",
            f"total functional     : {self.total_pi:.12e}",
            f"dissipation integral : {self.dissipation_integral:.12e}",
            f"max NS residual      : {self.ns_residual_norms.max():.6e}",
            f"max discarded mean   : {self.discarded_mean_norms.max():.6e}",
            f"iterations           : {self.iterations}",
            f"wall time [s]        : {self.wall_time:.3f}",
            "",
            "  k    t_mid        phi            phi_star       pairing        gap",
        ]
        for k, t in enumerate(self.midpoint_times):
            lines.append(
                f"{k:4d}  {t:9.5f}  {self.phi_terms[k]: .6e}  {self.phi_star_terms[k]: .6e}"
                f"  {self.pairing_terms[k]: .6e}  {self.gap_terms[k]: .6e}")
        if self.grad_norm_history:
            lines.append("")
            lines.append("gradient norm history: " +
                         ", ".join(f"{g:.3e}" for g in self.grad_norm_history))
        return "\n".join(lines) + "\n"


@dataclass
class _IntervalCore:
    t_mid: float
    v_mid: VectorField
    accel: VectorField
    f_raw: VectorField      # unprojected conjugate argument
    f: VectorField          # projected conjugate argument
    u: VectorField          # K^(-1) f
    phi_v: float
    phi_star_f: float
    pairing: float
    discarded_mean: float
    ns_residual: float


def _interval_core(path: Path, k: int, mu: float, grav: Gravitation,
                   cfg: ConjugateSolve) -> _IntervalCore:
    s_prev, s_next = path.states[k], path.states[k + 1]
    dt = path.dt
    t_mid = 0.5 * (s_prev.t + s_next.t)
    v_mid = 0.5 * (s_prev.v + s_next.v)
    accel = (1.0 / dt) * (s_next.v - s_prev.v) + fd.advect(v_mid, v_mid)

    g_field = grav.gravity(t_mid)
    omega = grav.coriolis_vector(t_mid)
    incompressible = path.kind == "incompressible"

    if incompressible:
        rho0 = path.eos.rho0
        body = g_field - 2.0 * fd.cross(omega, v_mid)
        f_raw = rho0 * (-accel + body)
        pairing = rho0 * (fd.inner(accel, v_mid) - fd.inner(g_field, v_mid))
        f_div_free, _ = leray_project(f_raw)
        f = fd.remove_stencil_null(f_div_free)
    else:
        rho_mid = 0.5 * (s_prev.rho + s_next.rho)
        p_mid = ScalarField(path.grid, path.eos.pressure(rho_mid.data))
        grad_p = fd.grad_scalar(p_mid)
        body = g_field - 2.0 * fd.cross(omega, v_mid)
        f_raw = -fd.scalar_times_vector(rho_mid, accel) - grad_p \
            + fd.scalar_times_vector(rho_mid, body)
        pairing = fd.inner(fd.scalar_times_vector(rho_mid, accel) + grad_p
                           - fd.scalar_times_vector(rho_mid, g_field), v_mid)
        f = fd.remove_stencil_null(f_raw)

    discarded = float(np.linalg.norm(fd.component_means(f_raw)))
    u = solve_k(f, mu, cfg)
    phi_v = phi(v_mid, mu)
    phi_star_f = phi(u, mu)
    ns_residual = fd.l2_norm(f - apply_k(v_mid, mu))
    return _IntervalCore(t_mid, v_mid, accel, f_raw, f, u, phi_v, phi_star_f,
                         pairing, discarded, ns_residual)


def _assemble(path: Path, mu: float, grav: Gravitation,
              cfg: ConjugateSolve) -> tuple[list[_IntervalCore], SbenReport]:
    start = time.perf_counter()
    cores = [_interval_core(path, k, mu, grav, cfg) for k in range(path.n_intervals)]
    report = SbenReport(
        kind=path.kind,
        midpoint_times=np.array([c.t_mid for c in cores]),
        phi_terms=np.array([c.phi_v for c in cores]),
        phi_star_terms=np.array([c.phi_star_f for c in cores]),
        pairing_terms=np.array([c.pairing for c in cores]),
        ns_residual_norms=np.array([c.ns_residual for c in cores]),
        discarded_mean_norms=np.array([c.discarded_mean for c in cores]),
        dt=path.dt,
        wall_time=time.perf_counter() - start,
    )
    return cores, report


def _recover_pressures(cores: list[_IntervalCore], mu: float) -> list[ScalarField]:
    """Multiplier pressure per interval: the potential part of the full
    constitutive balance, grad(p) = f_raw - K(v_mid) at the minimum."""
    pressures = []
    for c in cores:
        _, q = leray_project(c.f_raw - apply_k(c.v_mid, mu))
        pressures.append(ScalarField(q.grid, q.data - q.data.mean()))
    return pressures


def multiplier_pressures(path: Path, mu: float, grav: Gravitation,
                         cfg: ConjugateSolve) -> list[ScalarField]:
    """Zero-mean multiplier pressure per interval of an incompressible path."""
    if path.kind != "incompressible":
        raise ValueError("multiplier pressure is defined for the incompressible kind")
    cores = [_interval_core(path, k, mu, grav, cfg) for k in range(path.n_intervals)]
    return _recover_pressures(cores, mu)


def assemble_pi_incompressible(path: Path, mu: float, grav: Gravitation,
                               cfg: ConjugateSolve) -> SbenReport:
    """Evaluate the space-time functional on an incompressible path (pure)."""
    if path.kind != "incompressible":
        raise ValueError("path carries a compressible EOS")
    _, report = _assemble(path, mu, grav, cfg)
    return report


def assemble_pi_compressible(path: Path, mu: float, grav: Gravitation,
                             cfg: ConjugateSolve) -> SbenReport:
    """Evaluate the space-time functional on a barotropic compressible path."""
    if path.kind != "compressible":
        raise ValueError("path carries an incompressible EOS")
    _, report = _assemble(path, mu, grav, cfg)
    return report


# --- gradient -----------------------------------------------------------------

def _interval_gradient_pieces(path: Path, k: int, core: _IntervalCore, mu: float,
                              grav: Gravitation) -> tuple[VectorField, VectorField]:
    """Coefficients (E, F) of the interval's first variation
    d(Pi_k)/dt = <E, d v_mid> + <F, d (time difference)>."""
    grid = path.grid
    omega = grav.coriolis_vector(core.t_mid)
    g_field = grav.gravity(core.t_mid)
    jac_v = fd.grad_vector(core.v_mid)

    if path.kind == "incompressible":
        rho0 = path.eos.rho0
        w = rho0 * (core.v_mid - core.u)
        e = (fd.jac_transpose_dot(jac_v, w) - fd.div_outer(core.v_mid, w)
             + apply_k(core.v_mid, mu)
             + rho0 * (core.accel - g_field)
             + 2.0 * rho0 * fd.cross(omega, core.u))
    else:
        rho_mid = 0.5 * (path.states[k].rho + path.states[k + 1].rho)
        p_mid = ScalarField(grid, path.eos.pressure(rho_mid.data))
        w = fd.scalar_times_vector(rho_mid, core.v_mid - core.u)
        e = (fd.jac_transpose_dot(jac_v, w) - fd.div_outer(core.v_mid, w)
             + apply_k(core.v_mid, mu)
             + fd.scalar_times_vector(rho_mid, core.accel - g_field)
             + fd.grad_scalar(p_mid)
             + 2.0 * fd.scalar_times_vector(rho_mid, fd.cross(omega, core.u)))
    return e, w


def gradient_pi(path: Path, mu: float, grav: Gravitation, cfg: ConjugateSolve,
                cores: Optional[list[_IntervalCore]] = None,
                project: bool = True) -> list[VectorField]:
    """Exact gradient of the discrete functional with respect to the free
    velocity slices v_k, k >= 1.  For the incompressible kind each slice is
    projected onto divergence-free fields (the feasible directions).

    For the compressible kind the density/pressure response is frozen, which
    makes the gradient approximate; see minimize_compressible."""
    if cores is None:
        cores = [_interval_core(path, k, mu, grav, cfg) for k in range(path.n_intervals)]
    dt = path.dt
    n = path.n_intervals
    grads: list[VectorField] = []
    pieces = [_interval_gradient_pieces(path, k, cores[k], mu, grav) for k in range(n)]
    for j in range(1, n + 1):
        e_prev, f_prev = pieces[j - 1]
        g = dt * (0.5 * e_prev) + f_prev
        if j <= n - 1:
            e_next, f_next = pieces[j]
            g = g + dt * (0.5 * e_next) - f_next
        if project and path.kind == "incompressible":
            g, _ = leray_project(g)
        grads.append(g)
    return grads


def path_dot(a: list[VectorField], b: list[VectorField]) -> float:
    return sum(fd.inner(x, y) for x, y in zip(a, b))


# --- minimizer ------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizeConfig:
    tol_pi_rel: float = 1e-8       # on the initial path's dissipation integral
    tol_grad_rel: float = 1e-6
    max_iter: int = 500
    restart_every: int = 20
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60


@dataclass
class MinimizeResult:
    path: Path
    report: SbenReport
    converged: bool
    message: str


def _project_free_slices(path: Path) -> Path:
    free = []
    for s in path.states[1:]:
        v_df, _ = leray_project(s.v)
        free.append(v_df)
    return path.with_velocities(free)


def minimize(path0: Path, mu: float, grav: Gravitation, cfg: ConjugateSolve,
             opts: MinimizeConfig = MinimizeConfig(),
             on_iteration: Optional[Callable[[int, float, float], None]] = None
             ) -> MinimizeResult:
    """Descend the functional over the free slices of an incompressible path.

    Nonlinear conjugate gradient (Polak-Ribiere+, periodic restart) with
    Armijo backtracking; all iterates stay on the divergence-free affine
    subspace with the initial state pinned.  The accepted-step values of the
    functional are monotone non-increasing.
    """
    if path0.kind != "incompressible":
        raise ValueError("minimize handles the incompressible kind; "
                         "see minimize_compressible for the experimental variant")
    start = time.perf_counter()
    path = _project_free_slices(path0)

    cores, report = _assemble(path, mu, grav, cfg)
    pi_val = report.total_pi
    tol_pi = opts.tol_pi_rel * report.dissipation_integral
    grad = gradient_pi(path, mu, grav, cfg, cores=cores)
    gnorm0 = np.sqrt(max(path_dot(grad, grad), 0.0))
    history = [gnorm0]

    direction = [-g for g in grad]
    alpha_prev = None
    converged = False
    message = "max_iter reached"
    iters = 0

    for it in range(opts.max_iter):
        gnorm = history[-1]
        if pi_val <= tol_pi:
            converged, message = True, f"functional below tolerance {tol_pi:.3e}"
            break
        if gnorm <= opts.tol_grad_rel * gnorm0:
            converged, message = True, "gradient norm below relative tolerance"
            break

        slope = path_dot(grad, direction)
        if slope >= 0:
            direction = [-g for g in grad]
            slope = -path_dot(grad, grad)

        dnorm = np.sqrt(max(path_dot(direction, direction), 0.0))
        if dnorm == 0.0:
            converged, message = True, "vanishing search direction"
            break
        if alpha_prev is None:
            vel_scale = max(np.sqrt(sum(fd.inner(s.v, s.v) for s in path.states)
                                    / len(path.states)), 1e-12)
            alpha = 0.5 * vel_scale / dnorm
        else:
            alpha = 2.0 * alpha_prev

        accepted = False
        for _ in range(opts.max_backtracks):
            trial_free = [path.states[j + 1].v + alpha * direction[j]
                          for j in range(path.n_intervals)]
            trial = path.with_velocities(trial_free)
            trial_cores, trial_report = _assemble(trial, mu, grav, cfg)
            if trial_report.total_pi <= pi_val + opts.armijo_c * alpha * slope:
                accepted = True
                break
            alpha *= opts.backtrack_factor
        if not accepted:
            message = "line search failed; returning last accepted path"
            break

        alpha_prev = alpha
        new_grad = gradient_pi(trial, mu, grav, cfg, cores=trial_cores)
        beta = max(0.0, (path_dot(new_grad, new_grad) - path_dot(new_grad, grad))
                   / max(path_dot(grad, grad), 1e-300))
        if (it + 1) % opts.restart_every == 0:
            beta = 0.0
            trial = _project_free_slices(trial)
            trial_cores, trial_report = _assemble(trial, mu, grav, cfg)
            new_grad = gradient_pi(trial, mu, grav, cfg, cores=trial_cores)
        direction = [-g + beta * d for g, d in zip(new_grad, direction)]

        path, cores, report = trial, trial_cores, trial_report
        pi_val = report.total_pi
        grad = new_grad
        history.append(np.sqrt(max(path_dot(grad, grad), 0.0)))
        iters = it + 1
        if on_iteration is not None:
            on_iteration(iters, pi_val, history[-1])
    else:
        iters = opts.max_iter

    path.pressures = _recover_pressures(cores, mu)
    report.grad_norm_history = [float(g) for g in history]
    report.iterations = iters
    report.wall_time = time.perf_counter() - start
    return MinimizeResult(path, report, converged, message)


def minimize_compressible(path0: Path, mu: float, grav: Gravitation,
                          cfg: ConjugateSolve,
                          opts: MinimizeConfig = MinimizeConfig()) -> MinimizeResult:
    """Experimental descent for barotropic paths.

    The density is re-slaved to the mass balance inside every evaluation and
    the gradient freezes the density/pressure response, so directions are
    only approximately steepest; Armijo still guarantees monotone decrease.
    """
    if path0.kind != "compressible":
        raise ValueError("minimize_compressible needs a barotropic path")
    start = time.perf_counter()
    eos = path0.eos
    times = path0.times
    rho0_field = path0.states[0].rho

    def rebuild(velocities: list[VectorField]) -> Path:
        densities = slave_density(rho0_field, [path0.states[0].v] + velocities, times, eos)
        return compressible_path(path0.grid, eos, times,
                                 [path0.states[0].v] + velocities, densities)

    path = rebuild([s.v for s in path0.states[1:]])
    cores, report = _assemble(path, mu, grav, cfg)
    pi_val = report.total_pi
    tol_pi = opts.tol_pi_rel * report.dissipation_integral
    grad = gradient_pi(path, mu, grav, cfg, cores=cores, project=False)
    gnorm0 = np.sqrt(max(path_dot(grad, grad), 0.0))
    history = [gnorm0]
    converged, message, iters = False, "max_iter reached", 0
    alpha_prev = None

    for it in range(opts.max_iter):
        if pi_val <= tol_pi or history[-1] <= opts.tol_grad_rel * gnorm0:
            converged, message = True, "tolerance reached"
            break
        direction = [-g for g in grad]
        slope = path_dot(grad, direction)
        dnorm = np.sqrt(max(path_dot(direction, direction), 0.0))
        if dnorm == 0.0:
            converged, message = True, "vanishing gradient"
            break
        alpha = 2.0 * alpha_prev if alpha_prev else 1.0 / dnorm
        accepted = False
        for _ in range(opts.max_backtracks):
            trial = rebuild([path.states[j + 1].v + alpha * direction[j]
                             for j in range(path.n_intervals)])
            trial_cores, trial_report = _assemble(trial, mu, grav, cfg)
            if trial_report.total_pi <= pi_val + opts.armijo_c * alpha * slope:
                accepted = True
                break
            alpha *= opts.backtrack_factor
        if not accepted:
            message = "line search failed; returning last accepted path"
            break
        alpha_prev = alpha
        path, cores, report = trial, trial_cores, trial_report
        pi_val = report.total_pi
        grad = gradient_pi(path, mu, grav, cfg, cores=cores, project=False)
        history.append(np.sqrt(max(path_dot(grad, grad), 0.0)))
        iters = it + 1

    report.grad_norm_history = [float(g) for g in history]
    report.iterations = iters
    report.wall_time = time.perf_counter() - start
    return MinimizeResult(path, report, converged, message)
