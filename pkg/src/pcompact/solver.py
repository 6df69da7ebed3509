"""Time marching for u_t + c(u) u_x = 0 on a bounded 1-D domain.

Prefactored schemes are paired with MacCormack predictor/corrector stepping
(forward sweep in the predictor, backward sweep in the corrector); classical
schemes with two-stage TVD Runge-Kutta.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels as K
from . import catalog
from .catalog import ClassicalScheme
from .errors import DivergenceError, PostShockError
from .operators import (
    FACTOR_CACHE,
    BoundaryClosure,
    Grid1D,
    GridFunction,
    backward_derivative,
    classical_derivative,
    forward_derivative,
)
from .prefactor import PrefactoredScheme, prefactor

log = logging.getLogger(__name__)

Scheme = Union[ClassicalScheme, PrefactoredScheme]

SHOCK_SAMPLES = 4096
SHOCK_MARGIN = 0.95
# Largest Courant number used by default; the MacCormack coupling of the
# higher-order sweeps is unstable near 0.5.
DEFAULT_CFL = 0.2
# Orders above this share its step-size refinement path (keeps runs desk-sized).
MAX_DT_ORDER = 12
LINEAR_DOMAIN = (-20.0, 450.0)
BURGERS_DOMAIN = (-0.5, 0.5)
# Coarsest grids of the standard convergence studies (step-size reference).
LINEAR_REF_POINTS = 400
BURGERS_REF_POINTS = 120
BURGERS_MAX_SPEED = 0.1


# --- built-in initial conditions -----------------------------------------------------


def gaussian_pulse(x):
    """Linear-case initial condition: 0.5 exp(-ln2 x^2 / 9)."""
    return 0.5 * np.exp(-math.log(2.0) * np.square(x) / 9.0)


def gaussian_pulse_dx(x):
    return -2.0 * math.log(2.0) * x / 9.0 * gaussian_pulse(x)


_SIGMA = 0.16


def gaussian_sine(x):
    """Burgers-case initial condition: 0.1 exp(-x^2/0.16^2) sin(2 pi x)."""
    return 0.1 * np.exp(-np.square(x) / _SIGMA**2) * np.sin(2.0 * np.pi * x)


def gaussian_sine_dx(x):
    g = 0.1 * np.exp(-np.square(x) / _SIGMA**2)
    return g * (2.0 * np.pi * np.cos(2.0 * np.pi * x) - 2.0 * x / _SIGMA**2 * np.sin(2.0 * np.pi * x))


BENCH_WAVELENGTH = 20.0


def sine_wave(x):
    """Tail-free timing initial condition: 0.5 sin(2 pi x / 20).

    Gaussian tails drive derivative values into the subnormal range, where
    floating-point arithmetic is an order of magnitude slower; timing runs
    use this wave instead so that they measure the schemes, not the FPU.
    """
    return 0.5 * np.sin(2.0 * np.pi * np.asarray(x) / BENCH_WAVELENGTH)


def sine_wave_dx(x):
    k = 2.0 * np.pi / BENCH_WAVELENGTH
    return 0.5 * k * np.cos(k * np.asarray(x))


# --- problem -----------------------------------------------------------------------


@dataclass(frozen=True)
class AdvectionProblem:
    """Initial-boundary value problem for linear advection or inviscid Burgers.

    ``dt`` is reduced on construction so that ``t_final`` is an integer
    multiple of it.  ``bc`` defaults to an analytic closure built from the exact solution.
    """

    flavor: str
    grid: Grid1D
    u0: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    du0: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    t_final: float
    dt: float
    speed: float = 1.0
    bc: Optional[BoundaryClosure] = field(default=None, compare=False)
    allow_post_shock: bool = False

    def __post_init__(self):
        if self.flavor not in ("linear", "burgers"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        # Shrink the step so that an integer number of steps lands on t_final.
        steps = max(1, math.ceil(self.t_final / self.dt - 1e-9))
        object.__setattr__(self, "dt", self.t_final / steps)
        if self.flavor == "burgers" and not self.allow_post_shock:
            ts = shock_time(self)
            if self.t_final > SHOCK_MARGIN * ts:
                raise PostShockError(
                    f"t_final = {self.t_final} exceeds {SHOCK_MARGIN} x shock time {ts:.6g}"
                )

    @property
    def nsteps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    @property
    def max_speed(self) -> float:
        if self.flavor == "linear":
            return abs(self.speed)
        xs = np.linspace(self.grid.l1, self.grid.l2, SHOCK_SAMPLES)
        return float(np.max(np.abs(self.u0(xs))))

    @property
    def cfl(self) -> float:
        return self.max_speed * self.dt / self.grid.h

    def closure(self) -> BoundaryClosure:
        if self.bc is not None:
            return self.bc
        if self.flavor == "burgers" and self.allow_post_shock:
            return BoundaryClosure.one_sided()
        return BoundaryClosure.analytic(
            lambda x, t: exact_derivative(self, x, t),
            lambda x, t: exact_values(self, x, t),
        )

    def with_grid(self, n: int, dt: Optional[float] = None) -> "AdvectionProblem":
        return replace(self, grid=Grid1D(self.grid.l1, self.grid.l2, n), dt=dt if dt else self.dt)


def shock_time(problem: AdvectionProblem) -> float:
    """First crossing of Burgers characteristics, ``-1/min u0'``; inf if none."""
    if problem.flavor == "linear":
        return math.inf
    xs = np.linspace(problem.grid.l1, problem.grid.l2, SHOCK_SAMPLES)
    slope = float(np.min(problem.du0(xs)))
    return math.inf if slope >= 0 else -1.0 / slope


def linear_case(n: int = 1000, t_final: float = 50.0, dt: Optional[float] = None,
                order: int = 6, speed: float = 1.0, **kw) -> AdvectionProblem:
    """Gaussian pulse on [-20, 450] advected at unit speed."""
    grid = Grid1D(*LINEAR_DOMAIN, n)
    if dt is None:
        h_ref = (LINEAR_DOMAIN[1] - LINEAR_DOMAIN[0]) / (LINEAR_REF_POINTS - 1)
        dt = default_dt(grid.h, speed, order, h_ref)
    return AdvectionProblem("linear", grid, gaussian_pulse, gaussian_pulse_dx, t_final, dt, speed, **kw)


def timing_case(n: int, steps: int, cfl: float = DEFAULT_CFL) -> AdvectionProblem:
    """Sine wave on the linear-case domain, ``steps`` steps at Courant number ``cfl``."""
    grid = Grid1D(*LINEAR_DOMAIN, n)
    dt = cfl * grid.h
    return AdvectionProblem("linear", grid, sine_wave, sine_wave_dx, steps * dt, dt)


def burgers_case(n: int = 160, t_final: float = 1.5, dt: Optional[float] = None,
                 order: int = 6, **kw) -> AdvectionProblem:
    """Gaussian-windowed sine on [-1/2, 1/2] under inviscid Burgers."""
    grid = Grid1D(*BURGERS_DOMAIN, n)
    if dt is None:
        h_ref = (BURGERS_DOMAIN[1] - BURGERS_DOMAIN[0]) / (BURGERS_REF_POINTS - 1)
        dt = default_dt(grid.h, BURGERS_MAX_SPEED, order, h_ref, coupling_power=1)
    return AdvectionProblem("burgers", grid, gaussian_sine, gaussian_sine_dx, t_final, dt, **kw)


def default_dt(h: float, speed: float, order: int, h_ref: float,
               cfl_ref: float = DEFAULT_CFL, coupling_power: int = 2) -> float:
    """Step size with Courant number ``cfl_ref * (h / h_ref)**(q - coupling_power - 1)``.

    ``q = min(order, MAX_DT_ORDER)``.  MacCormack stepping with the two
    first-order sweeps leaves a fully discrete error of size
    ``dt * h**coupling_power`` (2 for constant speed, 1 for Burgers).
    Refining along ``dt ~ h**(q - coupling_power)`` makes it shrink like
    ``h**q`` together with the spatial error.  Grids coarser than ``h_ref``
    use ``cfl_ref``.
    """
    speed = abs(speed) or 1.0
    q = min(order, MAX_DT_ORDER)
    cfl = cfl_ref * min(1.0, h / h_ref) ** max(q - coupling_power - 1, 0)
    return cfl * h / speed


# --- exact solution -------------------------------------------------------------


def _burgers_characteristics(problem: AdvectionProblem, x: np.ndarray, t: float,
                             tol: float = 1e-15, maxit: int = 100) -> np.ndarray:
    """Solve ``u = u0(x - u t)`` pointwise by bracketed Newton."""
    x = np.asarray(x, dtype=float)
    u = problem.u0(x).astype(float)
    if t == 0.0:
        return u
    xs = np.linspace(problem.grid.l1, problem.grid.l2, SHOCK_SAMPLES)
    samples = problem.u0(xs)
    # u lies in the range of u0; sampling underestimates that range, so pad it.
    smin, smax = min(float(samples.min()), float(u.min())), max(float(samples.max()), float(u.max()))
    pad = 0.01 * (smax - smin) + 1e-12
    lo = np.full_like(x, smin - pad)
    hi = np.full_like(x, smax + pad)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(maxit):
        xi = x - u * t
        f = u - problem.u0(xi)
        # Converged nodes are frozen; otherwise a step landing on the bracket
        # edge would trigger a bisection away from the root.
        active &= np.abs(f) > tol
        if not active.any():
            break
        fp = 1.0 + t * problem.du0(xi)
        lo = np.where(f < 0, np.maximum(lo, u), lo)
        hi = np.where(f > 0, np.minimum(hi, u), hi)
        step = u - f / fp
        bad = ~((step >= lo) & (step <= hi)) | (fp <= 0)
        new = np.where(bad, 0.5 * (lo + hi), step)
        active &= new != u
        u = np.where(active, new, u)
    return u


def exact_values(problem: AdvectionProblem, x: np.ndarray, t: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if problem.flavor == "linear":
        return problem.u0(x - problem.speed * t)
    if t >= shock_time(problem):
        raise PostShockError(f"analytic solution invalid at t = {t} (shock at {shock_time(problem):.6g})")
    return _burgers_characteristics(problem, x, t)


def exact_derivative(problem: AdvectionProblem, x: np.ndarray, t: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if problem.flavor == "linear":
        return problem.du0(x - problem.speed * t)
    u = exact_values(problem, x, t)
    d0 = problem.du0(x - u * t)
    return d0 / (1.0 + t * d0)


def exact_solution(problem: AdvectionProblem, t: float) -> GridFunction:
    """Exact state on the problem grid at time ``t`` (pre-shock for Burgers)."""
    return GridFunction(problem.grid, exact_values(problem, problem.grid.x, t))


def burgers_residual(problem: AdvectionProblem, u: np.ndarray, t: float) -> np.ndarray:
    """``|u - u0(x - u t)|`` on the problem grid."""
    x = problem.grid.x
    return np.abs(u - problem.u0(x - u * t))


# --- integrators -------------------------------------------------------------------


@dataclass(frozen=True)
class TimeIntegrator:
    """``maccormack`` with a prefactored scheme or ``tvd-rk2`` with a classical one."""

    kind: str
    scheme: Scheme
    alternate: bool = False

    def __post_init__(self):
        if self.kind == "maccormack" and not isinstance(self.scheme, PrefactoredScheme):
            raise TypeError("MacCormack stepping needs a prefactored scheme")
        if self.kind == "tvd-rk2" and not isinstance(self.scheme, ClassicalScheme):
            raise TypeError("TVD-RK2 stepping needs a classical scheme")
        if self.kind not in ("maccormack", "tvd-rk2"):
            raise ValueError(f"unknown integrator {self.kind!r}")

    @classmethod
    def for_label(cls, label: str, alternate: bool = False) -> "TimeIntegrator":
        """``PCn`` maps to MacCormack, ``Cn`` to TVD-RK2."""
        key = label.strip().upper()
        if key.startswith("PC"):
            return cls("maccormack", prefactor(catalog.builtin(key[1:])), alternate)
        return cls("tvd-rk2", catalog.builtin(key))

    @property
    def label(self) -> str:
        return self.scheme.label

    @property
    def order(self) -> int:
        return self.scheme.order


def _velocity(problem: AdvectionProblem, u: np.ndarray):
    return u if problem.flavor == "burgers" else problem.speed


def _impose_boundary(u: np.ndarray, problem: AdvectionProblem, bc: BoundaryClosure, m: int, t: float):
    # Exact data on the halo nodes, as in the compiled marchers.
    if bc.ghosted:
        table = bc.value_table(problem.grid, m, np.array([t]))[0]
        u[:m], u[-m:] = table[0], table[1]


def _check(u: np.ndarray, step: int, stage: str):
    if not np.all(np.isfinite(u)):
        raise DivergenceError(f"non-finite state after {stage} of step {step}", step=step)


def maccormack_step(u_n: GridFunction, problem: AdvectionProblem, p: PrefactoredScheme,
                    t: float = 0.0, forward_first: bool = True, step: int = 0) -> GridFunction:
    """One predictor/corrector step; returns ``(u_n + u_B) / 2``."""
    bc = problem.closure()
    dt = problem.dt
    first, second = (forward_derivative, backward_derivative) if forward_first else (
        backward_derivative, forward_derivative)
    u = u_n.values
    d = first(p, u_n, bc, t).values
    us = u - dt * _velocity(problem, u) * d
    _impose_boundary(us, problem, bc, p.halo, t + dt)
    _check(us, step, "predictor")
    d = second(p, GridFunction(u_n.grid, us), bc, t + dt).values
    ub = us - dt * _velocity(problem, us) * d
    new = 0.5 * (u + ub)
    _impose_boundary(new, problem, bc, p.halo, t + dt)
    _check(new, step, "corrector")
    return GridFunction(u_n.grid, new)


def tvd_rk2_step(u_n: GridFunction, problem: AdvectionProblem, s: ClassicalScheme,
                 t: float = 0.0, step: int = 0) -> GridFunction:
    bc = problem.closure()
    dt = problem.dt
    u0 = u_n.values
    d = classical_derivative(s, u_n, bc, t).values
    u1 = u0 - dt * _velocity(problem, u0) * d
    _impose_boundary(u1, problem, bc, s.halo, t + dt)
    _check(u1, step, "stage 1")
    d = classical_derivative(s, GridFunction(u_n.grid, u1), bc, t + dt).values
    new = 0.5 * u0 + 0.5 * u1 - 0.5 * dt * _velocity(problem, u1) * d
    _impose_boundary(new, problem, bc, s.halo, t + dt)
    _check(new, step, "stage 2")
    return GridFunction(u_n.grid, new)


@dataclass
class RunReport:
    label: str
    integrator: str
    flavor: str
    n: int
    steps: int
    dt: float
    cfl: float
    wall_total: float
    wall_derivative: Optional[float] = None
    completed: bool = True


def _boundary_setup(problem: AdvectionProblem, integrator: TimeIntegrator, times: np.ndarray):
    grid = problem.grid
    bc = problem.closure()
    s = integrator.scheme
    m = s.halo
    if bc.mode == "analytic":
        if integrator.kind == "maccormack" and bc.ghosted:
            table = bc.sweep_table(s, grid, times)
        else:
            xb = np.concatenate((grid.x[:m], grid.x[-m:]))
            table = np.array([bc._exact_derivative(xb, t) for t in times]).reshape(len(times), 2, m)
        wl = wr = np.zeros((m, 1))
        if bc.ghosted:
            return table, True, wl, wr, bc.value_table(grid, m, times), True
        return table, True, wl, wr, np.zeros((1, 2, m)), False
    wl, wr = bc.weights(m, s.order, grid.n)
    return np.zeros((1, 2, m)), False, wl, wr, np.zeros((1, 2, m)), False


def _classical_factors(s: ClassicalScheme, n: int):
    system = FACTOR_CACHE.get(s, n)
    fac = system.factor()
    empty1 = np.zeros(1)
    empty2 = np.zeros((1, 1))
    if fac[0] == "thomas":
        return True, fac[1], fac[2], fac[3], empty2, system.nl
    if fac[0] == "band":
        return False, empty1, empty1, empty1, fac[1], system.nl
    return None


def run(problem: AdvectionProblem, integrator: TimeIntegrator, time_kernel: bool = False,
        u_init: Optional[np.ndarray] = None):
    """March to ``t_final``; returns the final state and a :class:`RunReport`."""
    grid = problem.grid
    nsteps = problem.nsteps
    dt = problem.dt
    s = integrator.scheme
    m = s.halo
    if grid.n < 4 * m:
        raise ValueError(f"{s.label} needs at least {4 * m} points")
    u = np.array(problem.u0(grid.x) if u_init is None else u_init, dtype=float)
    times = dt * np.arange(nsteps + 1)
    table, analytic, wl, wr, vtable, impose = _boundary_setup(problem, integrator, times)
    burgers = problem.flavor == "burgers"
    report = RunReport(s.label, integrator.kind, problem.flavor, grid.n, nsteps, dt, problem.cfl, 0.0)

    start = time.perf_counter()
    if integrator.kind == "maccormack":
        done, stage = K.march_maccormack(
            u, nsteps, dt, problem.speed, burgers, np.array(s.beta, dtype=float),
            np.array(s.b, dtype=float), 1.0 / s.beta0, grid.h, m, table, analytic, wl, wr,
            integrator.alternate, vtable, impose)
    else:
        factors = _classical_factors(s, grid.n)
        if factors is None:
            done, stage = _python_march(problem, s, u)
        else:
            tri, mult, inv, upper, band, nl = factors
            done, stage = K.march_rk2(
                u, nsteps, dt, problem.speed, burgers, np.array(s.a, dtype=float), grid.h, m,
                tri, mult, inv, upper, band, nl, table, analytic, wl, wr, vtable, impose)
    report.wall_total = time.perf_counter() - start
    if stage:
        report.completed = False
        report.steps = done
        raise DivergenceError(f"{s.label}: non-finite state in stage {stage} of step {done}",
                              step=done, report=report)
    if time_kernel:
        report.wall_derivative = kernel_time(s, grid, nsteps)
    return GridFunction(grid, u), report


def _python_march(problem: AdvectionProblem, s: ClassicalScheme, u: np.ndarray):
    # Only reached when the banded factorization needed pivoting.
    state = GridFunction(problem.grid, u)
    for step in range(problem.nsteps):
        try:
            state = tvd_rk2_step(state, problem, s, step * problem.dt, step)
        except DivergenceError:
            return step, 1
    u[:] = state.values
    return problem.nsteps, 0


def kernel_time(s: Scheme, grid: Grid1D, nsteps: int, u: Optional[np.ndarray] = None) -> float:
    """Wall-clock of the derivative work alone for ``nsteps`` two-stage steps."""
    if u is None:
        u = gaussian_pulse(np.linspace(-20, 20, grid.n))
    m = s.halo
    bv = np.zeros((2, m))
    out = np.empty(grid.n)
    if isinstance(s, PrefactoredScheme):
        beta, b = np.array(s.beta, dtype=float), np.array(s.b, dtype=float)
        K.repeat_sweeps(u, 1, beta, b, 1.0 / s.beta0, grid.h, m, bv, out)
        start = time.perf_counter()
        K.repeat_sweeps(u, nsteps, beta, b, 1.0 / s.beta0, grid.h, m, bv, out)
        return time.perf_counter() - start
    factors = _classical_factors(s, grid.n)
    if factors is None:
        raise NotImplementedError("kernel timing needs an unpivoted factorization")
    tri, mult, inv, upper, band, nl = factors
    a = np.array(s.a, dtype=float)
    K.repeat_classical(u, 1, a, grid.h, m, bv, tri, mult, inv, upper, band, nl, out)
    start = time.perf_counter()
    K.repeat_classical(u, nsteps, a, grid.h, m, bv, tri, mult, inv, upper, band, nl, out)
    return time.perf_counter() - start
