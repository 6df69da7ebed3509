"""Derivative operators on a uniform 1-D grid.

Classical schemes are applied through a banded solve (Thomas for tridiagonal
systems, banded LU otherwise); prefactored schemes through a single
boundary-to-boundary sweep per operator.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lapack

from . import _kernels as K
from .catalog import ClassicalScheme
from .errors import ClosureError, SingularSystemError, StencilOverflowError
from .prefactor import PrefactoredScheme

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid1D:
    l1: float
    l2: float
    n: int

    def __post_init__(self):
        if not self.l2 > self.l1:
            raise ValueError(f"need l2 > l1, got [{self.l1}, {self.l2}]")
        if self.n < MIN_POINTS:
            raise ValueError(f"need at least {MIN_POINTS} points, got {self.n}")

    @property
    def h(self) -> float:
        return (self.l2 - self.l1) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.l1 + self.h * np.arange(self.n)


@dataclass
class GridFunction:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function contains non-finite values")

    @classmethod
    def sample(cls, grid: Grid1D, f: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, f(grid.x))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def to_csv(self, path, header: str = "x,value") -> None:
        np.savetxt(path, np.column_stack((self.x, self.values)), delimiter=",",
                   header=header, comments="", fmt="%.15g")


# --- boundary closures -------------------------------------------------------------


@lru_cache(maxsize=None)
def onesided_weights(q: int, i: int) -> tuple[float, ...]:
    """Weights on nodes ``0..q`` giving ``u'`` at node ``i`` to order ``q`` (``h = 1``)."""
    size = q + 1
    # Vandermonde system in exact arithmetic: sum_s w_s (s - i)^p = p * 0^(p-1)
    rows = [[Fraction(s - i) ** p for s in range(size)] for p in range(size)]
    rhs = [Fraction(1) if p == 1 else Fraction(0) for p in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
                rhs[r] -= f * rhs[col]
    return tuple(float(rhs[r] / rows[r][r]) for r in range(size))


def ghost_count(p: PrefactoredScheme, tol: float = 1e-18) -> int:
    """Ghost nodes needed for a start-up error to decay below ``tol``."""
    rho = p.decay_rate
    if rho <= 0.0:
        return p.halo
    return int(np.ceil(np.log(tol) / np.log(rho))) + p.halo


@dataclass(frozen=True)
class BoundaryClosure:
    """How derivative values at the grid ends are obtained.

    ``mode`` is ``"analytic"`` (values from ``derivative(x, t)``) or
    ``"one-sided"`` (explicit one-sided differences of order ``order``).

    With an analytic closure that also carries ``function(x, t)``, sweeps are
    started on ghost nodes outside the domain so that their boundary values
    are those of the sweep operator itself rather than the exact derivative.
    """

    mode: str = "one-sided"
    derivative: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(default=None, compare=False)
    order: Optional[int] = None
    function: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in ("analytic", "one-sided"):
            raise ValueError(f"unknown closure mode {self.mode!r}")
        if self.mode == "analytic" and self.derivative is None:
            raise ClosureError("analytic closure needs a derivative callback")

    @classmethod
    def analytic(cls, derivative, function=None) -> "BoundaryClosure":
        return cls("analytic", derivative, None, function)

    @classmethod
    def one_sided(cls, order: Optional[int] = None) -> "BoundaryClosure":
        return cls("one-sided", None, order)

    @property
    def ghosted(self) -> bool:
        return self.mode == "analytic" and self.function is not None

    def closure_order(self, scheme_order: int) -> int:
        q = self.order if self.order is not None else scheme_order
        if q < scheme_order - 1:
            raise ClosureError(
                f"one-sided closure order {q} would degrade a scheme of order {scheme_order}"
            )
        return q

    def weights(self, m: int, scheme_order: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Left/right one-sided weight tables of shape ``(m, q+1)``."""
        q = self.closure_order(scheme_order)
        if q + 1 > n:
            raise StencilOverflowError(f"one-sided stencil of {q + 1} points exceeds n = {n}")
        wl = np.array([onesided_weights(q, i) for i in range(m)])
        # node n-m+i is m-1-i nodes from the right end: mirror and negate
        wr = np.array([[-w for w in reversed(onesided_weights(q, m - 1 - i))] for i in range(m)])
        return wl, wr

    def _exact_derivative(self, x: np.ndarray, t) -> np.ndarray:
        vals = np.asarray(self.derivative(x, t), dtype=float)
        if vals.shape != np.shape(x) or not np.all(np.isfinite(vals)):
            raise ClosureError("analytic derivative callback returned unusable data")
        return vals

    def values(self, u: np.ndarray, grid: Grid1D, m: int, scheme_order: int, t: float = 0.0) -> np.ndarray:
        """Derivatives at the first and last ``m`` nodes, shape ``(2, m)``."""
        out = np.empty((2, m))
        if self.mode == "analytic":
            x = grid.x
            idx = np.concatenate((np.arange(m), np.arange(grid.n - m, grid.n)))
            vals = self._exact_derivative(x[idx], t)
            out[0], out[1] = vals[:m], vals[m:]
        else:
            wl, wr = self.weights(m, scheme_order, grid.n)
            K.apply_onesided(np.ascontiguousarray(u, dtype=float), wl, wr, 1.0 / grid.h, out)
        return out

    def sweep_values(self, p: PrefactoredScheme, u: np.ndarray, grid: Grid1D,
                     t: float = 0.0) -> np.ndarray:
        """Boundary data for sweeps: row 0 backward (left end), row 1 forward (right end)."""
        if not self.ghosted:
            return self.values(u, grid, p.halo, p.order, t)
        return self.sweep_table(p, grid, np.array([t]))[0]

    def sweep_table(self, p: PrefactoredScheme, grid: Grid1D, times: np.ndarray,
                    chunk: int = 4096) -> np.ndarray:
        """Ghost-consistent sweep boundary data for each time, shape ``(len(times), 2, m)``."""
        m = p.halo
        g = ghost_count(p)
        h = grid.h
        xr = grid.l2 + h * np.arange(-(m - 1), g + 1)
        xl = grid.l1 + h * np.arange(-g, m)
        beta, b, b0i = np.array(p.beta, dtype=float), np.array(p.b, dtype=float), 1.0 / p.beta0
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty((len(times), 2, m))
        for start in range(0, len(times), chunk):
            ts = times[start:start + chunk]
            ur = np.array([self.function(xr, t) for t in ts], dtype=float)
            ul = np.array([self.function(xl, t) for t in ts], dtype=float)
            dr = np.array([self._exact_derivative(xr[-m:], t) for t in ts])
            dl = np.array([self._exact_derivative(xl[:m], t) for t in ts])
            K.ghost_sweep_table(ur, dr, ul, dl, beta, b, b0i, h, m, out[start:start + len(ts)])
        return out

    def value_table(self, grid: Grid1D, m: int, times: np.ndarray) -> np.ndarray:
        """Exact values on the first and last ``m`` nodes, shape ``(len(times), 2, m)``.

        Used by time marching to impose inflow/outflow data on the halo nodes.
        """
        if not self.ghosted:
            raise ClosureError("boundary values need an analytic closure with a function callback")
        xb = np.concatenate((grid.x[:m], grid.x[-m:]))
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.array([self.function(xb, t) for t in times], dtype=float)
        return out.reshape(len(times), 2, m)


# --- banded systems --------------------------------------------------------------


class BandedSystem:
    """Square banded matrix in row-packed storage with a reusable LU factorization.

    ``bands[i, nl + (j - i)] = A[i, j]``.  Factorization is LU without pivoting;
    if a pivot falls below ``1e-13`` LAPACK's partially pivoted ``gbtrf`` takes over.
    """

    def __init__(self, bands: np.ndarray, nl: int, nu: int):
        bands = np.array(bands, dtype=float)
        if bands.shape[1] != nl + nu + 1:
            raise ValueError("band storage width does not match bandwidths")
        if max(nl, nu) > 4:
            raise ValueError("bandwidth above 4 is not supported")
        self.n = bands.shape[0]
        self.nl = nl
        self.nu = nu
        self.bands = bands
        self._factor = None

    @classmethod
    def from_dense(cls, a: np.ndarray, nl: int, nu: int) -> "BandedSystem":
        n = a.shape[0]
        bands = np.zeros((n, nl + nu + 1))
        for i in range(n):
            for j in range(max(0, i - nl), min(n, i + nu + 1)):
                bands[i, nl + j - i] = a[i, j]
        return cls(bands, nl, nu)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(max(0, i - self.nl), min(self.n, i + self.nu + 1)):
                a[i, j] = self.bands[i, self.nl + j - i]
        return a

    @property
    def tridiagonal(self) -> bool:
        return self.nl == 1 and self.nu == 1

    @property
    def pivoted(self) -> bool:
        self.factor()
        return self._factor[0] == "gbtrf"

    def factor(self):
        if self._factor is not None:
            return self._factor
        if self.tridiagonal:
            lower = np.ascontiguousarray(self.bands[:, 0])
            diag = np.ascontiguousarray(self.bands[:, 1])
            upper = np.ascontiguousarray(self.bands[:, 2])
            mult, inv, bad = K.thomas_factor(lower, diag, upper)
            if bad < 0:
                self._factor = ("thomas", mult, inv, upper)
                return self._factor
        else:
            lu = self.bands.copy()
            if K.band_lu_factor(lu, self.nl, self.nu) < 0:
                self._factor = ("band", lu)
                return self._factor
        self._factor = ("gbtrf",) + self._gbtrf()
        return self._factor

    def _gbtrf(self):
        kl, ku = self.nl, self.nu
        ab = np.zeros((2 * kl + ku + 1, self.n))
        for i in range(self.n):
            for j in range(max(0, i - kl), min(self.n, i + ku + 1)):
                ab[kl + ku + i - j, j] = self.bands[i, kl + j - i]
        lub, piv, info = lapack.dgbtrf(ab, kl, ku)
        if info > 0:
            raise SingularSystemError(f"banded matrix is singular (pivot {info})")
        return lub, piv

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        fac = self.factor()
        rhs = np.ascontiguousarray(rhs, dtype=float)
        out = np.empty(self.n)
        if fac[0] == "thomas":
            K.thomas_solve(fac[1], fac[2], fac[3], rhs, out)
        elif fac[0] == "band":
            K.band_lu_solve(fac[1], self.nl, self.nu, rhs, out)
        else:
            out, info = lapack.dgbtrs(fac[1], self.nl, self.nu, rhs, fac[2])
            if info != 0:
                raise SingularSystemError("banded back-substitution failed")
        return out


def classical_system(s: ClassicalScheme, n: int) -> BandedSystem:
    """Implicit matrix of ``s`` on ``n`` nodes with identity rows at the boundaries."""
    m = s.halo
    if n < 4 * m or n < MIN_POINTS:
        raise StencilOverflowError(f"{s.label or 'scheme'} needs at least {max(4 * m, MIN_POINTS)} points")
    nl = max(s.nc, 1)
    bands = np.zeros((n, 2 * nl + 1))
    bands[:, nl] = 1.0
    for k, al in enumerate(s.alpha, 1):
        bands[m:n - m, nl + k] = al
        bands[m:n - m, nl - k] = al
    return BandedSystem(bands, nl, nl)


class FactorCache:
    """Write-once cache of classical systems keyed on ``(scheme, n)``."""

    def __init__(self):
        self._lock = threading.Lock()
        self._systems: dict = {}
        self.factorizations = 0

    def get(self, s: ClassicalScheme, n: int) -> BandedSystem:
        key = (s, n)
        system = self._systems.get(key)
        if system is not None:
            return system
        with self._lock:
            system = self._systems.get(key)
            if system is None:
                system = classical_system(s, n)
                system.factor()
                self.factorizations += 1
                self._systems[key] = system
        return system

    def clear(self):
        with self._lock:
            self._systems.clear()
            self.factorizations = 0


FACTOR_CACHE = FactorCache()


# --- operators ----------------------------------------------------------------------


def _check_size(n: int, m: int, label: str):
    if n < 4 * m:
        raise StencilOverflowError(f"{label} needs at least {4 * m} points, got {n}")


def classical_derivative(s: ClassicalScheme, u: GridFunction, bc: BoundaryClosure,
                         t: float = 0.0, cache: FactorCache = FACTOR_CACHE) -> GridFunction:
    """Compact derivative of ``u``; boundary rows take their values from ``bc``."""
    grid = u.grid
    m = s.halo
    _check_size(grid.n, m, s.label or "scheme")
    system = cache.get(s, grid.n)
    bv = bc.values(u.values, grid, m, s.order, t)
    rhs = np.empty(grid.n)
    K.central_rhs(u.values, np.array(s.a), 1.0 / grid.h, m, bv, rhs)
    return GridFunction(grid, system.solve(rhs))


def _sweep_args(p: PrefactoredScheme):
    return np.array(p.beta, dtype=float), np.array(p.b, dtype=float), 1.0 / p.beta0


def forward_derivative(p: PrefactoredScheme, u: GridFunction, bc: BoundaryClosure,
                       t: float = 0.0) -> GridFunction:
    """Forward (downwind) operator, swept from the right end to the left."""
    grid = u.grid
    m = p.halo
    _check_size(grid.n, m, p.label)
    bv = bc.sweep_values(p, u.values, grid, t)
    beta, b, b0i = _sweep_args(p)
    out = np.empty(grid.n)
    K.forward_sweep(u.values, beta, b, b0i, 1.0 / grid.h, m, bv[1], out)
    return GridFunction(grid, out)


def backward_derivative(p: PrefactoredScheme, u: GridFunction, bc: BoundaryClosure,
                        t: float = 0.0) -> GridFunction:
    """Backward (upwind) operator, swept from the left end to the right."""
    grid = u.grid
    m = p.halo
    _check_size(grid.n, m, p.label)
    bv = bc.sweep_values(p, u.values, grid, t)
    beta, b, b0i = _sweep_args(p)
    out = np.empty(grid.n)
    K.backward_sweep(u.values, beta, b, b0i, 1.0 / grid.h, m, bv[0], out)
    return GridFunction(grid, out)


def averaged_derivative(p: PrefactoredScheme, u: GridFunction, bc: BoundaryClosure,
                        t: float = 0.0) -> GridFunction:
    f = forward_derivative(p, u, bc, t)
    b = backward_derivative(p, u, bc, t)
    return GridFunction(u.grid, 0.5 * (f.values + b.values))
