"""Fourier symbols of compact schemes and prefactored sweep operators.

For ``u = exp(i k x)`` and ``z = k h``, a scheme returns ``i K(z) u / h``; ``K`` is
the modified wavenumber.  Centered schemes give a real ``K``; the one-sided sweep
operators give complex symbols whose imaginary parts are equal and opposite.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .catalog import ClassicalScheme
from .errors import PoleError
from .prefactor import PrefactoredScheme

POLE_TOL = 1e-14
DEFAULT_SAMPLES = 256
KINDS = ("wavenumber", "phase-velocity", "group-velocity")


def _as_array(z):
    return np.atleast_1d(np.asarray(z, dtype=float))


def _check_range(z: np.ndarray, allow_zero: bool = True):
    lo_ok = z >= 0.0 if allow_zero else z > 0.0
    if not np.all(lo_ok & (z <= math.pi + 1e-12)):
        raise ValueError("wavenumbers must lie in [0, pi]")


def _classical_parts(s: ClassicalScheme, z: np.ndarray):
    """Numerator, denominator and their z-derivatives."""
    ka = np.arange(1, s.ne + 1)
    kc = np.arange(1, s.nc + 1)
    a = np.asarray(s.a)
    al = np.asarray(s.alpha)
    num = 2.0 * np.sin(np.outer(z, ka)) @ a
    dnum = 2.0 * np.cos(np.outer(z, ka)) @ (a * ka)
    den = 1.0 + (2.0 * np.cos(np.outer(z, kc)) @ al if s.nc else 0.0)
    dden = -2.0 * np.sin(np.outer(z, kc)) @ (al * kc) if s.nc else np.zeros_like(z)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError(f"implicit symbol of {s.label or 'scheme'} vanishes on the sample set")
    return num, dnum, den, dden


def _unwrap(z, values):
    return float(values[0]) if np.ndim(z) == 0 else values


def classical_wavenumber(s: ClassicalScheme, z):
    """``K(z) = sum 2 a_k sin(kz) / (1 + sum 2 alpha_k cos(kz))``.

    Examples
    --------
    >>> from pcompact.catalog import builtin
    >>> classical_wavenumber(builtin("C4"), 0.0)
    0.0
    """
    zz = _as_array(z)
    _check_range(zz)
    num, _, den, _ = _classical_parts(s, zz)
    return _unwrap(z, num / den)


def phase_velocity(s: ClassicalScheme, z):
    """``K(z)/z``; the ``z = 0`` limit is 1 for any consistent scheme."""
    zz = _as_array(z)
    _check_range(zz)
    num, _, den, _ = _classical_parts(s, zz)
    out = np.ones_like(zz)
    nz = zz > 0.0
    out[nz] = num[nz] / den[nz] / zz[nz]
    return _unwrap(z, out)


def group_velocity(s: ClassicalScheme, z):
    """``dK/dz`` by term-wise differentiation of the symbol."""
    zz = _as_array(z)
    _check_range(zz)
    num, dnum, den, dden = _classical_parts(s, zz)
    return _unwrap(z, (dnum * den - num * dden) / den**2)


def sweep_symbols(p: PrefactoredScheme, z):
    """Complex symbols ``(K_F, K_B)`` of the forward and backward sweep operators.

    ``K_F = sum b_k (e^{ikz} - 1) / (i (beta0 + sum beta_k e^{ikz}))`` and
    ``K_B = sum b_k (1 - e^{-ikz}) / (i (beta0 + sum beta_k e^{-ikz}))``.  The
    two are complex conjugates, so ``(K_F + K_B)/2`` is real; it equals the
    classical symbol of the source scheme.
    """
    zz = _as_array(z)
    _check_range(zz)
    b = np.asarray(p.b, dtype=float)
    beta = np.asarray(p.beta, dtype=float)
    kb_idx = np.arange(1, len(b) + 1)
    kc_idx = np.arange(1, len(beta) + 1)

    def symbol(sign):
        # forward: sum b_k (u_{j+k} - u_j); backward: sum b_k (u_j - u_{j-k})
        q = (sign * (np.exp(sign * 1j * np.outer(zz, kb_idx)) - 1.0)) @ b
        den = p.beta0 + np.exp(sign * 1j * np.outer(zz, kc_idx)) @ beta
        if np.any(np.abs(den) < POLE_TOL):
            raise PoleError(f"implicit symbol of {p.label} vanishes on the sample set")
        return q / (1j * den)

    kf = symbol(1.0)
    kb = symbol(-1.0)
    if np.ndim(z) == 0:
        return complex(kf[0]), complex(kb[0])
    return kf, kb


def averaged_sweep_wavenumber(p: PrefactoredScheme, z):
    """Real part of ``(K_F + K_B)/2``."""
    kf, kb = sweep_symbols(p, z)
    return (0.5 * (kf + kb)).real


# --- curves ------------------------------------------------------------------------


Scheme = Union[ClassicalScheme, PrefactoredScheme]


@dataclass(frozen=True)
class WavenumberCurve:
    """Samples of one spectral quantity for one scheme."""

    label: str
    kind: str
    z: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if len(self.z) != len(self.values):
            raise ValueError("z and values differ in length")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("z must be strictly increasing")


def sample_points(samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """``samples`` uniform points on ``(0, pi]``."""
    if samples < 2:
        raise ValueError("need at least two samples")
    return math.pi * np.arange(1, samples + 1) / samples


def curve(s: Scheme, kind: str = "wavenumber", samples: int = DEFAULT_SAMPLES) -> WavenumberCurve:
    """Sample a classical scheme, or the averaged symbol of a prefactored one.

    Phase and group velocity of a prefactored scheme refer to its source
    classical scheme, which the averaged symbol reproduces.
    """
    z = sample_points(samples)
    if isinstance(s, PrefactoredScheme):
        if kind != "wavenumber":
            raise ValueError("velocity curves are defined for classical schemes")
        vals = averaged_sweep_wavenumber(s, z)
    elif kind == "wavenumber":
        vals = classical_wavenumber(s, z)
    elif kind == "phase-velocity":
        vals = phase_velocity(s, z)
    elif kind == "group-velocity":
        vals = group_velocity(s, z)
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    return WavenumberCurve(s.label, kind, z, np.asarray(vals, dtype=float))


def exact_values(kind: str, z: np.ndarray) -> np.ndarray:
    return z.copy() if kind == "wavenumber" else np.ones_like(z)


def curves_csv(curves: Sequence[WavenumberCurve]) -> str:
    """CSV with columns ``z, exact, <label>...``; all curves share one kind and grid."""
    if not curves:
        raise ValueError("no curves to write")
    kind, z = curves[0].kind, curves[0].z
    for c in curves[1:]:
        if c.kind != kind or not np.array_equal(c.z, z):
            raise ValueError("curves must share kind and sample points")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z", "exact"] + [c.label for c in curves])
    exact = exact_values(kind, z)
    for i in range(len(z)):
        w.writerow([f"{z[i]:.15g}", f"{exact[i]:.15g}"] + [f"{c.values[i]:.15g}" for c in curves])
    return buf.getvalue()


def dispersion_error(s: ClassicalScheme, z: float) -> float:
    """``|K(z) - z|``."""
    return abs(classical_wavenumber(s, z) - z)


def max_forward_dissipation(p: PrefactoredScheme, samples: Iterable[float] | None = None) -> float:
    """``max |Im K_F|`` over ``[0, pi]``, which bounds the stable Courant number.

    A MacCormack step amplifies the mode at ``z = pi`` by ``1 - sigma**2 (Im K_F)**2 / 2``,
    so ``sigma * max|Im K_F| <= 2`` is necessary for stability.
    """
    z = np.linspace(0.0, math.pi, 2049) if samples is None else np.asarray(list(samples), dtype=float)
    kf, _ = sweep_symbols(p, z)
    return float(np.max(np.abs(kf.imag)))
