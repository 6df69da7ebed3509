"""Split a centered compact scheme into forward/backward sweep operators.

Forward operator (swept from the right boundary to the left)::

    (1 - sum beta_k) u'F_j + sum beta_k u'F_{j+k} = (1/h) sum b_k (u_{j+k} - u_j)

Backward operator is the mirror image.  Averaging the two reproduces the
classical scheme exactly, which fixes ``beta`` through a spectral
factorization of the implicit symbol and ``b`` through a linear solve.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import catalog
from .catalog import ClassicalScheme, NormalizedScheme
from .errors import FactorizationError, SingularSystemError

UNIT_CIRCLE_TOL = 1e-10


class IllConditionedFactorization(UserWarning):
    """Roots of the implicit symbol sit close to the unit circle."""


@dataclass(frozen=True)
class PrefactoredScheme:
    order: int
    nc: int
    ne: int
    beta: tuple[float, ...]
    b: tuple[float, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.beta) != self.nc or len(self.b) != self.ne:
            raise ValueError("weight counts do not match nc/ne")

    @property
    def beta0(self) -> float:
        """Diagonal weight ``1 - sum(beta)``."""
        return 1.0 - math.fsum(self.beta)

    @property
    def beta_tilde(self) -> np.ndarray:
        return np.array((self.beta0,) + self.beta)

    @property
    def label(self) -> str:
        if self.source.startswith("C"):
            return "P" + self.source
        return "PC-" + self.source if self.source else f"PC{self.order}"

    @property
    def halo(self) -> int:
        return max(self.nc, self.ne)

    @property
    def contraction_ratio(self) -> float:
        """``sum|beta_k| / beta0``.

        Below one this bounds the per-node decay of boundary perturbations.
        PC12 and above exceed one; their sweeps are still stable, see
        :attr:`decay_rate`.
        """
        return math.fsum(abs(v) for v in self.beta) / self.beta0

    @property
    def decay_rate(self) -> float:
        """Asymptotic per-node decay of a boundary perturbation.

        Equals the largest modulus among reciprocals of the roots of
        ``beta0 + sum beta_k z^k``; below one for a minimum-phase factor.
        """
        if not any(self.beta):
            return 0.0
        coeffs = np.trim_zeros(self.beta_tilde[::-1], "f")
        roots = np.roots(coeffs)
        return float(np.max(1.0 / np.abs(roots)))


@dataclass(frozen=True)
class Factorization:
    """Diagnostics of a spectral factorization."""

    beta_tilde: tuple[float, ...]
    roots: tuple[complex, ...]
    min_root_gap: float
    residual: float
    ill_conditioned: bool = False


def _autocorrelation(bt: np.ndarray) -> np.ndarray:
    n = len(bt)
    return np.array([np.dot(bt[: n - m], bt[m:]) for m in range(n)])


def _newton_polish(bt: np.ndarray, gamma: np.ndarray, tol: float = 1e-15, maxit: int = 20) -> np.ndarray:
    # Unknowns beta_1..beta_nc, beta_0 = 1 - sum(beta).
    nc = len(gamma)
    beta = bt[1:].copy()

    def full(bv):
        return np.concatenate(([1.0 - bv.sum()], bv))

    def resid(bv):
        return _autocorrelation(full(bv))[1:] - gamma

    r = resid(beta)
    for _ in range(maxit):
        norm = np.max(np.abs(r))
        if norm <= tol:
            break
        t = full(beta)
        jac = np.empty((nc, nc))
        for m in range(1, nc + 1):
            for k in range(1, nc + 1):
                up = t[k + m] if k + m <= nc else 0.0
                dn = t[k - m] if k - m >= 0 else 0.0
                jac[m - 1, k - 1] = up + dn - t[m]
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        while lam > 1e-4:
            trial = beta + lam * step
            rt = resid(trial)
            if np.max(np.abs(rt)) < norm:
                beta, r = trial, rt
                break
            lam *= 0.5
        else:
            break
    return full(beta)


def spectral_factor(gamma: Sequence[float]) -> Factorization:
    """Minimum-phase factor of the symmetric implicit symbol.

    The symbol ``(1 - 2 sum g) + sum g_m (z^m + z^-m)`` has roots in
    reciprocal pairs; the factor keeps the roots outside the unit disk so
    that the right-to-left forward sweep is contractive.
    """
    g = np.asarray(gamma, dtype=float)
    nc = len(g)
    eff = nc
    while eff > 0 and g[eff - 1] == 0.0:
        eff -= 1
    if eff == 0:
        return Factorization((1.0,) + (0.0,) * nc, (), math.inf, 0.0)
    ge = g[:eff]
    c0 = 1.0 - 2.0 * g.sum()
    # z^eff times the Laurent symbol, highest power first.
    coeffs = np.concatenate((ge[::-1], [c0], ge))
    roots = np.roots(coeffs)
    gaps = np.abs(np.abs(roots) - 1.0)
    outside = roots[np.abs(roots) > 1.0]
    if len(outside) != eff or np.min(gaps) == 0.0:
        raise FactorizationError(
            "implicit symbol has roots on the unit circle; no contractive factor exists",
            candidates=roots,
        )
    poly = np.poly(outside)
    if np.max(np.abs(poly.imag)) > 1e-8 * np.max(np.abs(poly)):
        raise FactorizationError("selected roots do not give a real factor", candidates=roots)
    bt = poly.real[::-1]
    total = bt.sum()
    if total == 0.0:
        raise FactorizationError("factor vanishes at z = 1", candidates=roots)
    bt = bt / total
    if bt[0] <= 0.0:
        raise FactorizationError("diagonal sweep weight is not positive", candidates=roots)
    bt = _newton_polish(bt, ge)
    bt = np.concatenate((bt, np.zeros(nc - eff)))
    res = float(np.max(np.abs(_autocorrelation(bt)[1:] - g)))
    gap = float(np.min(gaps))
    ill = gap < UNIT_CIRCLE_TOL
    return Factorization(tuple(bt.tolist()), tuple(complex(r) for r in roots), gap, res, ill)


def factor_implicit(gamma: Sequence[float]) -> tuple[float, ...]:
    """Sweep weights ``beta_1..beta_nc`` whose autocorrelation matches ``gamma``.

    Examples
    --------
    >>> round(factor_implicit([1 / 6])[0], 12)
    0.211324865405
    """
    fac = spectral_factor(gamma)
    if fac.ill_conditioned:
        warnings.warn(
            f"implicit symbol root within {fac.min_root_gap:.2e} of the unit circle",
            IllConditionedFactorization,
            stacklevel=2,
        )
    return fac.beta_tilde[1:]


def explicit_system(beta_tilde: Sequence[float], ne: int) -> np.ndarray:
    """Matrix mapping ``b`` to the odd coefficients of the averaged RHS symbol.

    Row ``m`` (1-based) is the coefficient of ``z^m - z^-m`` in
    ``(P_F(1/z) Q_F(z) - P_F(z) Q_F(1/z)) / 2``.
    """
    bt = list(beta_tilde)
    nc = len(bt) - 1
    rows = max(ne, nc)

    def w(j):
        return bt[j] if 0 <= j <= nc else 0.0

    mat = np.zeros((rows, ne))
    for m in range(1, rows + 1):
        for k in range(1, ne + 1):
            mat[m - 1, k - 1] = 0.5 * (w(k - m) - w(k + m) + w(m))
    return mat


def solve_explicit(beta: Sequence[float], eta: Sequence[float]) -> tuple[float, ...]:
    """Explicit sweep weights ``b`` given ``beta`` and the normalized ``eta``."""
    beta = tuple(float(v) for v in beta)
    bt = (1.0 - math.fsum(beta),) + beta
    ne = len(eta)
    mat = explicit_system(bt, ne)
    rhs = np.zeros(mat.shape[0])
    rhs[:ne] = eta
    if mat.shape[0] == ne:
        try:
            b = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError("explicit-weight system is singular") from exc
        if np.linalg.cond(mat) > 1e12:
            raise SingularSystemError("explicit-weight system is numerically singular")
    else:
        b, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        if np.max(np.abs(mat @ b - rhs)) > 1e-12:
            raise SingularSystemError(
                "explicit stencil too narrow to reproduce the averaged operator"
            )
    return tuple(b.tolist())


def prefactor(s: ClassicalScheme) -> PrefactoredScheme:
    """Forward/backward sweep weights reproducing ``s`` on average."""
    ns = catalog.normalize(s)
    return prefactor_normalized(ns, order=s.order, source=s.label)


def prefactor_normalized(ns: NormalizedScheme, order: int, source: str = "") -> PrefactoredScheme:
    beta = factor_implicit(ns.gamma) if ns.nc else ()
    b = solve_explicit(beta, ns.eta)
    return PrefactoredScheme(order=order, nc=ns.nc, ne=ns.ne, beta=beta, b=b, source=source)


# --- dense periodic oracle -----------------------------------------------------


def _circulant(n: int, offsets: dict[int, float]) -> np.ndarray:
    m = np.zeros((n, n))
    idx = np.arange(n)
    for off, val in offsets.items():
        m[idx, (idx + off) % n] += val
    return m


def periodic_matrices(c: ClassicalScheme, p: PrefactoredScheme, n: int) -> dict[str, np.ndarray]:
    """Dense periodic matrices of the classical and both sweep operators."""
    a_off = {0: 1.0}
    c_off: dict[int, float] = {}
    for k, al in enumerate(c.alpha, 1):
        a_off[k] = a_off.get(k, 0.0) + al
        a_off[-k] = a_off.get(-k, 0.0) + al
    for k, ak in enumerate(c.a, 1):
        c_off[k] = c_off.get(k, 0.0) + ak
        c_off[-k] = c_off.get(-k, 0.0) - ak
    bsum = math.fsum(p.b)
    bf = {0: p.beta0, **{k: v for k, v in enumerate(p.beta, 1)}}
    bb = {0: p.beta0, **{-k: v for k, v in enumerate(p.beta, 1)}}
    cf = {0: -bsum, **{k: v for k, v in enumerate(p.b, 1)}}
    cb = {0: bsum, **{-k: -v for k, v in enumerate(p.b, 1)}}
    return {
        "A": _circulant(n, a_off),
        "C": _circulant(n, c_off),
        "BF": _circulant(n, bf),
        "CF": _circulant(n, cf),
        "BB": _circulant(n, bb),
        "CB": _circulant(n, cb),
    }


@dataclass(frozen=True)
class FactorizationReport:
    n: int
    b_transpose_exact: bool
    c_transpose_exact: bool
    commutator: float
    operator_residual: float
    autocorrelation_residual: float
    explicit_residual: float
    details: dict = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return self.b_transpose_exact and self.c_transpose_exact and self.operator_residual <= 1e-10


def verify_factorization(c: ClassicalScheme, p: PrefactoredScheme, n: int) -> FactorizationReport:
    """Check the sweep pair against the classical scheme on a periodic ring."""
    if n < 4 * max(c.halo, p.halo):
        raise ValueError(f"n = {n} too small for half-widths of {c.label}")
    mats = periodic_matrices(c, p, n)
    try:
        df = np.linalg.solve(mats["BF"], mats["CF"])
        db = np.linalg.solve(mats["BB"], mats["CB"])
        dc = np.linalg.solve(mats["A"], mats["C"])
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("implicit matrix is singular") from exc
    avg = 0.5 * (df + db)
    op_res = float(np.max(np.sum(np.abs(avg - dc), axis=1)))
    ns = catalog.normalize(c)
    bt = p.beta_tilde
    ac = _autocorrelation(bt)
    target = np.array((ns.center,) + ns.gamma + (0.0,) * (len(bt) - 1 - ns.nc))
    ac_res = float(np.max(np.abs(ac - target[: len(ac)])))
    mat = explicit_system(bt, p.ne)
    rhs = np.zeros(mat.shape[0])
    rhs[: len(ns.eta)] = ns.eta
    ex_res = float(np.max(np.abs(mat @ np.array(p.b) - rhs)))
    comm = mats["BB"] @ mats["BF"] - mats["BF"] @ mats["BB"]
    return FactorizationReport(
        n=n,
        b_transpose_exact=bool(np.array_equal(mats["BF"], mats["BB"].T)),
        c_transpose_exact=bool(np.array_equal(mats["CF"], -mats["CB"].T)),
        commutator=float(np.max(np.abs(comm))),
        operator_residual=op_res,
        autocorrelation_residual=ac_res,
        explicit_residual=ex_res,
    )


# --- text export -------------------------------------------------------------------


def dumps(schemes: Iterable[PrefactoredScheme]) -> str:
    return "".join(
        catalog.format_scheme_line(p.label, p.order, p.nc, p.ne, p.beta, p.b) + "\n"
        for p in schemes
    )


def loads(text: str) -> list[PrefactoredScheme]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, order, nc, ne, beta, b = catalog.parse_scheme_line(line)
        if label.startswith("PC-"):
            source = label[3:]
        elif label.startswith("PC"):
            source = label[1:]
        else:
            source = label
        out.append(PrefactoredScheme(order, nc, ne, beta, b, source))
    return out


def save(schemes: Iterable[PrefactoredScheme], path: str | Path) -> None:
    Path(path).write_text(dumps(schemes))


def load(path: str | Path) -> list[PrefactoredScheme]:
    return loads(Path(path).read_text())


def builtin_prefactored(label: str) -> PrefactoredScheme:
    """``PCn`` for a built-in label, accepting either ``PCn`` or ``Cn``."""
    key = label.strip().upper()
    if key.startswith("PC"):
        key = key[1:]
    return prefactor(catalog.builtin(key))
