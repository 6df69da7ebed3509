"""Classical centered compact first-derivative schemes.

A scheme with implicit half-width ``nc`` and explicit half-width ``ne`` reads

    sum_k alpha_k (u'_{j+k} + u'_{j-k}) + u'_j = (1/h) sum_k a_k (u_{j+k} - u_{j-k})

Only the one-sided weights are stored; symmetry is implied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CatalogMissError, DegenerateSchemeError, DerivationError

MAX_MOMENTS = 8

# Weights kept as exact fractions; converted to float on load.
_BUILTIN_FRACTIONS = {
    "C4": ((Fraction(1, 4),), (Fraction(3, 4),)),
    "C6": ((Fraction(1, 3),), (Fraction(7, 9), Fraction(1, 36))),
    "C8": ((Fraction(4, 9), Fraction(1, 36)), (Fraction(20, 27), Fraction(25, 216))),
    "C10": (
        (Fraction(1, 2), Fraction(1, 20)),
        (Fraction(17, 24), Fraction(101, 600), Fraction(1, 600)),
    ),
    "C12": (
        (Fraction(9, 16), Fraction(9, 100), Fraction(1, 400)),
        (Fraction(21, 32), Fraction(231, 1000), Fraction(49, 4000)),
    ),
    "C14": (
        (Fraction(3, 5), Fraction(3, 25), Fraction(1, 175)),
        (Fraction(31, 50), Fraction(67, 250), Fraction(283, 12250), Fraction(1, 9800)),
    ),
    "C16": (
        (Fraction(16, 25), Fraction(4, 25), Fraction(16, 1225), Fraction(1, 4900)),
        (Fraction(72, 125), Fraction(38, 125), Fraction(1784, 42875), Fraction(761, 686000)),
    ),
}

BUILTIN_LABELS = tuple(_BUILTIN_FRACTIONS)


@dataclass(frozen=True)
class ClassicalScheme:
    """One-sided weights of a centered compact scheme."""

    order: int
    nc: int
    ne: int
    alpha: tuple[float, ...]
    a: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        if self.nc < 0 or self.ne < 1:
            raise ValueError(f"invalid half-widths nc={self.nc}, ne={self.ne}")
        if len(self.alpha) != self.nc or len(self.a) != self.ne:
            raise ValueError("weight counts do not match nc/ne")
        if not all(math.isfinite(v) for v in self.alpha + self.a):
            raise ValueError("scheme weights must be finite")

    @property
    def is_explicit(self) -> bool:
        return all(v == 0.0 for v in self.alpha)

    @property
    def halo(self) -> int:
        """Number of boundary nodes per side that the interior stencil cannot cover."""
        return max(self.nc, self.ne)


@dataclass(frozen=True)
class NormalizedScheme:
    """Scheme rescaled so that the implicit weights sum to one.

    The centre implicit weight is ``1 - 2*sum(gamma)``.
    """

    nc: int
    ne: int
    gamma: tuple[float, ...]
    eta: tuple[float, ...]

    @property
    def center(self) -> float:
        return 1.0 - 2.0 * math.fsum(self.gamma)


@dataclass(frozen=True)
class Derivation:
    """Result of :func:`derive_classical` with solver diagnostics."""

    scheme: ClassicalScheme
    alpha_exact: tuple[Fraction, ...]
    a_exact: tuple[Fraction, ...]
    condition_number: float


def builtin(label: str) -> ClassicalScheme:
    """Return one of the tabulated maximal-order schemes C4 ... C16."""
    key = label.strip().upper()
    try:
        alpha, a = _BUILTIN_FRACTIONS[key]
    except KeyError:
        raise CatalogMissError(
            f"unknown scheme {label!r}; expected one of {', '.join(BUILTIN_LABELS)}"
        ) from None
    return ClassicalScheme(
        order=2 * (len(alpha) + len(a)),
        nc=len(alpha),
        ne=len(a),
        alpha=tuple(float(v) for v in alpha),
        a=tuple(float(v) for v in a),
        label=key,
    )


def builtin_fractions(label: str) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Exact rational weights of a built-in scheme."""
    try:
        return _BUILTIN_FRACTIONS[label.strip().upper()]
    except KeyError:
        raise CatalogMissError(f"unknown scheme {label!r}") from None


def moment_matrix(nc: int, ne: int) -> list[list[int]]:
    """Integer Taylor moment matrix for unknowns ``(alpha_1.., a_1..)``.

    Row ``q`` enforces exactness on ``x**(2q+1)``:
    ``2(2q+1) sum_k alpha_k k^(2q) - 2 sum_k a_k k^(2q+1) = -delta_{q0}``.
    """
    m = nc + ne
    rows = []
    for q in range(m):
        row = [2 * (2 * q + 1) * k ** (2 * q) for k in range(1, nc + 1)]
        row += [-2 * k ** (2 * q + 1) for k in range(1, ne + 1)]
        rows.append(row)
    return rows


def _solve_exact(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction]:
    # Gaussian elimination with partial pivoting over the rationals.
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(aug[i][col]))
        if aug[piv][col] == 0:
            raise DerivationError(f"moment matrix is singular (column {col})")
        aug[col], aug[piv] = aug[piv], aug[col]
        pivot_row = aug[col]
        for i in range(col + 1, n):
            f = aug[i][col] / pivot_row[col]
            if f:
                row = aug[i]
                for j in range(col, n + 1):
                    row[j] -= f * pivot_row[j]
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = aug[i][n] - sum(aug[i][j] * x[j] for j in range(i + 1, n))
        x[i] = s / aug[i][i]
    return x


def derive(nc: int, ne: int, label: str | None = None) -> Derivation:
    """Solve the moment system and keep exact weights plus diagnostics."""
    if nc < 1 or ne < 1:
        raise ValueError("nc and ne must both be >= 1")
    if nc + ne > MAX_MOMENTS:
        raise DerivationError(
            f"nc + ne = {nc + ne} exceeds {MAX_MOMENTS}; moment system too ill-conditioned"
        )
    mat = moment_matrix(nc, ne)
    rhs = [-1] + [0] * (nc + ne - 1)
    sol = _solve_exact(mat, rhs)
    cond = float(np.linalg.cond(np.array(mat, dtype=float)))
    alpha, a = tuple(sol[:nc]), tuple(sol[nc:])
    order = 2 * (nc + ne)
    scheme = ClassicalScheme(
        order=order,
        nc=nc,
        ne=ne,
        alpha=tuple(float(v) for v in alpha),
        a=tuple(float(v) for v in a),
        label=label or f"C{order}",
    )
    return Derivation(scheme, alpha, a, cond)


def derive_classical(nc: int, ne: int) -> ClassicalScheme:
    """Maximal-order weights for half-widths ``(nc, ne)``.

    Examples
    --------
    >>> derive_classical(1, 1).alpha, derive_classical(1, 1).a
    ((0.25,), (0.75,))
    """
    return derive(nc, ne).scheme


def scheme_for_order(order: int) -> ClassicalScheme:
    """Built-in scheme of the given even order (4 ... 16)."""
    if order % 2 or not 4 <= order <= 16:
        raise CatalogMissError(f"no built-in scheme of order {order}")
    return builtin(f"C{order}")


def normalize(s: ClassicalScheme) -> NormalizedScheme:
    divisor = 1.0 + 2.0 * math.fsum(s.alpha)
    if abs(divisor) < 1e-14:
        raise DegenerateSchemeError(f"1 + 2*sum(alpha) vanishes for {s.label or s}")
    return NormalizedScheme(
        nc=s.nc,
        ne=s.ne,
        gamma=tuple(v / divisor for v in s.alpha),
        eta=tuple(v / divisor for v in s.a),
    )


def denormalize(ns: NormalizedScheme, label: str = "", order: int | None = None) -> ClassicalScheme:
    """Divide through by the centre weight to recover the classical form."""
    c = ns.center
    if abs(c) < 1e-14:
        raise DegenerateSchemeError("centre implicit weight vanishes")
    return ClassicalScheme(
        order=order if order is not None else 2 * (ns.nc + ns.ne),
        nc=ns.nc,
        ne=ns.ne,
        alpha=tuple(g / c for g in ns.gamma),
        a=tuple(e / c for e in ns.eta),
        label=label,
    )


def taylor_residuals(s: ClassicalScheme, max_degree: int) -> list[float]:
    """Scaled residual of the scheme on monomials ``x**p`` at ``x=0``, ``h=1``.

    Entry ``p`` is ``(LHS - RHS) / sum(|terms|)`` for ``u = x**p``.
    """
    out = []
    for p in range(max_degree + 1):
        def du(x):
            return p * x ** (p - 1) if p else 0.0

        terms = [du(0.0)]
        terms += [al * (du(k) + du(-k)) for k, al in enumerate(s.alpha, 1)]
        terms += [-ak * (k ** p - (-k) ** p) for k, ak in enumerate(s.a, 1)]
        scale = math.fsum(abs(t) for t in terms) or 1.0
        out.append(math.fsum(terms) / scale)
    return out


# --- plain-text import/export -------------------------------------------------
# One scheme per line: label, order, nc, ne, alpha..., a...


def format_scheme_line(label: str, order: int, nc: int, ne: int,
                       implicit: Iterable[float], explicit: Iterable[float]) -> str:
    fields = [label, str(order), str(nc), str(ne)]
    fields += [f"{v:.17g}" for v in implicit]
    fields += [f"{v:.17g}" for v in explicit]
    return ", ".join(fields)


def parse_scheme_line(line: str) -> tuple[str, int, int, int, tuple[float, ...], tuple[float, ...]]:
    parts = [p.strip() for p in line.split(",")]
    if len(parts) < 4:
        raise ValueError(f"malformed scheme line: {line!r}")
    label = parts[0]
    order, nc, ne = int(parts[1]), int(parts[2]), int(parts[3])
    vals = [float(Fraction(p)) if "/" in p else float(p) for p in parts[4:]]
    if len(vals) != nc + ne:
        raise ValueError(f"expected {nc + ne} weights for {label!r}, got {len(vals)}")
    return label, order, nc, ne, tuple(vals[:nc]), tuple(vals[nc:])


def dumps(schemes: Iterable[ClassicalScheme]) -> str:
    return "".join(
        format_scheme_line(s.label, s.order, s.nc, s.ne, s.alpha, s.a) + "\n" for s in schemes
    )


def loads(text: str) -> list[ClassicalScheme]:
    schemes = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, order, nc, ne, alpha, a = parse_scheme_line(line)
        schemes.append(ClassicalScheme(order, nc, ne, alpha, a, label))
    return schemes


def load(path: str | Path) -> list[ClassicalScheme]:
    return loads(Path(path).read_text())


def save(schemes: Iterable[ClassicalScheme], path: str | Path) -> None:
    Path(path).write_text(dumps(schemes))
