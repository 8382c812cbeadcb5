"""Generators for the explicit verified families.

Each constructor assembles a statistic matrix together with the matching
characteristic functions and certifies its own advertised properties before
returning (independence residual on an exact spot-check grid, support shape,
validity of every member), so downstream code can treat the outputs as
certified fixtures.

Families:
  * line-gaussian - three Gaussian bundles supported on the line
    {(t, omega*t)} in R x T with three independent statistics; exists for any
    coefficient tuple whose variance system has a positive solution, and for
    arbitrary signs on the circle factor.
  * twisted-pair - two circle bundles twisted by opposite signed measures
    whose sum and difference are independent.
  * four-statistic - four twisted circle bundles with the four orthogonal
    sign statistics independent although no member is Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .charfn import (CylinderCF, InconclusiveError, TorusCF, Z2SignedMeasure,
                     is_gaussian, is_valid_probability, support_line)
from .groups import CylinderAuto, DualPoint, is_exact
from .independence import (StatMatrix, gaussian_system_check,
                           independence_residual, product_grid, solve_sigmas)


class ConstructionError(RuntimeError):
    """A requested family does not exist or failed its own certification."""


@dataclass(frozen=True)
class Family:
    """A certified fixture: statistic matrix plus member characteristic functions."""

    label: str            # "line-gaussian" | "twisted-pair" | "four-statistic"
    kind: str             # "cylinder" | "torus"
    matrix: StatMatrix
    cfs: tuple
    omega: object = None  # slope of the carrying line, cylinder families only

    @property
    def n(self) -> int:
        return self.matrix.n


# Small exact grids for constructor self-checks; the full default grid is the
# job of the verification entry points, not of every constructor call.
_CERTIFY_S = (Fraction(-1), Fraction(1, 2), Fraction(2))
_CERTIFY_N = (-1, 0, 2)


def _certify_grid(n_slots: int, kind: str):
    if kind == "torus":
        points = [-1, 0, 1, 2]
    else:
        points = [DualPoint(s, n) for s in _CERTIFY_S for n in _CERTIFY_N]
    return product_grid(points, n_slots, cap=100_000, seed=0)


def _coerce_rational(value, name: str):
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"{name} must be an exact rational (int, Fraction, or 'p/q' string)")


def _coerce_sign(value, name: str) -> int:
    if value not in (1, -1):
        raise ValueError(f"{name} must be +1 or -1")
    return int(value)


def line_gaussian_family(omega, a1, a2, b1, b2, p1=1, p2=1, q1=1, q2=1,
                         sigma_scale=1) -> Family:
    """Three independent Gaussian bundles carried by the line of slope omega.

    The statistic matrix is the reduced form with second-row multipliers
    (a1, a2) and third-row multipliers (b1, b2); the off-diagonal entries are
    c_i = (a_i - p_i)*omega and d_i = (b_i - q_i)*omega, which is exactly the
    condition for every entry to preserve the carrying line.  The member
    variances come from the exact solver (scaled by sigma_scale) and the
    bundles are sigma_j*(s + omega*n)^2 in the exponent.

    Raises ConstructionError when the variance system has no positive
    solution, and certifies independence, the support line of every member,
    and the full parameter system before returning.
    """
    a1, a2, b1, b2 = (_coerce_rational(v, n) for v, n in
                      ((a1, "a1"), (a2, "a2"), (b1, "b1"), (b2, "b2")))
    p1, p2, q1, q2 = (_coerce_sign(v, n) for v, n in
                      ((p1, "p1"), (p2, "p2"), (q1, "q1"), (q2, "q2")))
    exact_omega = is_exact(omega) or isinstance(omega, str)
    omega = _coerce_rational(omega, "omega") if exact_omega else float(omega)
    scale = _coerce_rational(sigma_scale, "sigma_scale") if is_exact(sigma_scale) or isinstance(sigma_scale, str) else float(sigma_scale)
    if scale <= 0:
        raise ValueError("sigma_scale must be positive")

    sigmas = solve_sigmas(a1, a2, b1, b2)
    if sigmas is None:
        raise ConstructionError(
            f"no positive sigma solution for coefficients ({a1}, {a2}, {b1}, {b2})"
        )
    sigmas = tuple(s * scale for s in sigmas)

    ident = CylinderAuto.identity()
    alpha1 = CylinderAuto(a1, (a1 - p1) * omega, p1)
    alpha2 = CylinderAuto(a2, (a2 - p2) * omega, p2)
    beta1 = CylinderAuto(b1, (b1 - q1) * omega, q1)
    beta2 = CylinderAuto(b2, (b2 - q2) * omega, q2)
    matrix = StatMatrix.from_rows([
        [ident, ident, ident],
        [alpha1, alpha2, ident],
        [beta1, beta2, ident],
    ])
    cfs = tuple(CylinderCF(sigma=s, kappa=2 * s * omega, lam=s * omega * omega)
                for s in sigmas)

    tol = 1e-12 if exact_omega else 1e-9
    residual = independence_residual(cfs, matrix, grid=_certify_grid(3, "cylinder"))
    if residual > tol:
        raise ConstructionError(f"certification failed: independence residual {residual}")
    worst_system = max(gaussian_system_check(cfs, matrix).values())
    if worst_system > tol:
        raise ConstructionError(f"certification failed: parameter system residual {worst_system}")
    for j, cf in enumerate(cfs):
        line = support_line(cf)
        ok = line == omega if exact_omega else abs(float(line) - omega) <= 1e-9
        if line is None or not ok:
            raise ConstructionError(f"certification failed: member {j} not carried by slope {omega}")
    for row in matrix.rows:
        for entry in row:
            if not entry.preserves_line(omega):
                raise ConstructionError("certification failed: entry does not preserve the line")
    return Family("line-gaussian", "cylinder", matrix, cfs, omega=omega)


def _twist_truncation(sigma: float) -> int:
    # exp(-sigma*n^2) below ~1e-12 past n = sqrt(28/sigma); keep a margin.
    if sigma <= 0:
        return 64
    return max(16, int(math.ceil(math.sqrt(30.0 / sigma))) + 4)


def twisted_torus_pair(sigma, theta1=0, theta2=0, kappa=0) -> Family:
    """Two circle bundles with opposite twists whose sum and difference are independent.

    Both members must be genuine probability measures; otherwise the failing
    member is named in the raised ConstructionError.
    """
    cf1 = TorusCF(sigma, theta1, kappa)
    cf2 = TorusCF(sigma, theta2, -kappa if kappa != 0 else 0)
    for pos, cf in (("first", cf1), ("second", cf2)):
        try:
            ok = is_valid_probability(cf, truncation=_twist_truncation(float(sigma)))
        except InconclusiveError as exc:
            raise ConstructionError(f"{pos} member validity inconclusive: {exc}") from exc
        if not ok:
            raise ConstructionError(f"{pos} member is not a probability measure: {cf}")
    matrix = StatMatrix.from_signs([[1, 1], [1, -1]])
    cfs = (cf1, cf2)
    residual = independence_residual(cfs, matrix, grid=_certify_grid(2, "torus"))
    if residual > 1e-12:
        raise ConstructionError(f"certification failed: independence residual {residual}")
    return Family("twisted-pair", "torus", matrix, cfs)


HADAMARD_SIGNS = ((1, 1, 1, 1), (1, 1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1))


def four_statistic_family(sigma, kappa) -> Family:
    """Four twisted circle bundles with the four orthogonal sign statistics independent.

    Members one and two carry twist +kappa, members three and four -kappa, all
    with the same Gaussian part; no member is Gaussian (kappa must be nonzero,
    that is the whole point), yet the four statistics are independent.
    """
    if kappa == 0:
        raise ConstructionError("not a counterexample: kappa = 0 makes every member Gaussian")
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    cf_plus = TorusCF(sigma, 0, kappa)
    cf_minus = TorusCF(sigma, 0, -kappa)
    for pos, cf in (("+twist", cf_plus), ("-twist", cf_minus)):
        try:
            ok = is_valid_probability(cf, truncation=_twist_truncation(float(sigma)))
        except InconclusiveError as exc:
            raise ConstructionError(f"{pos} member validity inconclusive: {exc}") from exc
        if not ok:
            raise ConstructionError(f"{pos} member is not a probability measure: {cf}")
    matrix = StatMatrix.from_signs(HADAMARD_SIGNS)
    cfs = (cf_plus, cf_plus, cf_minus, cf_minus)
    residual = independence_residual(cfs, matrix, grid=_certify_grid(4, "torus"))
    if residual > 1e-12:
        raise ConstructionError(f"certification failed: independence residual {residual}")
    if any(is_gaussian(cf) for cf in cfs):
        raise ConstructionError("certification failed: a member is Gaussian")
    return Family("four-statistic", "torus", matrix, cfs)


def z2_signed_measure(kappa) -> Z2SignedMeasure:
    """The measure on {+-1} with CF exp(kappa*(1 - (-1)^n)); signed when kappa != 0."""
    return Z2SignedMeasure.from_twist(kappa)


TRIPLE_SIGNS = ((1, 1, 1), (1, -1, 1), (-1, 1, 1))


@dataclass(frozen=True)
class TriadVerdict:
    """Outcome of the three-sign-statistic scenario on the circle."""

    matrix: StatMatrix
    sigma_solution: tuple
    only_degenerate: bool


def _solve3_exact(rows, rhs):
    """Gaussian elimination over Fractions for a 3x3 system; None when singular."""
    m = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    for col in range(3):
        piv = next((r for r in range(col, 3) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col]
        m[col] = [v / inv for v in m[col]]
        for r in range(3):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    return tuple(m[r][3] for r in range(3))


def torus_triple_verdict() -> TriadVerdict:
    """Solve the variance balance forced by three sign statistics on the circle.

    Pairwise sum/difference reductions force sigma1 + sigma3 = sigma2,
    sigma2 + sigma3 = sigma1 and sigma1 + sigma2 = sigma3; the system is
    nonsingular, so the only solution is (0, 0, 0): every member is
    degenerate.
    """
    rows = ((1, -1, 1), (-1, 1, 1), (1, 1, -1))
    solution = _solve3_exact(rows, (0, 0, 0))
    if solution is None:
        raise AssertionError("variance balance system unexpectedly singular")
    return TriadVerdict(
        matrix=StatMatrix.from_signs(TRIPLE_SIGNS),
        sigma_solution=solution,
        only_degenerate=(solution == (0, 0, 0)),
    )
