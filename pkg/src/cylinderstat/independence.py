"""Exact checkers for independence of linear statistics in CF form.

Let xi_1..xi_n be independent with nonvanishing characteristic functions
cf_1..cf_n, and let L_i = sum_j m[i][j] xi_j with every entry a topological
automorphism.  The statistics are independent exactly when, for every tuple
(y_1, ..., y_n) of dual elements,

    prod_j cf_j( sum_i m[i][j]~ y_i )  =  prod_j prod_i cf_j( m[i][j]~ y_i )

where ~ denotes the adjoint (which shares the entry's matrix).  Everything
below evaluates that functional equation in log space from the closed-form
bundles, so there is no branch-of-logarithm ambiguity and exact parameters
produce exactly-zero residuals.

The module also houses the exact real-coefficient condition suite for the
reduced three-statistic problem, the positive-variance solver, the full
parameter system extracted from the functional equation for Gaussian
bundles, the step-subgroup classifier that drives the finite-difference
cascade, and the degenerate-support certificate for the symmetrized
convolution.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .charfn import CylinderCF, TorusCF, convolve, symmetrize, transform
from .groups import CylinderAuto, DualPoint, is_exact


class SingularSystemError(ValueError):
    """A linear system whose unique-solution precondition fails."""


class DegenerateFormError(ValueError):
    """Statistic matrix outside the classifiable (nondegenerate) branch."""


# --------------------------------------------------------------------------
# Statistic matrices


@dataclass(frozen=True)
class StatMatrix:
    """n x n array of automorphisms; row i defines L_i = sum_j rows[i][j] xi_j."""

    rows: tuple

    def __post_init__(self):
        n = len(self.rows)
        if n < 2:
            raise ValueError("need at least two statistics")
        rows = tuple(tuple(row) for row in self.rows)
        for row in rows:
            if len(row) != n:
                raise ValueError("statistic matrix must be square")
            for entry in row:
                if not isinstance(entry, CylinderAuto):
                    raise TypeError(f"entries must be CylinderAuto, got {type(entry).__name__}")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> CylinderAuto:
        return self.rows[i][j]

    @classmethod
    def from_rows(cls, rows) -> "StatMatrix":
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def from_signs(cls, sign_rows) -> "StatMatrix":
        """Matrix of circle automorphisms z -> z^(+-1) from rows of +-1 signs."""
        return cls.from_rows(
            [[CylinderAuto.sign(int(s)) for s in row] for row in sign_rows]
        )

    def is_sign_matrix(self) -> bool:
        return all(e.a == 1 and e.c == 0 for row in self.rows for e in row)

    def is_reduced(self) -> bool:
        """First row all identities and last column identities below the first row."""
        if not all(e.is_identity() for e in self.rows[0]):
            return False
        return all(self.rows[i][self.n - 1].is_identity() for i in range(1, self.n))

    def permuted_columns(self, perm) -> "StatMatrix":
        return StatMatrix.from_rows([[row[j] for j in perm] for row in self.rows])


def reduced_coefficients(matrix: StatMatrix):
    """(a1, a2, b1, b2, c1, c2, d1, d2, p1, p2, q1, q2) of a reduced 3x3 matrix."""
    if matrix.n != 3 or not matrix.is_reduced():
        raise ValueError("expected a reduced 3x3 statistic matrix")
    al1, al2 = matrix.entry(1, 0), matrix.entry(1, 1)
    be1, be2 = matrix.entry(2, 0), matrix.entry(2, 1)
    return (al1.a, al2.a, be1.a, be2.a,
            al1.c, al2.c, be1.c, be2.c,
            al1.p, al2.p, be1.p, be2.p)


# --------------------------------------------------------------------------
# Evaluation grids

DEFAULT_S = (Fraction(-2), Fraction(-1), Fraction(-1, 2), Fraction(0),
             Fraction(1, 2), Fraction(1), Fraction(2))
DENSE_S = (Fraction(-2), Fraction(-3, 2), Fraction(-1), Fraction(-3, 4),
           Fraction(-1, 2), Fraction(-1, 4), Fraction(0), Fraction(1, 4),
           Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(3, 2), Fraction(2))
DEFAULT_N = (-2, -1, 0, 1, 2)
DENSE_N = tuple(range(-4, 5))


def slot_points(kind: str = "cylinder", dense: bool = False):
    """The per-slot dual sample set: DualPoints for the cylinder, ints for the circle."""
    ns = DENSE_N if dense else DEFAULT_N
    if kind == "torus":
        return list(ns)
    ss = DENSE_S if dense else DEFAULT_S
    return [DualPoint(s, n) for s in ss for n in ns]


def product_grid(points, n_slots: int, cap: int = 100_000, seed: int = 0):
    """Cartesian grid of dual tuples, stride-subsampled deterministically past `cap`.

    The subsample is stratified (indices evenly spaced through the full
    product) with a seeded offset, so results are reproducible and cover both
    parities of every integer slot.
    """
    base = len(points)
    total = base ** n_slots
    if total <= cap:
        return [tuple(t) for t in itertools.product(points, repeat=n_slots)]
    offset = int(np.random.default_rng(seed).integers(total))
    grid = []
    for k in range(cap):
        idx = (offset + (k * total) // cap) % total
        tup = []
        for _ in range(n_slots):
            idx, r = divmod(idx, base)
            tup.append(points[r])
        grid.append(tuple(tup))
    return grid


def default_grid(n_slots: int, kind: str = "cylinder", dense: bool = False,
                 cap: int = 100_000, seed: int = 0):
    return product_grid(slot_points(kind, dense), n_slots, cap=cap, seed=seed)


# --------------------------------------------------------------------------
# The independence residual


def _validate_family(cfs, matrix: StatMatrix) -> str:
    n = matrix.n
    if len(cfs) != n:
        raise ValueError(f"need {n} characteristic functions, got {len(cfs)}")
    if all(isinstance(cf, CylinderCF) for cf in cfs):
        return "cylinder"
    if all(isinstance(cf, TorusCF) for cf in cfs):
        if not matrix.is_sign_matrix():
            raise ValueError("circle statistics require sign automorphisms (a=1, c=0)")
        return "torus"
    raise TypeError("characteristic functions must all be CylinderCF or all TorusCF")


def _cf_params(cf):
    if isinstance(cf, CylinderCF):
        return (cf.sigma, cf.kappa, cf.lam, cf.tau, cf.theta, cf.twist)
    return (cf.sigma, cf.theta, cf.twist)


def _collect_slot_points(grid, n):
    """Unique point objects per slot, keyed by identity (grids reuse objects)."""
    slots = [{} for _ in range(n)]
    for tup in grid:
        for i in range(n):
            y = tup[i]
            slots[i].setdefault(id(y), y)
    return slots


def _exact_int_scanner(cfs, matrix, kind, slots):
    """Integer-arithmetic residual scanner for fully exact inputs, or None.

    Clears all denominators once (parameters by M, transformed s-coordinates
    by L), after which both sides of the functional equation are integer
    combinations; the residual at a tuple is then computed exactly and only
    converted to float for the max.
    """
    n = matrix.n
    if not all(is_exact(*_cf_params(cf)) for cf in cfs):
        return None
    if kind == "cylinder":
        if not all(is_exact(e.a, e.c) for row in matrix.rows for e in row):
            return None
        if not all(is_exact(y.s) for slot in slots for y in slot.values()):
            return None

    M = math.lcm(*(Fraction(p).denominator for cf in cfs for p in _cf_params(cf)))

    if kind == "torus":
        params = []
        for cf in cfs:
            sM = int(cf.sigma * M)
            thM = int(cf.theta * M)
            twM2 = int(2 * cf.twist * M)
            params.append((sM, thM, twM2))

        def log_int(j, m):
            sM, thM, twM2 = params[j]
            re = -(sM * m * m)
            if m % 2:
                re += twM2
            return re, thM * m

        tables = [[{} for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                p = matrix.rows[i][j].p
                tab = tables[i][j]
                for key, y in slots[i].items():
                    ty = p * y
                    lr, li = log_int(j, ty)
                    tab[key] = (ty, lr, li)
        scale_re = float(M)
        scale_im = float(M)

        def tuple_residual(tup):
            dre = 0
            dim = 0
            for j in range(n):
                row = tables[0][j]
                hit = row[id(tup[0])]
                arg = hit[0]
                rre = hit[1]
                rim = hit[2]
                for i in range(1, n):
                    hit = tables[i][j][id(tup[i])]
                    arg += hit[0]
                    rre += hit[1]
                    rim += hit[2]
                lre, lim = log_int(j, arg)
                dre += lre - rre
                dim += lim - rim
            return math.hypot(dre / scale_re, dim / scale_im)

        return tuple_residual

    # Cylinder: transformed s-values get a common denominator L.
    transformed = [[dict() for _ in range(n)] for _ in range(n)]
    dens = {1}
    for i in range(n):
        for j in range(n):
            e = matrix.rows[i][j]
            for key, y in slots[i].items():
                ty = e.on_dual(y)
                fs = Fraction(ty.s)
                dens.add(fs.denominator)
                transformed[i][j][key] = (fs, ty.n)
    L = math.lcm(*dens)
    L2 = L * L

    params = []
    for cf in cfs:
        params.append((int(cf.sigma * M), int(cf.kappa * M), int(cf.lam * M),
                       int(cf.tau * M), int(cf.theta * M), int(2 * cf.twist * M)))

    def log_int(j, si, m):
        sM, kM, lM, tM, thM, twM2 = params[j]
        re = -(sM * si * si + kM * si * m * L + lM * m * m * L2)
        if m % 2:
            re += twM2 * L2
        return re, tM * si + thM * m * L

    tables = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            tab = tables[i][j]
            for key, (fs, m) in transformed[i][j].items():
                si = int(fs * L)
                lr, li = log_int(j, si, m)
                tab[key] = (si, m, lr, li)
    scale_re = float(M) * float(L2)
    scale_im = float(M) * float(L)

    def tuple_residual(tup):
        dre = 0
        dim = 0
        for j in range(n):
            hit = tables[0][j][id(tup[0])]
            arg_s = hit[0]
            arg_n = hit[1]
            rre = hit[2]
            rim = hit[3]
            for i in range(1, n):
                hit = tables[i][j][id(tup[i])]
                arg_s += hit[0]
                arg_n += hit[1]
                rre += hit[2]
                rim += hit[3]
            lre, lim = log_int(j, arg_s, arg_n)
            dre += lre - rre
            dim += lim - rim
        return math.hypot(dre / scale_re, dim / scale_im)

    return tuple_residual


def _generic_scanner(cfs, matrix, kind):
    """Type-preserving residual scanner (floats, Fractions, or mixtures)."""
    n = matrix.n
    tables = [[{} for _ in range(n)] for _ in range(n)]
    hypot = math.hypot

    if kind == "torus":
        def tuple_residual(tup):
            dre = 0
            dim = 0
            for j in range(n):
                cf = cfs[j]
                rows = matrix.rows
                arg = 0
                rre = 0
                rim = 0
                for i in range(n):
                    y = tup[i]
                    cache = tables[i][j]
                    hit = cache.get(id(y))
                    if hit is None:
                        ty = rows[i][j].p * y
                        lr, li = cf.log_parts(ty)
                        hit = (ty, lr, li)
                        cache[id(y)] = hit
                    arg += hit[0]
                    rre += hit[1]
                    rim += hit[2]
                lre, lim = cf.log_parts(arg)
                dre += lre - rre
                dim += lim - rim
            return hypot(float(dre), float(dim))
    else:
        def tuple_residual(tup):
            dre = 0
            dim = 0
            for j in range(n):
                cf = cfs[j]
                rows = matrix.rows
                arg_s = 0
                arg_n = 0
                rre = 0
                rim = 0
                for i in range(n):
                    y = tup[i]
                    cache = tables[i][j]
                    hit = cache.get(id(y))
                    if hit is None:
                        ty = rows[i][j].on_dual(y)
                        lr, li = cf.log_parts(ty.s, ty.n)
                        hit = (ty.s, ty.n, lr, li)
                        cache[id(y)] = hit
                    arg_s += hit[0]
                    arg_n += hit[1]
                    rre += hit[2]
                    rim += hit[3]
                lre, lim = cf.log_parts(arg_s, arg_n)
                dre += lre - rre
                dim += lim - rim
            return hypot(float(dre), float(dim))

    return tuple_residual


def independence_residual(cfs, matrix: StatMatrix, grid=None, workers: int = 1,
                          return_worst: bool = False):
    """Max deviation of the independence functional equation over a dual grid.

    Both sides are assembled as sums of closed-form log-CF values; the
    residual at a tuple is the modulus of (LHS_log - RHS_log), and the return
    value is the maximum over the grid.  Exact bundle parameters and exact
    grid coordinates give an exactly-zero residual for genuinely independent
    statistics.  The result is bit-identical for any worker count.
    """
    kind = _validate_family(cfs, matrix)
    if grid is None:
        grid = default_grid(matrix.n, kind)
    if not grid:
        raise ValueError("empty evaluation grid")

    slots = _collect_slot_points(grid, matrix.n)
    tuple_residual = _exact_int_scanner(cfs, matrix, kind, slots)
    if tuple_residual is None:
        tuple_residual = _generic_scanner(cfs, matrix, kind)

    def scan(lo: int, hi: int):
        best = -1.0
        best_idx = -1
        for k in range(lo, hi):
            r = tuple_residual(grid[k])
            if r > best:
                best = r
                best_idx = k
        return best, best_idx

    if workers <= 1 or len(grid) < 2048:
        best, best_idx = scan(0, len(grid))
    else:
        chunk = max(1024, len(grid) // (workers * 8))
        bounds = [(lo, min(lo + chunk, len(grid))) for lo in range(0, len(grid), chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: scan(*b), bounds))
        # Max is order independent; ties resolve to the earliest grid index.
        best, best_idx = max(results, key=lambda r: (r[0], -r[1]))

    if return_worst:
        return best, grid[best_idx]
    return best


# --------------------------------------------------------------------------
# Exact condition suite for the reduced real-line coefficients

SIGN_TABLE = (
    (1, -1, -1, 1),
    (1, -1, -1, -1),
    (-1, 1, 1, -1),
    (-1, 1, -1, -1),
    (-1, -1, 1, -1),
    (-1, -1, -1, 1),
)


def _as_fraction(x, name: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"{name} must be an exact rational (int, Fraction, or 'p/q' string)")
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"{name} must be an exact rational, got {type(x).__name__}")


def cubic_identity(a1, a2, b1, b2):
    """The determinant condition tying the two coefficient rows together.

    Vanishes exactly when the three variance equations admit a common
    nontrivial solution; equals
    a1*b2 - a1*a2*b2 - a1*b1*b2 - a2*b1 + a1*a2*b1 + a2*b1*b2.
    """
    return (a1 * b2 - a1 * a2 * b2 - a1 * b1 * b2
            - a2 * b1 + a1 * a2 * b1 + a2 * b1 * b2)


@dataclass(frozen=True)
class ConditionReport:
    """Exact findings for a reduced coefficient tuple (a1, a2, b1, b2)."""

    cubic: Fraction
    sign_row: int | None
    distinct_a: bool
    distinct_b: bool
    cross_det: Fraction
    corner_det: Fraction

    @property
    def all_pass(self) -> bool:
        return (self.cubic == 0 and self.sign_row is not None
                and self.distinct_a and self.distinct_b
                and self.cross_det != 0 and self.corner_det != 0)


def coefficient_conditions(a1, a2, b1, b2) -> ConditionReport:
    """Evaluate the five necessary conditions on nonzero reduced coefficients.

    All arithmetic is exact.  The sign row is the 1-based index into the
    admissible sign table, or None when the sign pattern cannot support
    positive variances.
    """
    a1, a2, b1, b2 = (_as_fraction(v, n) for v, n in
                      ((a1, "a1"), (a2, "a2"), (b1, "b1"), (b2, "b2")))
    if 0 in (a1, a2, b1, b2):
        raise ValueError("all four coefficients must be nonzero")
    signs = tuple(1 if v > 0 else -1 for v in (a1, a2, b1, b2))
    sign_row = SIGN_TABLE.index(signs) + 1 if signs in SIGN_TABLE else None
    return ConditionReport(
        cubic=cubic_identity(a1, a2, b1, b2),
        sign_row=sign_row,
        distinct_a=a1 != a2,
        distinct_b=b1 != b2,
        cross_det=a2 * b1 - a1 * b2,
        corner_det=(a1 - 1) * (b2 - 1) - (a2 - 1) * (b1 - 1),
    )


def solve_sigmas(a1, a2, b1, b2):
    """Positive solution (sigma1, sigma2, sigma3) of the variance system, sigma3 = 1.

    Solves the first two equations by elimination and verifies the third one
    exactly; returns None when the third equation fails or any component is
    not strictly positive.  Raises SingularSystemError when the cross
    determinant a2*b1 - a1*b2 vanishes.
    """
    a1, a2, b1, b2 = (_as_fraction(v, n) for v, n in
                      ((a1, "a1"), (a2, "a2"), (b1, "b1"), (b2, "b2")))
    cross = a2 * b1 - a1 * b2
    if cross == 0:
        raise SingularSystemError("cross determinant a2*b1 - a1*b2 is zero")
    s1 = (b2 - a2) / cross
    s2 = (a1 - b1) / cross
    s3 = Fraction(1)
    if s1 * a1 * b1 + s2 * a2 * b2 + s3 != 0:
        return None
    if s1 <= 0 or s2 <= 0:
        return None
    return (s1, s2, s3)


# --------------------------------------------------------------------------
# Full parameter system for twist-free cylinder triples

N_GRID_RANGE = (-2, -1, 0, 1, 2)


def gaussian_system_check(cfs, matrix: StatMatrix):
    """All linear identities the functional equation imposes on the parameters.

    Requires a reduced 3x3 matrix and twist-free cylinder bundles.  Returns a
    dict of absolute residuals, one per named identity; the "n-grid" entry is
    the worst value of the remaining pure-integer identity over the cube
    {-2..2}^3.  Everything is zero exactly when the parameter family
    satisfies the independence equation.
    """
    if len(cfs) != 3 or not all(isinstance(cf, CylinderCF) for cf in cfs):
        raise ValueError("expected three cylinder characteristic functions")
    if any(cf.twist != 0 for cf in cfs):
        raise ValueError("the parameter system applies to twist-free bundles only")
    a1, a2, b1, b2, c1, c2, d1, d2, p1, p2, q1, q2 = reduced_coefficients(matrix)
    s1, s2, s3 = (cf.sigma for cf in cfs)
    k1, k2, k3 = (cf.kappa for cf in cfs)
    l1, l2, l3 = (cf.lam for cf in cfs)

    residuals = {
        "sigma-a": s1 * a1 + s2 * a2 + s3,
        "sigma-b": s1 * b1 + s2 * b2 + s3,
        "sigma-ab": s1 * a1 * b1 + s2 * a2 * b2 + s3,
        "kappa-a": k1 * a1 + k2 * a2 + k3,
        "kappa-b": k1 * b1 + k2 * b2 + k3,
        "shift-c": 2 * s1 * c1 + 2 * s2 * c2 + k1 * p1 + k2 * p2 + k3,
        "shift-d": 2 * s1 * d1 + 2 * s2 * d2 + k1 * q1 + k2 * q2 + k3,
        "shift-ad": 2 * s1 * a1 * d1 + 2 * s2 * a2 * d2 + k1 * a1 * q1 + k2 * a2 * q2 + k3,
        "shift-bc": 2 * s1 * b1 * c1 + 2 * s2 * b2 * c2 + k1 * b1 * p1 + k2 * b2 * p2 + k3,
    }

    kc = k1 * c1 + k2 * c2
    kd = k1 * d1 + k2 * d2
    cross = (2 * s1 * c1 * d1 + 2 * s2 * c2 * d2
             + k1 * (c1 * q1 + d1 * p1) + k2 * (c2 * q2 + d2 * p2))
    lam_total = l1 + l2 + l3
    worst = 0
    for n1 in N_GRID_RANGE:
        for n2 in N_GRID_RANGE:
            for n3 in N_GRID_RANGE:
                v = (n1 * n2 * kc + n1 * n3 * kd + n2 * n3 * cross
                     + l1 * (n1 + p1 * n2 + q1 * n3) ** 2
                     + l2 * (n1 + p2 * n2 + q2 * n3) ** 2
                     + l3 * (n1 + n2 + n3) ** 2
                     - lam_total * (n1 * n1 + n2 * n2 + n3 * n3))
                if abs(v) > abs(worst):
                    worst = v
    residuals["n-grid"] = worst
    return {name: abs(float(value)) for name, value in residuals.items()}


# --------------------------------------------------------------------------
# Step-subgroup classifier


class SubgroupTag(str, Enum):
    """The two dual subgroups that can arise as difference ranges."""

    REAL_AXIS = "real-axis"   # R x {0}
    DOUBLED = "doubled"       # {2y} = R x 2Z

    def contains(self, y: DualPoint) -> bool:
        if self is SubgroupTag.REAL_AXIS:
            return y.n == 0
        return y.n % 2 == 0

    def step_units(self):
        """Representative difference steps, as (s-units, n) pairs inside the subgroup."""
        if self is SubgroupTag.REAL_AXIS:
            return ((1, 0), (2, 0))
        return ((1, 2), (2, -2), (0, 2))


_CASE_TABLE = {
    (SubgroupTag.REAL_AXIS, SubgroupTag.REAL_AXIS, SubgroupTag.REAL_AXIS): 1,
    (SubgroupTag.REAL_AXIS, SubgroupTag.DOUBLED, SubgroupTag.DOUBLED): 2,
    (SubgroupTag.DOUBLED, SubgroupTag.REAL_AXIS, SubgroupTag.DOUBLED): 3,
    (SubgroupTag.DOUBLED, SubgroupTag.DOUBLED, SubgroupTag.REAL_AXIS): 4,
    (SubgroupTag.DOUBLED, SubgroupTag.DOUBLED, SubgroupTag.DOUBLED): 5,
}


@dataclass(frozen=True)
class StepSubgroups:
    """Difference-range subgroups attached to the two nontrivial columns.

    col1 is generated by (entry - I) over the first column, col2 over the
    second, and cross by the differences between the two columns' rows.
    """

    col1: SubgroupTag
    col2: SubgroupTag
    cross: SubgroupTag

    def case_index(self) -> int:
        key = (self.col1, self.col2, self.cross)
        if key not in _CASE_TABLE:
            raise DegenerateFormError(f"subgroup combination {key} is not realizable")
        return _CASE_TABLE[key]

    def as_tuple(self):
        return (self.col1, self.col2, self.cross)


def classify_step_subgroups(matrix: StatMatrix) -> StepSubgroups:
    """Classify the three difference-range subgroups of a reduced 3x3 matrix.

    Each is either the real axis R x {0} or the doubled subgroup R x 2Z.  The
    degenerate situations in which a range fails to be one of the two (both
    multipliers of a column equal to 1, or both columns sharing multipliers)
    raise DegenerateFormError.
    """
    a1, a2, b1, b2, _c1, _c2, _d1, _d2, p1, p2, q1, q2 = reduced_coefficients(matrix)
    if a1 == 1 and b1 == 1:
        raise DegenerateFormError("column-1 condition violated: a1 = b1 = 1")
    if a2 == 1 and b2 == 1:
        raise DegenerateFormError("column-2 condition violated: a2 = b2 = 1")
    if a1 == a2 and b1 == b2:
        raise DegenerateFormError("columns share both multipliers: a1 = a2 and b1 = b2")
    col1 = SubgroupTag.REAL_AXIS if (p1 == 1 and q1 == 1) else SubgroupTag.DOUBLED
    col2 = SubgroupTag.REAL_AXIS if (p2 == 1 and q2 == 1) else SubgroupTag.DOUBLED
    cross = SubgroupTag.REAL_AXIS if (p1 == p2 and q1 == q2) else SubgroupTag.DOUBLED
    tags = StepSubgroups(col1, col2, cross)
    tags.case_index()
    return tags


# --------------------------------------------------------------------------
# Support certificate for the symmetrized convolution


def support_identity_gap(a1, a2, b1, b2) -> Fraction:
    """Exact gap of the quartic support identity; zero whenever the cubic identity holds.

    (a2*b1 - a1*b2) * ((1-b2)*(1-a2)*(a1-b1) + (1-b1)*(1-a1)*(b2-a2))
        + (b2-b1)*(a2-a1)*(a1-b1)*(b2-a2)
    """
    a1, a2, b1, b2 = (Fraction(v) for v in (a1, a2, b1, b2))
    lhs = (a2 * b1 - a1 * b2) * ((1 - b2) * (1 - a2) * (a1 - b1)
                                 + (1 - b1) * (1 - a1) * (b2 - a2))
    rhs = -(b2 - b1) * (a2 - a1) * (a1 - b1) * (b2 - a2)
    return lhs - rhs


def symmetrized_convolution(cfs) -> CylinderCF:
    """CF of the convolution of the symmetrizations of the given bundles."""
    out = None
    for cf in cfs:
        sym = symmetrize(cf)
        out = sym if out is None else convolve(out, sym)
    return out


def nu_support_check(cfs, matrix: StatMatrix, tol: float = 1e-10) -> bool:
    """Certify that the symmetrized convolution degenerates onto a line.

    Checks 4*sigma*lam = kappa^2 for the symmetrized convolution (so its
    support is a one-parameter subgroup) and, independently, the exact quartic
    identity on the matrix multipliers that makes the degeneration automatic.
    """
    nu = symmetrized_convolution(cfs)
    gap = 4 * nu.sigma * nu.lam - nu.kappa * nu.kappa
    if abs(float(gap)) > tol:
        return False
    a1, a2, b1, b2, *_rest = reduced_coefficients(matrix)
    if is_exact(a1, a2, b1, b2):
        return support_identity_gap(a1, a2, b1, b2) == 0
    return abs(float(support_identity_gap(Fraction(a1), Fraction(a2),
                                          Fraction(b1), Fraction(b2)))) <= tol


# --------------------------------------------------------------------------
# Reduction to the normal form


@dataclass(frozen=True)
class NormalFormTransform:
    """Record of the substitutions used to reduce a statistic matrix.

    col_autos[j] is applied to variable j (new xi_j = col_autos[j] xi_j), and
    row_autos[i] left-multiplies statistic i; neither changes independence.
    """

    col_autos: tuple
    row_autos: tuple

    def transform_cfs(self, cfs):
        return tuple(transform(cf, g) for cf, g in zip(cfs, self.col_autos))


def reduce_to_normal_form(matrix: StatMatrix):
    """Rewrite the statistics so the first row and the last column are identities.

    Returns (reduced matrix, transform record).  Substituting each variable by
    its image under the first-row entry clears row one; composing each later
    statistic with the inverse of its last-column entry clears the column.
    The transformed family is independent iff the original one is.

    Entries carry the matrix shared between a point automorphism and its
    adjoint, and the stored product is the dual-side one, so the point-side
    composition delta . gamma has stored matrix m(gamma) @ m(delta): variable
    substitutions multiply entries on the left, statistic recombinations on
    the right.
    """
    n = matrix.n
    col = tuple(matrix.entry(0, j) for j in range(n))
    col_inv = tuple(g.inverse() for g in col)
    rows1 = [[col_inv[j] @ matrix.entry(i, j) for j in range(n)] for i in range(n)]
    row_autos = [CylinderAuto.identity()]
    for i in range(1, n):
        row_autos.append(rows1[i][n - 1].inverse())
    reduced = StatMatrix.from_rows(
        [[rows1[i][j] @ row_autos[i] for j in range(n)] for i in range(n)]
    )
    return reduced, NormalFormTransform(col_autos=col, row_autos=tuple(row_autos))
