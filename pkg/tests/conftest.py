"""Shared fixtures and generators for the test suite."""

from fractions import Fraction

import numpy as np
import pytest

from cylinderstat import line_gaussian_family, solve_sigmas

REF_COEFFS = (Fraction(2), Fraction(-3), Fraction(-4, 5), Fraction(-1, 5))


@pytest.fixture(scope="session")
def ref_family():
    """The reference line-carried family with slope 1 and unit variances."""
    return line_gaussian_family(1, *REF_COEFFS)


@pytest.fixture(scope="session")
def ref_family_flat():
    """The slope-0 variant (diagonal matrix entries)."""
    return line_gaussian_family(0, *REF_COEFFS)


def random_valid_coefficients(rng: np.random.Generator):
    """One random coefficient tuple accepted by the variance solver.

    Draws (a1, a2, b1) with an admissible sign pattern and solves the
    determinant condition (linear in b2) for the fourth coefficient, retrying
    until the solver reports strictly positive variances.
    """
    sign_rows = ((1, -1, -1), (-1, 1, 1), (-1, 1, -1), (-1, -1, 1), (-1, -1, -1))
    while True:
        sa1, sa2, sb1 = sign_rows[int(rng.integers(len(sign_rows)))]
        a1 = sa1 * Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 12)))
        a2 = sa2 * Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 12)))
        b1 = sb1 * Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 12)))
        den = a1 * (1 - a2) - b1 * (a1 - a2)
        if den == 0:
            continue
        b2 = -a2 * b1 * (a1 - 1) / den
        if b2 == 0 or b2 == a2 or b1 == b2:
            continue
        try:
            if solve_sigmas(a1, a2, b1, b2) is not None:
                return (a1, a2, b1, b2)
        except ValueError:
            continue


def random_rejected_coefficients(rng: np.random.Generator):
    """One random nonzero tuple the solver rejects (generic tuples always are)."""
    while True:
        vals = [Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 10)))
                for _ in range(4)]
        if any(v == 0 for v in vals):
            continue
        a1, a2, b1, b2 = vals
        try:
            if solve_sigmas(a1, a2, b1, b2) is None:
                return (a1, a2, b1, b2)
        except ValueError:
            continue
