"""Independence residual, condition suite, parameter system, classifiers."""

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import REF_COEFFS, random_rejected_coefficients, random_valid_coefficients
from cylinderstat.charfn import CylinderCF, TorusCF, convolve
from cylinderstat.families import line_gaussian_family
from cylinderstat.groups import CylinderAuto, DualPoint
from cylinderstat.independence import (DegenerateFormError, SingularSystemError,
                                       StatMatrix, SubgroupTag,
                                       classify_step_subgroups,
                                       coefficient_conditions, cubic_identity,
                                       default_grid, gaussian_system_check,
                                       independence_residual, nu_support_check,
                                       reduce_to_normal_form, solve_sigmas,
                                       support_identity_gap)


def _perturb_entry(matrix, i, j, dc):
    rows = [list(r) for r in matrix.rows]
    e = rows[i][j]
    rows[i][j] = CylinderAuto(e.a, e.c + dc, e.p)
    return StatMatrix.from_rows(rows)


class TestGrids:
    def test_default_sizes(self):
        assert len(default_grid(3, "cylinder")) == 35 ** 3
        assert len(default_grid(4, "torus")) == 5 ** 4
        assert len(default_grid(2, "torus")) == 25

    def test_cap_and_determinism(self):
        g1 = default_grid(3, "cylinder", dense=True, cap=50_000, seed=9)
        g2 = default_grid(3, "cylinder", dense=True, cap=50_000, seed=9)
        assert len(g1) == 50_000
        assert g1 == g2
        g3 = default_grid(3, "cylinder", dense=True, cap=50_000, seed=10)
        assert g1 != g3

    def test_covers_both_parities(self):
        grid = default_grid(2, "torus", cap=10)
        assert any(any(n % 2 for n in tup) for tup in grid)


class TestResidual:
    def test_reference_family_exact_zero(self, ref_family):
        grid = default_grid(3, "cylinder", cap=5000)
        assert independence_residual(ref_family.cfs, ref_family.matrix, grid) == 0.0

    def test_degenerate_members(self):
        cfs = tuple(CylinderCF(0, tau=j, theta=j) for j in range(3))
        m = StatMatrix.from_rows([
            [CylinderAuto(2, 1, -1)] * 3,
            [CylinderAuto(1, 0, 1), CylinderAuto(3, 2, 1), CylinderAuto(1, 1, -1)],
            [CylinderAuto(-1, 0, -1)] * 3,
        ])
        assert independence_residual(cfs, m, default_grid(3, "cylinder", cap=2000)) == 0.0

    def test_worker_invariance(self, ref_family):
        grid = default_grid(3, "cylinder", cap=20_000)
        bad = _perturb_entry(ref_family.matrix, 2, 0, Fraction(1, 10))
        r1, w1 = independence_residual(ref_family.cfs, bad, grid, workers=1,
                                       return_worst=True)
        r3, w3 = independence_residual(ref_family.cfs, bad, grid, workers=3,
                                       return_worst=True)
        assert r1 == r3 and w1 == w3 and r1 > 0

    def test_column_permutation_invariance(self, ref_family):
        grid = default_grid(3, "cylinder", cap=3000)
        perm = (2, 0, 1)
        m2 = ref_family.matrix.permuted_columns(perm)
        cfs2 = tuple(ref_family.cfs[j] for j in perm)
        r1 = independence_residual(ref_family.cfs, ref_family.matrix, grid)
        r2 = independence_residual(cfs2, m2, grid)
        assert r1 == r2 == 0.0

    def test_shift_invariance_on_symmetrized(self, ref_family):
        from cylinderstat.charfn import symmetrize
        grid = default_grid(3, "cylinder", cap=3000)
        sym = tuple(symmetrize(cf) for cf in ref_family.cfs)
        r0 = independence_residual(sym, ref_family.matrix, grid)
        shifted = tuple(convolve(cf, CylinderCF(0, tau=Fraction(j), theta=Fraction(j)))
                        for j, cf in enumerate(sym))
        r1 = independence_residual(shifted, ref_family.matrix, grid)
        assert abs(r1 - r0) <= 1e-12
        assert r0 == 0.0

    def test_cross_validates_system_check(self, ref_family):
        # Residual zero <=> every parameter identity zero, on the same family
        # and on a perturbation of it.
        grid = default_grid(3, "cylinder", cap=3000)
        ok_sys = gaussian_system_check(ref_family.cfs, ref_family.matrix)
        assert max(ok_sys.values()) == 0.0
        bad = _perturb_entry(ref_family.matrix, 2, 0, Fraction(1, 10))
        bad_sys = gaussian_system_check(ref_family.cfs, bad)
        bad_res = independence_residual(ref_family.cfs, bad, grid)
        assert max(bad_sys.values()) > 1e-12 and bad_res > 1e-12

    def test_mismatched_sizes(self, ref_family):
        with pytest.raises(ValueError):
            independence_residual(ref_family.cfs[:2], ref_family.matrix)

    def test_torus_needs_sign_matrix(self):
        cfs = (TorusCF(1), TorusCF(1))
        m = StatMatrix.from_rows([[CylinderAuto(2, 0, 1)] * 2] * 2)
        with pytest.raises(ValueError):
            independence_residual(cfs, m, [(0, 1)])

    def test_float_inputs_small_residual(self):
        fam = line_gaussian_family(1, *REF_COEFFS)
        cfs = tuple(CylinderCF(float(c.sigma), float(c.kappa), float(c.lam))
                    for c in fam.cfs)
        rows = [[CylinderAuto(float(e.a), float(e.c), e.p) for e in row]
                for row in fam.matrix.rows]
        r = independence_residual(cfs, StatMatrix.from_rows(rows),
                                  default_grid(3, "cylinder", cap=3000))
        assert r <= 1e-12

    def test_exact_and_float_paths_agree_off_zero(self, ref_family):
        # The scaled-integer scan and the generic float scan are two routes
        # to the same residual; compare them on a genuinely failing family.
        grid = default_grid(3, "cylinder", cap=3000)
        bad = _perturb_entry(ref_family.matrix, 2, 0, Fraction(1, 10))
        r_exact = independence_residual(ref_family.cfs, bad, grid)
        cfs_f = tuple(CylinderCF(float(c.sigma), float(c.kappa), float(c.lam))
                      for c in ref_family.cfs)
        rows_f = [[CylinderAuto(float(e.a), float(e.c), e.p) for e in row]
                  for row in bad.rows]
        grid_f = [tuple(DualPoint(float(y.s), y.n) for y in tup) for tup in grid]
        r_float = independence_residual(cfs_f, StatMatrix.from_rows(rows_f), grid_f)
        assert r_exact > 1.0
        assert r_float == pytest.approx(r_exact, rel=1e-12)

    def test_twisted_cylinder_zero_sum_twists_cancel(self):
        # Same-parity columns plus zero-sum twists cancel identically, so the
        # parameter-level equation holds even though twisted members with
        # positive twist are not genuine probability measures.
        cfs = tuple(CylinderCF(Fraction(1), 0, 0, twist=t)
                    for t in (Fraction(1, 20), Fraction(1, 20), Fraction(-1, 10)))
        ident = CylinderAuto.identity()
        m = StatMatrix.from_rows([
            [ident] * 3,
            [CylinderAuto(2, 0, 1), CylinderAuto(-3, 0, 1), ident],
            [CylinderAuto(Fraction(-4, 5), 0, 1), CylinderAuto(Fraction(-1, 5), 0, 1), ident],
        ])
        assert independence_residual(cfs, m, default_grid(3, "cylinder", cap=2000)) == 0.0

    def test_twisted_cylinder_exact_path(self):
        # Twist terms flow through the scaled-integer scan too.
        cfs = tuple(CylinderCF(Fraction(1), 0, 0, twist=t)
                    for t in (Fraction(1, 20), Fraction(1, 20), Fraction(1, 10)))
        ident = CylinderAuto.identity()
        m = StatMatrix.from_rows([
            [ident] * 3,
            [CylinderAuto(2, 0, 1), CylinderAuto(-3, 0, 1), ident],
            [CylinderAuto(Fraction(-4, 5), 0, 1), CylinderAuto(Fraction(-1, 5), 0, 1), ident],
        ])
        grid = default_grid(3, "cylinder", cap=2000)
        r_exact = independence_residual(cfs, m, grid)
        cfs_f = tuple(CylinderCF(1.0, 0.0, 0.0, twist=float(c.twist)) for c in cfs)
        r_float = independence_residual(cfs_f, m, grid)
        assert r_exact > 0  # twisted members under these statistics are dependent
        assert r_float == pytest.approx(r_exact, rel=1e-9)


class TestConditions:
    def test_reference_tuple(self):
        rep = coefficient_conditions(*REF_COEFFS)
        assert rep.cubic == 0
        assert rep.sign_row == 2
        assert rep.distinct_a and rep.distinct_b
        assert rep.cross_det == Fraction(14, 5)
        assert rep.corner_det == Fraction(-42, 5)
        assert rep.all_pass

    def test_rejected_tuple(self):
        rep = coefficient_conditions(1, -2, -2, 1)
        assert rep.cubic == 9
        assert not rep.all_pass

    def test_equal_coefficients(self):
        rep = coefficient_conditions(-2, -2, -3, -3)
        assert not rep.distinct_a and not rep.distinct_b

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            coefficient_conditions(0, 1, 1, 1)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            coefficient_conditions(0.5, 1, 1, 1)


class TestSolver:
    def test_reference_solution(self):
        assert solve_sigmas(*REF_COEFFS) == (1, 1, 1)

    def test_third_equation_rejects(self):
        assert solve_sigmas(1, -2, -2, 1) is None

    def test_positivity_rejects(self):
        # All-positive coefficients force a nonpositive component.
        assert solve_sigmas(2, 3, 4, 5) is None

    def test_singular_cross_determinant(self):
        with pytest.raises(SingularSystemError):
            solve_sigmas(1, 2, 2, 4)

    def test_solver_output_satisfies_conditions(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            coeffs = random_valid_coefficients(rng)
            sigmas = solve_sigmas(*coeffs)
            assert sigmas is not None and all(s > 0 for s in sigmas)
            rep = coefficient_conditions(*coeffs)
            assert rep.all_pass, (coeffs, rep)
            # The solution really solves all three equations.
            a1, a2, b1, b2 = coeffs
            s1, s2, s3 = sigmas
            assert s1 * a1 + s2 * a2 + s3 == 0
            assert s1 * b1 + s2 * b2 + s3 == 0
            assert s1 * a1 * b1 + s2 * a2 * b2 + s3 == 0

    def test_rejected_tuples_fail_cubic(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            coeffs = random_rejected_coefficients(rng)
            assert cubic_identity(*coeffs) != 0 or solve_sigmas(*coeffs) is None


class TestSystemCheck:
    def test_zero_for_reference(self, ref_family):
        res = gaussian_system_check(ref_family.cfs, ref_family.matrix)
        assert set(res) == {"sigma-a", "sigma-b", "sigma-ab", "kappa-a", "kappa-b",
                            "shift-c", "shift-d", "shift-ad", "shift-bc", "n-grid"}
        assert max(res.values()) == 0.0

    def test_zero_for_degenerate(self, ref_family):
        cfs = tuple(CylinderCF(0) for _ in range(3))
        assert max(gaussian_system_check(cfs, ref_family.matrix).values()) == 0.0

    def test_perturbed_d1_linear_response(self, ref_family):
        bad = _perturb_entry(ref_family.matrix, 2, 0, Fraction(1, 10))
        res = gaussian_system_check(ref_family.cfs, bad)
        # 2*sigma_1*delta on the d-row; sigma_1 = 1, delta = 1/10.
        assert res["shift-d"] == pytest.approx(0.2)
        assert res["shift-ad"] == pytest.approx(0.4)
        assert res["sigma-a"] == 0.0

    def test_mixed_signs_still_zero(self):
        fam = line_gaussian_family(1, *REF_COEFFS, p1=-1, q2=-1)
        assert max(gaussian_system_check(fam.cfs, fam.matrix).values()) == 0.0

    def test_rejects_twist(self, ref_family):
        cfs = (replace(ref_family.cfs[0], twist=Fraction(1, 10)),) + ref_family.cfs[1:]
        with pytest.raises(ValueError):
            gaussian_system_check(cfs, ref_family.matrix)

    def test_rejects_non_reduced(self, ref_family):
        m = ref_family.matrix.permuted_columns((2, 0, 1))
        with pytest.raises(ValueError):
            gaussian_system_check(ref_family.cfs, m)


class TestClassifier:
    def test_all_plus_signs(self):
        fam = line_gaussian_family(1, *REF_COEFFS)
        tags = classify_step_subgroups(fam.matrix)
        assert tags.as_tuple() == (SubgroupTag.REAL_AXIS,) * 3
        assert tags.case_index() == 1

    def test_mixed_column_two(self):
        fam = line_gaussian_family(1, *REF_COEFFS, p2=-1)
        tags = classify_step_subgroups(fam.matrix)
        assert tags.as_tuple() == (SubgroupTag.REAL_AXIS, SubgroupTag.DOUBLED,
                                   SubgroupTag.DOUBLED)
        assert tags.case_index() == 2

    def test_equal_negative_signs(self):
        fam = line_gaussian_family(1, *REF_COEFFS, p1=-1, p2=-1, q1=-1, q2=-1)
        tags = classify_step_subgroups(fam.matrix)
        assert tags.as_tuple() == (SubgroupTag.DOUBLED, SubgroupTag.DOUBLED,
                                   SubgroupTag.REAL_AXIS)
        assert tags.case_index() == 4

    def test_sixteen_sign_combinations(self):
        seen_cases = set()
        for p1 in (1, -1):
            for p2 in (1, -1):
                for q1 in (1, -1):
                    for q2 in (1, -1):
                        fam = line_gaussian_family(1, *REF_COEFFS,
                                                   p1=p1, p2=p2, q1=q1, q2=q2)
                        tags = classify_step_subgroups(fam.matrix)
                        expect_col1 = SubgroupTag.REAL_AXIS if p1 == q1 == 1 else SubgroupTag.DOUBLED
                        expect_col2 = SubgroupTag.REAL_AXIS if p2 == q2 == 1 else SubgroupTag.DOUBLED
                        expect_cross = (SubgroupTag.REAL_AXIS
                                        if (p1 == p2 and q1 == q2) else SubgroupTag.DOUBLED)
                        assert tags.as_tuple() == (expect_col1, expect_col2, expect_cross)
                        seen_cases.add(tags.case_index())
        assert seen_cases == {1, 2, 3, 4, 5}

    def test_degenerate_column_raises(self):
        ident = CylinderAuto.identity()
        m = StatMatrix.from_rows([
            [ident] * 3,
            [CylinderAuto(1, Fraction(1), 1), CylinderAuto(-3, 0, 1), ident],
            [CylinderAuto(1, Fraction(2), 1), CylinderAuto(-5, 0, 1), ident],
        ])
        with pytest.raises(DegenerateFormError):
            classify_step_subgroups(m)

    def test_real_axis_inside_both(self):
        fam = line_gaussian_family(1, *REF_COEFFS, p1=-1, q2=-1)
        tags = classify_step_subgroups(fam.matrix)
        for s in (Fraction(1, 2), Fraction(-3)):
            y = DualPoint(s, 0)
            assert tags.col1.contains(y) and tags.cross.contains(y)


class TestSupportCertificate:
    def test_reference(self, ref_family):
        assert nu_support_check(ref_family.cfs, ref_family.matrix)

    def test_identity_gap_zero_on_valid_tuples(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            coeffs = random_valid_coefficients(rng)
            assert support_identity_gap(*coeffs) == 0

    def test_identity_gap_nonzero_generic(self):
        assert support_identity_gap(1, -2, -2, 1) != 0

    def test_reference_values(self):
        a1, a2, b1, b2 = REF_COEFFS
        lhs = (a2 * b1 - a1 * b2) * ((1 - b2) * (1 - a2) * (a1 - b1)
                                     + (1 - b1) * (1 - a1) * (b2 - a2))
        assert lhs == Fraction(588, 25)
        assert support_identity_gap(a1, a2, b1, b2) == 0

    def test_degenerate_members_trivially_pass(self, ref_family):
        cfs = tuple(CylinderCF(0) for _ in range(3))
        assert nu_support_check(cfs, ref_family.matrix)


class TestNormalForm:
    def test_already_reduced(self, ref_family):
        reduced, tr = reduce_to_normal_form(ref_family.matrix)
        assert reduced == ref_family.matrix
        assert all(g.is_identity() for g in tr.row_autos)

    def test_scrambled_roundtrip(self, ref_family):
        rng = np.random.default_rng(3)

        def rand_auto():
            a = Fraction(int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            a *= (-1) ** int(rng.integers(2))
            return CylinderAuto(a, Fraction(int(rng.integers(-4, 5))),
                                int(1 - 2 * rng.integers(2)))

        # Scramble: recombine statistics (keeps independence, CFs unchanged)
        # and substitute variables (CFs transform alongside the columns).
        # Stored products are dual-side, so substitutions multiply on the
        # left and recombinations on the right.
        from cylinderstat.charfn import transform
        row_mults = [rand_auto() for _ in range(3)]
        col_subs = [rand_auto() for _ in range(3)]
        rows = [[col_subs[j] @ ref_family.matrix.entry(i, j) @ row_mults[i]
                 for j in range(3)] for i in range(3)]
        scrambled = StatMatrix.from_rows(rows)
        scrambled_cfs = tuple(transform(cf, g.inverse())
                              for cf, g in zip(ref_family.cfs, col_subs))

        grid = default_grid(3, "cylinder", cap=2000)
        assert independence_residual(scrambled_cfs, scrambled, grid) == 0.0

        reduced, tr = reduce_to_normal_form(scrambled)
        assert reduced.is_reduced()
        new_cfs = tr.transform_cfs(scrambled_cfs)
        assert independence_residual(new_cfs, reduced, grid) == 0.0
        assert max(gaussian_system_check(new_cfs, reduced).values()) == 0.0
