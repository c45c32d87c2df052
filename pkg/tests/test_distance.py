"""Horizontal paths, exact lifts, and the constrained length minimizer."""

import math

import numpy as np
import pytest

from heislab import (
    GroupElement,
    HorizontalPath,
    OptimizerOptions,
    ReducedElement,
    cc_distance,
    cc_distance_reduced,
    distance_between,
    fiber_lower_bound,
    identity,
    lift,
    make_isotropic_form,
    multiply,
    vertical_distance_reference,
    wrap_angle,
)

SQUARE_LOOP = np.array(
    [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]
)


class TestHorizontalPath:
    def test_validation(self):
        with pytest.raises(ValueError):
            HorizontalPath(np.zeros(4))
        with pytest.raises(ValueError):
            HorizontalPath(np.zeros((1, 2)))
        with pytest.raises(ValueError):
            HorizontalPath([[0.0, 0.0], [np.inf, 0.0]])
        with pytest.raises(ValueError):
            HorizontalPath([[0.5, 0.0], [1.0, 0.0]])

    def test_length_and_segments(self):
        p = HorizontalPath([[0.0, 0.0], [3.0, 4.0], [3.0, 5.0]])
        assert p.segments == 2
        assert p.length() == 6.0

    def test_subdivide_preserves_length_and_area(self, iso1):
        p = HorizontalPath([[0.0, 0.0], [1.0, 0.2], [0.3, 1.5], [-0.7, 0.9]])
        q = p.subdivide()
        assert q.segments == 2 * p.segments
        assert q.length() == pytest.approx(p.length(), rel=1e-14)
        assert lift(iso1, q).endpoint.c == pytest.approx(
            lift(iso1, p).endpoint.c, rel=1e-14, abs=1e-15
        )
        assert np.array_equal(q.nodes[0::2], p.nodes)

    def test_resample(self):
        p = HorizontalPath([[0.0, 0.0], [1.0, 1.0]])
        q = p.resample(4)
        assert q.segments == 4
        assert np.allclose(q.nodes[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
        assert q.length() == pytest.approx(p.length(), rel=1e-14)
        with pytest.raises(ValueError):
            p.resample(0)


class TestLift:
    def test_unit_square_loop_area(self, iso1):
        lp = lift(iso1, HorizontalPath(SQUARE_LOOP))
        end = lp.endpoint
        assert np.array_equal(end.w, [0.0, 0.0])
        assert end.c == 1.0
        assert np.array_equal(lp.vertical, [0.0, 0.0, 0.5, 1.0, 1.0])

    def test_orientation_flips_sign(self, iso1):
        lp = lift(iso1, HorizontalPath(SQUARE_LOOP[::-1] - SQUARE_LOOP[-1]))
        assert lp.endpoint.c == -1.0

    def test_dimension_mismatch(self, iso2):
        with pytest.raises(ValueError):
            lift(iso2, HorizontalPath(SQUARE_LOOP))

    def test_lift_agrees_with_group_product(self, iso2):
        rng = np.random.default_rng(51)
        nodes = np.vstack([np.zeros(4), np.cumsum(rng.standard_normal((6, 4)), axis=0)])
        lp = lift(iso2, HorizontalPath(nodes))
        g = identity(4)
        for k in range(1, nodes.shape[0]):
            g = multiply(iso2, g, GroupElement(nodes[k] - nodes[k - 1], 0.0))
        assert np.allclose(g.w, lp.endpoint.w, rtol=0, atol=1e-12)
        assert g.c == pytest.approx(lp.endpoint.c, rel=1e-12, abs=1e-12)


class TestCcDistance:
    def test_straight_chord_is_exact(self, iso1):
        res = cc_distance(iso1, GroupElement([3.0, 4.0], 0.0), K=64)
        assert res.converged
        assert res.c_residual == 0.0
        assert res.estimate == 5.0
        assert np.array_equal(res.path.nodes[-1], [3.0, 4.0])
        est, path = res
        assert est == 5.0 and path.segments == 64

    def test_zero_target_shortcut(self, iso1):
        res = cc_distance(iso1, GroupElement([0.0, 0.0], 0.0), K=16)
        assert res.estimate == 0.0 and res.converged
        assert res.path.segments == 16 and not np.any(res.path.nodes)

    def test_bad_inputs(self, iso1):
        with pytest.raises(ValueError):
            cc_distance(iso1, GroupElement([1.0, 2.0], 0.0), K=1)
        with pytest.raises(ValueError):
            cc_distance(iso1, GroupElement([1.0, 2.0, 3.0, 4.0], 0.0), K=8)

    def test_vertical_target_matches_circle_law(self, iso1):
        ref = vertical_distance_reference(iso1, 1.0)
        assert ref == 2.0 * math.sqrt(math.pi)
        res = cc_distance(iso1, GroupElement([0.0, 0.0], 1.0), K=64)
        assert res.converged
        # a polygon cannot beat the smooth circle and a regular 64-gon
        # is within about 0.1% of it
        assert ref - 1e-3 <= res.estimate <= 1.005 * ref
        assert lift(iso1, res.path).endpoint.c == pytest.approx(1.0, abs=2e-6)

    def test_estimate_dominates_lower_bound(self, iso1):
        rng = np.random.default_rng(52)
        for _ in range(4):
            w = 1.5 * rng.standard_normal(2)
            c = 2.0 * rng.standard_normal()
            res = cc_distance(iso1, GroupElement(w, c), K=32)
            assert res.converged
            bound = fiber_lower_bound(iso1, float(np.linalg.norm(w)), c)
            assert res.estimate >= bound - 1e-9

    def test_refinement_never_hurts(self, iso1):
        target = GroupElement([1.2, -0.7], 0.8)
        coarse = cc_distance(iso1, target, K=16)
        fine = cc_distance(iso1, target, K=64)
        assert fine.converged and coarse.converged
        assert fine.estimate <= coarse.estimate + 1e-6

    def test_returned_path_realizes_the_target(self, iso1):
        target = GroupElement([0.9, 0.4], -0.6)
        res = cc_distance(iso1, target, K=32)
        end = lift(iso1, res.path).endpoint
        assert np.allclose(end.w, target.w, atol=1e-12)
        assert abs(end.c - target.c) <= 1e-6 * (1.0 + abs(target.c))
        assert res.path.length() == res.estimate


class TestFiberBound:
    def test_components(self, iso1):
        assert fiber_lower_bound(iso1, 2.0, 0.0) == 2.0
        pure = fiber_lower_bound(iso1, 0.0, 1.0)
        assert pure == vertical_distance_reference(iso1, 1.0)
        assert fiber_lower_bound(iso1, 0.0, 0.0) == 0.0
        # large |w| makes the isoperimetric part vacuous
        assert fiber_lower_bound(iso1, 10.0, 0.1) == 10.0

    def test_weighted_form_uses_largest_singular_value(self):
        form = make_isotropic_form(1)
        strong = pytest.importorskip("heislab").make_nonisotropic_form((2.0,))
        assert fiber_lower_bound(strong, 0.0, 1.0) == fiber_lower_bound(
            form, 0.0, 0.5
        )


class TestReducedDistance:
    def test_unwinds_near_full_turn(self, iso1):
        theta = 2.0 * math.pi - 0.05
        res = cc_distance_reduced(iso1, ReducedElement([0.0, 0.0], theta), K=32)
        assert res.winning_k == -1
        assert res.converged
        ref = vertical_distance_reference(iso1, 0.05)
        assert ref - 1e-3 <= res.estimate <= 1.01 * ref
        est, k = res
        assert est == res.estimate and k == -1
        ks = [k for k, _ in res.candidates]
        assert ks == list(range(-3, 4))
        evaluated = {k: e for k, e in res.candidates if e is not None}
        assert -1 in evaluated  # the winner was actually solved
        assert any(e is None for _, e in res.candidates)  # pruning happened

    def test_never_exceeds_full_distance(self, iso1):
        rng = np.random.default_rng(53)
        for _ in range(3):
            w = rng.standard_normal(2)
            theta = float(rng.uniform(0.0, 2.0 * math.pi))
            red = cc_distance_reduced(iso1, ReducedElement(w, theta), K=16, k_window=2)
            for c in (theta, theta - 2.0 * math.pi):
                full = cc_distance(iso1, GroupElement(w, c), K=16)
                assert red.estimate <= full.estimate + 1e-6

    def test_zero_window_is_plain_distance(self, iso1):
        target = ReducedElement([0.5, 0.3], 1.2)
        red = cc_distance_reduced(iso1, target, K=16, k_window=0)
        full = cc_distance(iso1, GroupElement([0.5, 0.3], 1.2), K=16)
        assert red.winning_k == 0
        assert red.estimate == full.estimate
        assert red.candidates == ((0, full.estimate),)

    def test_negative_window_rejected(self, iso1):
        with pytest.raises(ValueError):
            cc_distance_reduced(iso1, ReducedElement([0.0, 0.0], 1.0), k_window=-1)


class TestBetweenPoints:
    def test_identity_base_matches_cc_distance(self, iso1):
        g = GroupElement([0.8, -0.3], 0.4)
        a = distance_between(iso1, identity(2), g, K=16)
        b = cc_distance(iso1, g, K=16)
        assert a.estimate == b.estimate

    def test_left_invariance_and_symmetry(self, iso1):
        g1 = GroupElement([0.6, 0.1], -0.2)
        g2 = GroupElement([-0.4, 0.8], 0.5)
        h = GroupElement([0.3, -0.9], 0.7)
        d12 = distance_between(iso1, g1, g2, K=32).estimate
        d21 = distance_between(iso1, g2, g1, K=32).estimate
        dh = distance_between(
            iso1, multiply(iso1, h, g1), multiply(iso1, h, g2), K=32
        ).estimate
        assert abs(d12 - d21) <= 2e-3 * (1.0 + d12)
        assert abs(d12 - dh) <= 2e-3 * (1.0 + d12)


class TestOptions:
    def test_contract_defaults(self):
        opt = OptimizerOptions()
        assert opt.coarse_segments == 16
        assert opt.c_tol_rel == 1e-6
        assert opt.bulge_scales == (1.0, 0.5)

    def test_custom_budget_still_converges(self, iso1):
        opt = OptimizerOptions(coarse_segments=8, al_rounds=8)
        res = cc_distance(iso1, GroupElement([0.0, 0.0], 0.5), K=16, opt=opt)
        assert res.converged
        ref = vertical_distance_reference(iso1, 0.5)
        assert res.estimate <= 1.02 * ref

    def test_starved_budget_reports_honestly(self, iso1):
        opt = OptimizerOptions(coarse_segments=8, al_rounds=6)
        res = cc_distance(iso1, GroupElement([0.0, 0.0], 0.5), K=16, opt=opt)
        # too few multiplier rounds: the flag must say so
        assert not res.converged
        assert abs(res.c_residual) > 1e-6 * 1.5
