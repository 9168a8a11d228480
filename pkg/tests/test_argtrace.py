"""Argument-tracking and winding-number tests.

Polynomials with known root multisets give exact winding oracles; a
numerical quadrature of zeta''/zeta' gives an independent oracle for a
zeta' argument sweep.  The structural invariants (reversal, additivity,
refinement invariance, loop quantization) are asserted directly.
"""

from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpc

from zdl.argtrace import (
    EdgeCache,
    RectRegion,
    TraceStats,
    TrackedFn,
    arg_from_plus_infinity,
    fn_completed_zeta,
    fn_norm_deriv,
    fn_polynomial,
    fn_zeta_deriv,
    track_arg,
    winding_number,
)
from zdl.errors import FarPointNotDominated, ZeroOnPath

TWO_PI = 2 * math.pi


def counting(fn: TrackedFn) -> tuple:
    """Wrap a TrackedFn so evaluations are counted (for cache tests)."""
    hits = [0]

    def ev(s, pol):
        hits[0] += 1
        return fn.evaluate(s, pol)

    return TrackedFn(fn.name, ev, fn.poles), hits


# roots on a coarse grid offset from rectangle edges, so hypothesis can
# never place one on a contour
root_coord = st.integers(min_value=0, max_value=7).map(lambda n: n / 8 + 1 / 16)
root_strategy = st.tuples(root_coord, root_coord).map(lambda p: complex(*p))


class TestPolynomialWinding:
    @settings(max_examples=40, deadline=None)
    @given(
        inside=st.lists(root_strategy, min_size=0, max_size=4),
        outside=st.lists(root_strategy.map(lambda r: r + 3), min_size=0, max_size=3),
    )
    def test_count_equals_roots_inside(self, inside, outside, policy):
        fn = fn_polynomial(tuple(inside) + tuple(outside), "poly")
        rect = RectRegion(-0.25, 1.25, -0.25, 1.25)
        rep = winding_number(fn, rect, policy, perturb=False)
        assert rep.count == len(inside)
        assert rep.residual <= 1e-6

    @settings(max_examples=25, deadline=None)
    @given(roots=st.lists(root_strategy, min_size=1, max_size=4))
    def test_additivity_across_a_shared_edge(self, roots, policy):
        fn = fn_polynomial(roots, "poly")
        cache = EdgeCache()
        whole = RectRegion(-0.25, 1.25, -0.25, 1.25)
        lo = RectRegion(-0.25, 1.25, -0.25, 0.5)
        hi = RectRegion(-0.25, 1.25, 0.5, 1.25)
        w = winding_number(fn, whole, policy, cache, perturb=False).count
        assert (
            winding_number(fn, lo, policy, cache, perturb=False).count
            + winding_number(fn, hi, policy, cache, perturb=False).count
            == w
        )

    def test_multiplicity_is_counted(self, policy):
        fn = fn_polynomial((0.5 + 0.5j, 0.5 + 0.5j, 0.5 + 0.5j), "triple")
        rep = winding_number(fn, RectRegion(0, 1, 0, 1), policy, perturb=False)
        assert rep.count == 3

    def test_clockwise_traversal_negates(self, policy):
        fn = fn_polynomial((0.5 + 0.5j,), "one")
        bl, br, tr, tl = (0j, 1 + 0j, 1 + 1j, 1j)
        ccw = track_arg(fn, [bl, br, tr, tl, bl], policy)
        cw = track_arg(fn, [bl, tl, tr, br, bl], policy)
        assert abs(ccw.total_delta - TWO_PI) < 1e-9
        assert abs(cw.total_delta + TWO_PI) < 1e-9


class TestPathInvariants:
    def test_reversal_cancels_exactly_through_cache(self, policy):
        fn = fn_polynomial((0.3 + 0.4j, 0.9 + 0.1j), "poly")
        cache = EdgeCache()
        there = track_arg(fn, [0j, 1 + 1j], policy, cache)
        back = track_arg(fn, [1 + 1j, 0j], policy, cache)
        assert there.total_delta + back.total_delta == 0.0

    def test_reversal_without_cache_is_tiny(self, policy):
        fn = fn_polynomial((0.3 + 0.4j,), "poly")
        there = track_arg(fn, [0j, 1 + 1j], policy)
        back = track_arg(fn, [1 + 1j, 0j], policy)
        assert abs(there.total_delta + back.total_delta) < 1e-12

    def test_waypoint_refinement_preserves_delta(self, policy):
        fn = fn_polynomial((0.2 + 0.7j, 0.8 + 0.2j), "poly")
        direct = track_arg(fn, [0j, 1 + 1j], policy)
        split = track_arg(fn, [0j, 0.5 + 0.5j, 1 + 1j], policy)
        assert abs(direct.total_delta - split.total_delta) < 1e-9

    def test_phase_steps_stay_bounded(self, policy):
        fn = fn_polynomial((0.5 + 0.1j,), "poly")
        path = track_arg(fn, [0j, 1 + 0j, 1 + 1j], policy)
        assert path.phase_steps_ok()
        joint = [pt for pt, _ in path.samples if pt == 1 + 0j]
        assert len(joint) == 1  # waypoint joins emitted once

    def test_two_waypoints_required(self, policy):
        with pytest.raises(ValueError):
            track_arg(fn_polynomial((0j,), "p"), [1 + 1j], policy)

    def test_loop_delta_quantizes(self, policy):
        fn = fn_polynomial((0.4 + 0.3j, 0.6 + 0.7j, 5 + 5j), "poly")
        bl, br, tr, tl = (0j, 1 + 0j, 1 + 1j, 1j)
        loop = track_arg(fn, [bl, br, tr, tl, bl], policy)
        assert abs(loop.total_delta - 2 * TWO_PI) < 1e-9


class TestZetaOracles:
    def test_zeta_prime_sweep_matches_quadrature(self, policy):
        # d/dt arg zeta'(2+it) = Im(i zeta''/zeta') = Re(zeta''/zeta');
        # the tracker must reproduce the quadrature far below tolerance
        with mpmath.workdps(30):
            oracle = mpmath.quad(
                lambda t: (
                    mpmath.zeta(mpc(2, t), derivative=2)
                    / mpmath.zeta(mpc(2, t), derivative=1)
                ).real,
                [10, 20],
            )
        path = track_arg(fn_zeta_deriv(1), [2 + 10j, 2 + 20j], policy)
        assert abs(path.total_delta - float(oracle)) < 1e-9

    def test_completed_zeta_is_real_between_line_zeros(self, policy):
        # h(s) zeta(s) is real on the critical line; between consecutive
        # ordinates it keeps one sign, so its argument cannot move
        path = track_arg(fn_completed_zeta(), [mpc(0.5, 14.2), mpc(0.5, 20.9)], policy)
        assert abs(path.total_delta) < 1e-6

    def test_pole_flyby_does_not_alias(self, policy):
        # zeta' has a double pole at s=1; the bottom edge passes it at
        # distance 0.99 and the true argument swing just exceeds 2 pi.
        # Without a pole-aware step bound the sweep aliases to ~0 and the
        # closed contour miscounts by -1 while still quantizing cleanly.
        fn = fn_zeta_deriv(1)
        edge = track_arg(fn, [mpc(1e-6, 0.01), mpc(3.75, 0.01)], policy)
        assert edge.total_delta > 6.0
        rect = RectRegion(1e-6, 3.75, 0.01, 2.01)
        rep = winding_number(fn, rect, policy, perturb=False)
        assert rep.count == 0

    def test_zero_on_path_raises_with_location(self, policy):
        fn = fn_polynomial((0.5 + 0j,), "onpath")
        with pytest.raises(ZeroOnPath) as exc:
            track_arg(fn, [0j, 1 + 0j], policy)
        assert exc.value.point is not None
        assert abs(exc.value.point - 0.5) < 0.1


class TestWindingMachinery:
    def test_perturbation_ladder_resolves_edge_zero(self, policy):
        fn = fn_polynomial((0.5 + 0j, 0.5 + 0.5j), "edge")
        rect = RectRegion(0, 1, 0, 1)  # one root on the bottom edge
        with pytest.raises(ZeroOnPath):
            winding_number(fn, rect, policy, perturb=False)
        stats = TraceStats()
        rep = winding_number(fn, rect, policy, stats=stats, perturb=True)
        assert rep.perturbed
        assert rep.count == 2  # edge root pushed inside by the outward move
        assert rep.rect.t_min < 0
        assert stats.n_perturbations >= 1

    def test_cache_eliminates_reevaluation(self, policy):
        base = fn_polynomial((0.5 + 0.5j,), "cached")
        fn, hits = counting(base)
        cache = EdgeCache()
        rect = RectRegion(0, 1, 0, 1)
        winding_number(fn, rect, policy, cache, perturb=False)
        first = hits[0]
        assert first > 0
        rep = winding_number(fn, rect, policy, cache, perturb=False)
        assert hits[0] == first
        assert rep.count == 1

    def test_duplicate_cut_points_are_harmless(self, policy):
        fn = fn_polynomial((0.5 + 0.5j,), "cuts")
        rect = RectRegion(0, 1, 0, 1)
        plain = winding_number(fn, rect, policy, perturb=False)
        cut = winding_number(
            fn,
            rect,
            policy,
            perturb=False,
            cut_points={"top": [0.5, 0.5, 0.25], "bottom": [0.5]},
        )
        assert cut.count == plain.count == 1

    def test_degenerate_rect_rejected(self):
        with pytest.raises(ValueError):
            RectRegion(1, 1, 0, 2)
        with pytest.raises(ValueError):
            RectRegion(0, 1, 5, 5)

    def test_stats_accumulate(self, policy):
        fn = fn_polynomial((0.5 + 0.5j,), "stats")
        stats = TraceStats()
        winding_number(fn, RectRegion(0, 1, 0, 1), policy, stats=stats, perturb=False)
        winding_number(fn, RectRegion(2, 3, 0, 1), policy, stats=stats, perturb=False)
        assert stats.n_windings == 2
        assert stats.max_residual() <= 1e-6
        assert stats.n_evals > 0


class TestFarFieldAnchor:
    def test_anchor_near_far_abscissa_is_small(self, policy):
        ag = arg_from_plus_infinity(fn_norm_deriv(1), mpc(29.5, 20), policy)
        assert abs(ag.value) < 1e-3
        assert abs(ag.anchor) < 1e-3
        assert -math.pi / 2 < ag.anchor < math.pi / 2

    def test_point_right_of_far_abscissa_rejected(self, policy):
        with pytest.raises(ValueError):
            arg_from_plus_infinity(fn_norm_deriv(1), mpc(31, 20), policy)

    def test_undominated_far_point_raises(self, policy):
        with pytest.raises(FarPointNotDominated):
            arg_from_plus_infinity(fn_norm_deriv(1), mpc(1, 3), policy, far_sigma=2.0)

    def test_anchored_arg_is_waypoint_split_stable(self, policy):
        a = arg_from_plus_infinity(fn_norm_deriv(1), mpc(0.5, 20), policy)
        b = arg_from_plus_infinity(fn_norm_deriv(1), mpc(0.5, 20), policy, far_sigma=25.0)
        assert abs(a.value - b.value) < 1e-9
