"""Tests for flux laws, inverse branches, interface maps, and exponents."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxjump import (
    DomainError,
    FluxPair,
    FluxSpec,
    HypothesisViolationError,
    ParameterError,
    RangeError,
    UndefinedExponentError,
    deriv_inv,
    flux_from_fields,
    flux_to_fields,
    gamma_nu,
    holder_exponent_estimate,
    inv_minus,
    inv_plus,
    max_principle_bound,
    pair_from_fields,
    pair_to_fields,
    power_law_flux,
    shifted_quadratic,
    singular_map_lr,
    singular_map_rl,
    smoothing_exponents,
    speed_bound,
)

FLUXES = st.one_of(
    st.floats(min_value=2.0, max_value=4.0).map(power_law_flux),
    st.floats(min_value=-3.0, max_value=3.0).map(shifted_quadratic),
)


# -- constructors ------------------------------------------------------------

class TestConstructors:
    def test_power_law_quadratic(self):
        f = power_law_flux(2.0)
        assert f.theta == 0.0
        assert f.nondeg_exponent == 1.0
        assert f.eval(1.0) == pytest.approx(1.0)
        assert f.eval(-2.0) == pytest.approx(4.0)
        assert f.deriv(1.0) == pytest.approx(2.0)
        assert f.min_value == 0.0

    def test_power_law_cubic(self):
        f = power_law_flux(3.0)
        assert f.nondeg_exponent == 2.0
        assert f.eval(-2.0) == pytest.approx(8.0)
        assert f.deriv(-1.0) == pytest.approx(-3.0)

    def test_power_law_rejects_sub_quadratic(self):
        with pytest.raises(ParameterError):
            power_law_flux(1.5)

    def test_shifted_quadratic(self):
        g = shifted_quadratic(-1.0)
        assert g.theta == 0.0
        assert g.min_value == pytest.approx(-1.0)
        assert g.eval(2.0) == pytest.approx(3.0)
        assert g.nondeg_exponent == 1.0

    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError):
            FluxSpec(kind="cosine", param=1.0, theta=0.0,
                     nondeg_exponent=1.0, domain_bound=10.0)

    def test_bad_domain_bound_rejected(self):
        with pytest.raises(ParameterError):
            FluxSpec(kind="power_law", param=2.0, theta=0.0,
                     nondeg_exponent=1.0, domain_bound=0.0)

    def test_non_stationary_theta_rejected(self):
        with pytest.raises(ParameterError):
            FluxSpec(kind="power_law", param=2.0, theta=0.5,
                     nondeg_exponent=1.0, domain_bound=10.0)

    def test_nondeg_exponent_below_one_rejected(self):
        with pytest.raises(ParameterError):
            FluxSpec(kind="shifted_quadratic", param=0.0, theta=0.0,
                     nondeg_exponent=0.5, domain_bound=10.0)


# -- structural invariants ---------------------------------------------------

class TestFluxInvariants:
    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES)
    def test_derivative_strictly_increasing(self, flux):
        u = np.linspace(-flux.domain_bound, flux.domain_bound, 257)
        d = flux.deriv(u)
        assert np.all(np.diff(d) > 0.0)

    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES)
    def test_minimizer_is_stationary_and_minimal(self, flux):
        assert abs(flux.deriv(flux.theta)) <= 1e-12
        u = np.linspace(-flux.domain_bound, flux.domain_bound, 257)
        assert np.all(flux.eval(u) >= flux.min_value - 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES)
    def test_midpoint_convexity(self, flux):
        u = np.linspace(-flux.domain_bound, flux.domain_bound, 129)
        mid = 0.5 * (u[:-1] + u[1:])
        assert np.all(flux.eval(mid)
                      <= 0.5 * (flux.eval(u[:-1]) + flux.eval(u[1:])) + 1e-12)

    @pytest.mark.parametrize("r", [2.0, 2.5, 3.0])
    def test_growth_above_minimizer(self, r):
        # For x > y >= theta the flux grows at least like the gap to the
        # nondegeneracy power + 1: |u|**r gives x**r - y**r >= (x - y)**r.
        f = power_law_flux(r)
        rng = np.random.default_rng(7)
        y = rng.uniform(0.0, 4.0, size=200)
        x = y + rng.uniform(1e-6, 4.0, size=200)
        assert np.all(f.eval(x) - f.eval(y) >= (x - y) ** r - 1e-12)

    @pytest.mark.parametrize("r", [2.0, 3.0])
    def test_derivative_nondegeneracy_measured(self, r):
        # |f'(u) - f'(v)| >= C |u - v|**nondeg_exponent with measured C > 0;
        # for |u|**r on the same side of 0 the constant is exactly r.
        f = power_law_flux(r)
        rng = np.random.default_rng(11)
        v = rng.uniform(0.0, 3.0, size=300)
        u = v + rng.uniform(1e-4, 3.0, size=300)
        ratio = (f.deriv(u) - f.deriv(v)) / (u - v) ** f.nondeg_exponent
        assert ratio.min() >= r - 1e-9

    def test_shifted_quadratic_growth(self):
        g = shifted_quadratic(-1.0)
        x, y = 2.0, 0.5
        # second derivative 2, exponent 1: gap**2 lower bound with constant 1
        assert g.eval(x) - g.eval(y) >= (x - y) ** 2


# -- inverse branches --------------------------------------------------------

class TestInverseBranches:
    def test_inv_plus_goldens(self):
        assert inv_plus(power_law_flux(2.0), 4.0) == pytest.approx(2.0, abs=1e-10)
        assert inv_plus(power_law_flux(2.0), 0.0) == pytest.approx(0.0, abs=1e-10)
        assert inv_plus(power_law_flux(3.0), 8.0) == pytest.approx(2.0, abs=1e-10)
        assert inv_plus(shifted_quadratic(-1.0), 0.0) == pytest.approx(1.0, abs=1e-10)

    def test_inv_minus_goldens(self):
        assert inv_minus(shifted_quadratic(-1.0), 0.0) == pytest.approx(-1.0, abs=1e-10)
        assert inv_minus(shifted_quadratic(-1.0), -1.0) == pytest.approx(0.0, abs=1e-10)
        assert inv_minus(power_law_flux(2.0), 9.0) == pytest.approx(-3.0, abs=1e-10)

    def test_inverse_below_minimum_rejected(self):
        with pytest.raises(DomainError):
            inv_plus(power_law_flux(2.0), -0.5)
        with pytest.raises(DomainError):
            inv_minus(shifted_quadratic(-1.0), -1.5)

    def test_inverse_beyond_domain_rejected(self):
        f = power_law_flux(2.0, domain_bound=2.0)
        with pytest.raises(RangeError):
            inv_plus(f, 5.0)
        with pytest.raises(RangeError):
            inv_minus(f, 5.0)

    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES, t=st.floats(min_value=0.0, max_value=1.0))
    def test_inv_plus_round_trip(self, flux, t):
        u = flux.theta + t * (flux.domain_bound - flux.theta)
        assert inv_plus(flux, float(flux.eval(u))) == pytest.approx(u, abs=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES, t=st.floats(min_value=0.0, max_value=1.0))
    def test_inv_minus_round_trip(self, flux, t):
        u = flux.theta - t * (flux.domain_bound + flux.theta)
        assert inv_minus(flux, float(flux.eval(u))) == pytest.approx(u, abs=1e-8)

    def test_deriv_inv_goldens(self):
        assert deriv_inv(power_law_flux(2.0), 2.0) == pytest.approx(1.0, abs=1e-10)
        assert deriv_inv(power_law_flux(2.0), 0.0) == pytest.approx(0.0, abs=1e-10)
        assert deriv_inv(power_law_flux(3.0), 3.0) == pytest.approx(1.0, abs=1e-10)
        assert deriv_inv(shifted_quadratic(5.0), -3.0) == pytest.approx(-1.5, abs=1e-10)

    def test_deriv_inv_out_of_range(self):
        f = power_law_flux(2.0, domain_bound=2.0)
        with pytest.raises(RangeError):
            deriv_inv(f, 100.0)

    @settings(max_examples=50, deadline=None)
    @given(flux=FLUXES, t=st.floats(min_value=-1.0, max_value=1.0))
    def test_deriv_inv_round_trip(self, flux, t):
        xi = t * 0.9 * float(flux.deriv(flux.domain_bound))
        assert flux.deriv(deriv_inv(flux, xi)) == pytest.approx(xi, abs=1e-8)


# -- interface maps ----------------------------------------------------------

class TestInterfaceMaps:
    def test_lr_goldens(self, reference_pair):
        assert singular_map_lr(reference_pair, math.sqrt(2.0)) == pytest.approx(1.0, abs=1e-10)
        assert singular_map_lr(reference_pair, 1.0) == pytest.approx(0.0, abs=1e-10)
        assert singular_map_lr(reference_pair, -math.sqrt(2.0)) == pytest.approx(1.0, abs=1e-10)

    def test_rl_goldens(self, reference_pair):
        assert singular_map_rl(reference_pair, 0.0) == pytest.approx(-1.0, abs=1e-10)
        assert singular_map_rl(reference_pair, math.sqrt(3.0)) == pytest.approx(-2.0, abs=1e-10)

    def test_lr_undefined_inside_wedge(self, reference_pair):
        # left states with g(v) < min f cannot cross
        with pytest.raises(DomainError):
            singular_map_lr(reference_pair, 0.5)

    def test_flux_equality_across_interface(self, reference_pair, rng):
        g, f = reference_pair.left, reference_pair.right
        for v in rng.uniform(1.0, 3.0, size=50):
            w = singular_map_lr(reference_pair, float(v))
            assert f.eval(w) == pytest.approx(g.eval(v), abs=1e-9)
        for v in rng.uniform(-3.0, 3.0, size=50):
            w = singular_map_rl(reference_pair, float(v))
            assert g.eval(w) == pytest.approx(f.eval(v), abs=1e-9)


# -- scaling exponents -------------------------------------------------------

class TestGammaNu:
    def test_reference_pair(self, reference_pair):
        assert gamma_nu(reference_pair) == pytest.approx((0.5, 1.0))

    def test_cubic_pair(self, cubic_pair):
        assert gamma_nu(cubic_pair) == pytest.approx((1.0 / 3.0, 1.0))

    def test_lipschitz_side_exponent(self):
        # lower-minimum flux |u|**3 contributes nu = 1/2
        pair = FluxPair(left=power_law_flux(3.0), right=shifted_quadratic(0.5))
        assert gamma_nu(pair) == pytest.approx((0.5, 0.5))

    def test_side_swap_invariance(self):
        a = FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(3.0))
        b = FluxPair(left=power_law_flux(3.0), right=shifted_quadratic(-1.0))
        assert gamma_nu(a) == pytest.approx(gamma_nu(b))

    def test_equal_minima_rejected(self):
        with pytest.raises(HypothesisViolationError):
            gamma_nu(FluxPair(left=power_law_flux(2.0), right=power_law_flux(3.0)))

    def test_shift_size_does_not_matter(self):
        # only the sign of min f - min g and the local exponents enter
        a = FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(2.0))
        b = FluxPair(left=shifted_quadratic(-3.0), right=power_law_flux(2.0))
        assert gamma_nu(a) == pytest.approx(gamma_nu(b))


class TestSmoothingExponents:
    def test_reference_pair(self, reference_pair):
        se = smoothing_exponents(reference_pair)
        assert se.s_star == pytest.approx(0.5)
        assert se.s_general == pytest.approx(0.5)
        assert se.s_one == pytest.approx(se.s_star)
        assert se.s_two == pytest.approx(se.s_general)

    def test_cubic_pair(self, cubic_pair):
        se = smoothing_exponents(cubic_pair)
        assert se.s_star == pytest.approx(1.0 / 3.0)
        assert se.s_general == pytest.approx(1.0 / 3.0)

    def test_initial_order_enters(self, cubic_pair):
        se = smoothing_exponents(cubic_pair, s0=0.25)
        g, n = gamma_nu(cubic_pair)
        assert se.s_one == pytest.approx(min(g, max(n, 0.25)))
        assert se.s_two == pytest.approx(g * max(0.25, n))

    def test_s0_validated(self, reference_pair):
        with pytest.raises(ParameterError):
            smoothing_exponents(reference_pair, s0=0.0)
        with pytest.raises(ParameterError):
            smoothing_exponents(reference_pair, s0=1.5)

    @pytest.mark.parametrize("pair", [
        FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(2.0)),
        FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(3.0)),
        FluxPair(left=power_law_flux(3.0), right=shifted_quadratic(0.5)),
        FluxPair(left=shifted_quadratic(0.5), right=power_law_flux(4.0)),
    ])
    def test_bounded_data_order_at_most_half(self, pair):
        # the singular map never beats a square root, so neither does s_star
        assert smoothing_exponents(pair).s_star <= 0.5 + 1e-12


# -- invariant region and speeds ---------------------------------------------

class TestBounds:
    def test_max_principle_reference(self, reference_pair):
        rep = max_principle_bound(reference_pair, 2.0)
        assert rep.value == pytest.approx(math.sqrt(5.0), abs=1e-3)
        assert rep.lr_defined and rep.rl_defined

    def test_max_principle_small_amplitude(self, reference_pair):
        rep = max_principle_bound(reference_pair, 1.0)
        assert rep.value == pytest.approx(math.sqrt(2.0), abs=1e-3)

    def test_max_principle_wedge_only(self, reference_pair):
        # data inside (-1, 1) never crosses left-to-right: g(v) < min f there
        rep = max_principle_bound(reference_pair, 0.5)
        assert not rep.lr_defined
        assert rep.rl_defined
        assert rep.value == pytest.approx(math.sqrt(1.25), abs=1e-3)

    def test_max_principle_validates_m(self, reference_pair):
        with pytest.raises(ParameterError):
            max_principle_bound(reference_pair, 0.0)

    def test_bound_dominates_data(self, reference_pair):
        for m in (0.25, 1.0, 3.0):
            assert max_principle_bound(reference_pair, m).value >= m

    def test_speed_bound_reference(self, reference_pair):
        assert speed_bound(reference_pair, 1.0) == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-2)

    def test_speed_bound_classical(self):
        pair = FluxPair(left=power_law_flux(2.0), right=power_law_flux(2.0))
        assert speed_bound(pair, 1.0) == pytest.approx(2.0, abs=1e-9)


# -- exponent estimation -----------------------------------------------------

class TestHolderEstimate:
    def test_square_root_map(self, reference_pair):
        est = holder_exponent_estimate(
            lambda v: singular_map_lr(reference_pair, v), 1.0, 1.5)
        assert est == pytest.approx(0.5, abs=0.05)

    def test_identity(self):
        assert holder_exponent_estimate(lambda v: v, 0.0, 1.0) == pytest.approx(1.0, abs=0.01)

    def test_lipschitz_map(self, reference_pair):
        est = holder_exponent_estimate(
            lambda v: singular_map_rl(reference_pair, v), 0.5, 1.5)
        assert est >= 0.95

    def test_constant_map_rejected(self):
        with pytest.raises(UndefinedExponentError):
            holder_exponent_estimate(lambda v: 3.0, 0.0, 1.0)

    def test_interval_validated(self):
        with pytest.raises(ParameterError):
            holder_exponent_estimate(lambda v: v, 1.0, 1.0)
        with pytest.raises(ParameterError):
            holder_exponent_estimate(lambda v: v, 0.0, 1.0, n=8)


# -- serialization -----------------------------------------------------------

class TestSerialization:
    @settings(max_examples=25, deadline=None)
    @given(flux=FLUXES)
    def test_flux_round_trip(self, flux):
        assert flux_from_fields(flux_to_fields(flux)) == flux

    def test_flux_round_trip_with_prefix(self):
        f = power_law_flux(3.0, domain_bound=4.0)
        assert flux_from_fields(flux_to_fields(f, prefix="right_"), prefix="right_") == f

    def test_pair_round_trip(self, reference_pair):
        assert pair_from_fields(pair_to_fields(reference_pair)) == reference_pair

    def test_missing_field_rejected(self):
        fields = flux_to_fields(power_law_flux(2.0))
        fields.pop("kind")
        with pytest.raises(ParameterError):
            flux_from_fields(fields)

    def test_malformed_field_rejected(self):
        fields = flux_to_fields(power_law_flux(2.0))
        fields["param"] = "not-a-number"
        with pytest.raises(ParameterError):
            flux_from_fields(fields)
