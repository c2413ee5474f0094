"""
Tests for the closed-form covert limits
"""

import math

import allure
import pytest

from src.numerics.covertlimits import (
    ChannelParams,
    bpsk_qre_leading,
    bpsk_quartic_coefficient,
    c_cov,
    c_rel_bounds,
    converse_budget_exact,
    converse_qre_leading,
    converse_qre_lower_exact,
    covert_budget_nS,
    covertness_report,
    g_function,
    heterodyne_rate,
    holevo_chi,
    nats_to_bits,
    pinsker_pe_floor,
    qpsk_qre_leading,
    qpsk_quartic_coefficient,
    sparse_throughput_bound,
    sparsification_tau,
    sparsified_qre_leading,
    srl_throughput,
)
from src.numerics.errors import BudgetNotBindingError, InvalidParameterError


@allure.feature("Covert Limits")
@allure.story("Channel")
class TestChannelParams:

    def test_derived_photon_numbers(self):
        params = ChannelParams(eta=0.25, nbar_B=4.0)
        assert params.nT == pytest.approx(1.0)
        assert params.bob_noise == pytest.approx(3.0)

    @pytest.mark.parametrize("eta, nbar_B", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, -1.0)])
    def test_rejects_out_of_range(self, eta, nbar_B):
        with pytest.raises(InvalidParameterError):
            ChannelParams(eta=eta, nbar_B=nbar_B)

    def test_g_function(self):
        assert g_function(0.0) == 0.0
        assert g_function(1.0) == pytest.approx(2 * math.log(2))
        with pytest.raises(InvalidParameterError):
            g_function(-1.0)

    def test_nats_to_bits(self):
        assert nats_to_bits(math.log(2)) == pytest.approx(1.0)


@allure.feature("Covert Limits")
@allure.story("Covert Budget")
class TestCovertBudget:

    def test_c_cov_example(self, channel):
        assert c_cov(channel) == pytest.approx(math.sqrt(1.5) / 0.5, rel=1e-12)
        assert c_cov(channel) == pytest.approx(2.449490, abs=1e-6)

    def test_c_cov_vanishes_without_noise(self):
        assert c_cov(ChannelParams(eta=0.5, nbar_B=1e-12)) < 1e-5

    def test_c_cov_grows_with_eta_near_zero(self):
        values = [c_cov(ChannelParams(eta=eta, nbar_B=1.0)) for eta in (1e-6, 1e-4, 1e-2)]
        assert values[0] < values[1] < values[2]
        assert values[0] < 1e-2

    def test_budget_example(self, channel):
        budget = covert_budget_nS(channel, 10 ** 6, 0.01)
        assert budget.nbar_S == pytest.approx(2.44949e-4, rel=1e-5)
        assert budget.delta_p == pytest.approx(math.sqrt(0.005))

    def test_zero_qre_gives_zero_budget(self, channel):
        assert covert_budget_nS(channel, 1000, 0.0).nbar_S == 0.0

    def test_budget_inverts_the_converse(self, channel):
        n, delta_qre = 10 ** 6, 0.01
        budget = covert_budget_nS(channel, n, delta_qre).nbar_S
        assert converse_qre_leading(budget, channel, n) == pytest.approx(delta_qre, rel=1e-12)

    def test_budget_needs_a_mode(self, channel):
        with pytest.raises(InvalidParameterError):
            covert_budget_nS(channel, 0, 0.01)


@allure.feature("Covert Limits")
@allure.story("Converse")
class TestConverse:

    def test_exact_bound_at_zero(self, channel):
        assert converse_qre_lower_exact(0.0, channel, 10) == 0.0

    def test_exact_bound_matches_leading_for_small_power(self, channel):
        exact = converse_qre_lower_exact(1e-4, channel, 1)
        leading = converse_qre_leading(1e-4, channel, 1)
        assert exact / leading == pytest.approx(1.0, rel=1e-2)

    def test_exact_bound_is_non_negative(self, channel):
        for nbar_S in (1e-4, 1e-2, 0.1, 1.0, 10.0):
            assert converse_qre_lower_exact(nbar_S, channel, 1) >= 0.0

    def test_leading_example(self, channel):
        assert converse_qre_leading(1e-3, channel, 1) == pytest.approx(1.6667e-7, rel=1e-4)
        assert converse_qre_leading(0.0, channel, 1) == 0.0

    def test_exact_budget_solves_the_exact_bound(self, channel):
        n, delta_qre = 10 ** 4, 0.01
        exact = converse_budget_exact(channel, n, delta_qre)
        assert converse_qre_lower_exact(exact, channel, n) == pytest.approx(delta_qre, rel=1e-9)
        assert exact >= covert_budget_nS(channel, n, delta_qre).nbar_S

    def test_exact_budget_of_zero_qre(self, channel):
        assert converse_budget_exact(channel, 100, 0.0) == 0.0

    def test_exact_budget_approaches_leading_budget(self, channel):
        n, delta_qre = 10 ** 6, 0.01
        exact = converse_budget_exact(channel, n, delta_qre)
        assert exact == pytest.approx(covert_budget_nS(channel, n, delta_qre).nbar_S, rel=1e-2)


@allure.feature("Covert Limits")
@allure.story("Constellation Expansions")
class TestConstellationExpansions:

    def test_qpsk_leading_example(self, channel):
        assert qpsk_qre_leading(0.01, channel) == pytest.approx(1.6667e-5, rel=1e-4)
        assert qpsk_qre_leading(0.0, channel) == 0.0

    def test_quartic_coefficients_at_unit_noise(self):
        assert qpsk_quartic_coefficient(1.0) == pytest.approx(0.25)
        assert bpsk_quartic_coefficient(1.0) == pytest.approx(0.25 + math.log(2) / 3)
        assert bpsk_quartic_coefficient(1.0) == pytest.approx(0.481049, abs=1e-6)

    def test_bpsk_leading_example(self):
        # nT = 1 and (1 - eta)^2 nbar_S^2 = 1
        params = ChannelParams(eta=0.5, nbar_B=2.0)
        assert bpsk_qre_leading(2.0, params) == pytest.approx(0.481049, abs=1e-6)
        assert bpsk_qre_leading(0.0, params) == 0.0

    def test_bpsk_exceeds_qpsk(self, channel):
        for nbar_S in (1e-4, 1e-2, 1.0):
            assert bpsk_qre_leading(nbar_S, channel) > qpsk_qre_leading(nbar_S, channel)

    def test_sparsified_limits(self, channel):
        assert sparsified_qre_leading(0.01, 1.0, channel) == pytest.approx(qpsk_qre_leading(0.01, channel))
        assert sparsified_qre_leading(0.01, 0.0, channel) == 0.0
        assert sparsified_qre_leading(0.01, 0.5, channel) == pytest.approx(0.25 * qpsk_qre_leading(0.01, channel))

    def test_sparsified_rejects_bad_tau(self, channel):
        with pytest.raises(InvalidParameterError):
            sparsified_qre_leading(0.01, 1.5, channel)


@allure.feature("Covert Limits")
@allure.story("Sparsification")
class TestSparsification:

    def test_tau_example(self, channel):
        assert sparsification_tau(0.01, channel, 0.01, 10 ** 6) == pytest.approx(0.0244949, rel=1e-5)

    def test_tau_at_the_budget_is_one(self, channel):
        n, delta_qre = 10 ** 6, 0.01
        budget = covert_budget_nS(channel, n, delta_qre).nbar_S
        assert sparsification_tau(budget, channel, delta_qre, n) == pytest.approx(1.0, abs=1e-12)

    def test_composed_qre_spends_the_budget(self, channel):
        n, delta_qre, nbar_S = 10 ** 6, 0.01, 0.05
        tau = sparsification_tau(nbar_S, channel, delta_qre, n)
        assert n * sparsified_qre_leading(nbar_S, tau, channel) == pytest.approx(delta_qre, rel=1e-12)

    def test_budget_not_binding(self, channel):
        with pytest.raises(BudgetNotBindingError) as excinfo:
            sparsification_tau(1e-6, channel, 0.01, 10 ** 6)
        assert excinfo.value.tau > 1.0
        assert excinfo.value.exit_code == 4

    def test_tau_needs_power(self, channel):
        with pytest.raises(InvalidParameterError):
            sparsification_tau(0.0, channel, 0.01, 10 ** 6)


@allure.feature("Covert Limits")
@allure.story("Reliability")
class TestReliability:

    def test_c_rel_example(self):
        bounds = c_rel_bounds(ChannelParams(eta=0.5, nbar_B=10.0))
        assert bounds.lower_paper == pytest.approx(0.1)
        assert bounds.lower_shotnoise == pytest.approx(0.5 / 6)
        assert bounds.upper_chi == pytest.approx(0.5 * math.log(1.2))
        assert bounds.upper_chi == pytest.approx(0.091161, abs=1e-6)

    def test_c_rel_high_noise_limit(self):
        bounds = c_rel_bounds(ChannelParams(eta=0.5, nbar_B=1e6))
        assert bounds.lower_paper / bounds.upper_chi == pytest.approx(1.0, rel=1e-5)
        assert bounds.upper_chi < 1e-5

    @pytest.mark.parametrize("eta", [0.1, 0.3, 0.5, 0.7, 0.9])
    @pytest.mark.parametrize("nbar_B", [0.1, 0.5, 1.0, 5.0, 10.0, 100.0])
    def test_holevo_slope_and_ordering(self, eta, nbar_B):
        params = ChannelParams(eta=eta, nbar_B=nbar_B)
        bounds = c_rel_bounds(params)
        step = 1e-6 * (1.0 + nbar_B)
        assert holevo_chi(step, params) / step == pytest.approx(bounds.upper_chi, rel=1e-4)
        assert bounds.lower_shotnoise <= bounds.upper_chi

    def test_rates_at_zero_power(self, channel):
        assert holevo_chi(0.0, channel) == 0.0
        assert heterodyne_rate(0.0, channel) == 0.0

    def test_heterodyne_below_holevo(self, channel):
        for nbar_S in (0.01, 0.1, 1.0, 10.0):
            assert heterodyne_rate(nbar_S, channel) <= holevo_chi(nbar_S, channel)

    def test_heterodyne_slope_is_shot_noise_bound(self, channel):
        step = 1e-7
        slope = heterodyne_rate(step, channel) / step
        assert slope == pytest.approx(c_rel_bounds(channel).lower_shotnoise, rel=1e-5)


@allure.feature("Covert Limits")
@allure.story("Throughput")
class TestThroughput:

    def test_zero_delta(self):
        assert srl_throughput(10 ** 6, 0.0, 2.0, 0.1) == 0.0

    def test_composed_example(self):
        params = ChannelParams(eta=0.5, nbar_B=10.0)
        constant = c_cov(params)
        assert constant == pytest.approx(15.4919, rel=1e-5)
        bits = srl_throughput(10 ** 8, math.sqrt(0.01), constant, c_rel_bounds(params).upper_chi)
        assert bits * math.log(2) == pytest.approx(1412.3, rel=1e-4)
        assert bits == pytest.approx(2037.5, rel=1e-4)

    def test_rejects_negative_inputs(self):
        with pytest.raises(InvalidParameterError):
            srl_throughput(100, -0.1, 1.0, 1.0)

    def test_pinsker_floor(self):
        assert pinsker_pe_floor(0.0) == 0.5
        assert pinsker_pe_floor(0.02) == pytest.approx(0.45)
        assert pinsker_pe_floor(8.0) == 0.0
        assert pinsker_pe_floor(0.04) == pytest.approx(0.429289, abs=1e-6)

    def test_sparse_throughput_bound(self, channel):
        bound = sparse_throughput_bound(0.1, 0.2, 1000, channel)
        assert bound['e_selected'] == pytest.approx(200.0)
        assert bound['selected_stddev'] == pytest.approx(math.sqrt(160.0))
        assert bound['m_nats'] == pytest.approx(200.0 * holevo_chi(0.1, channel))
        assert bound['m_bits'] == pytest.approx(nats_to_bits(bound['m_nats']))


@allure.feature("Covert Limits")
@allure.story("Report")
class TestCovertnessReport:

    def test_report_fields(self, channel):
        report = covertness_report(channel, 10 ** 6, 0.01)
        assert report['nbar_s_budget'] == pytest.approx(2.44949e-4, rel=1e-5)
        assert report['c_cov'] == pytest.approx(2.449490, abs=1e-6)
        assert report['m_upper_chi_nats'] == pytest.approx(report['m_upper_chi_bits'] * math.log(2))
        assert report['c_rel_lower_paper_nats'] == pytest.approx(c_rel_bounds(channel).lower_paper)
        assert report['m_lower_paper_bits'] > report['m_lower_shotnoise_bits']
        assert 'tau' not in report

    def test_report_with_operating_point(self, channel):
        report = covertness_report(channel, 10 ** 6, 0.01, nbar_S=0.01)
        assert report['tau'] == pytest.approx(0.0244949, rel=1e-5)
        assert report['tau_binding'] is True

    def test_report_with_slack_operating_point(self, channel):
        report = covertness_report(channel, 10 ** 6, 0.01, nbar_S=1e-6)
        assert report['tau'] == 1.0
        assert report['tau_binding'] is False
        assert report['tau_unclamped'] > 1.0
