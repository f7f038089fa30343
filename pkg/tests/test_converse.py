from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uepfb.channel import Channel, Distribution, binary_entropy
from uepfb.codec import ErasureCodeSpec, MwCodeSpec
from uepfb.converse import (
    ConverseError,
    ConverseInputs,
    EntropySchedule,
    check_exact_fixed,
    check_exact_vlc,
    check_report,
    conbits_necessary,
    consm_bound,
    lam_ratio,
    layer_floor,
    min_conditional_floor,
    pe_floor,
    query_bound,
    single_message_bound,
    t_star_exact,
)
from uepfb.exponents import RateExponentQuery, burnashev, emd, region_feasible
from uepfb.vlc import VlcScheme, exact_enumerate, simulate

U2 = Distribution.uniform(2)


class TestQueryBound:
    def test_no_information_floor(self, bsc001):
        s = EntropySchedule((0.0, 0.0), (0.0, 0.0), (0.1,), 0.05)
        a = 0.15
        assert query_bound(s, 1, bsc001) == pytest.approx(math.exp(-binary_entropy(a) / (1 - a)), rel=1e-14)

    def test_saturated_j(self, bsc001):
        s = EntropySchedule((0.0, 20.0), (0.0, -1.0), (0.1,), 0.05)
        a = 0.15
        want = math.exp(-(binary_entropy(a) + 20 * bsc001.d_max_nats) / (1 - a))
        assert query_bound(s, 1, bsc001) == pytest.approx(want, rel=1e-12)

    def test_specializes_to_single_message(self, bsc001):
        # lists A_1 = {m} with T_1 = 0: the remaining intervals cost t2 J(eta2) + t_rest D
        pe, m, t2, eta2, t_rest = 0.01, 8, 30.0, 0.2, 5.0
        s = EntropySchedule((0.0, t2, t_rest), (0.0, eta2, 0.0), (1 / m, 0.3), pe)
        assert math.log(query_bound(s, 1, bsc001)) == pytest.approx(
            single_message_bound(pe, m, t2, eta2, t_rest, bsc001), abs=1e-9)

    def test_hypothesis_violation(self, bsc001):
        s = EntropySchedule((0.0, 1.0), (0.0, 0.1), (0.45,), 0.1)
        with pytest.raises(ConverseError):
            query_bound(s, 1, bsc001)

    def test_rate_above_capacity(self, bsc001):
        s = EntropySchedule((0.0, 1.0), (0.0, 0.9), (0.1,), 0.1)
        with pytest.raises(ConverseError):
            query_bound(s, 1, bsc001)


def _operating_point(R, E, et):
    """Inputs with ln|M| / E[T] close to R and -ln Pe / E[T] = E."""
    k = max(1, round(R * et / math.log(10)))
    return ConverseInputs(math.exp(-E * et), et, 10**k)


class TestConsm:
    def test_default_delta(self):
        inp = ConverseInputs(1e-6, 100.0, 16)
        assert inp.resolved_delta(1 / 16) == pytest.approx(1 / math.log(1e6), rel=1e-15)

    def test_delta_fallback(self):
        inp = ConverseInputs(0.2, 10.0, 4)
        assert inp.resolved_delta(0.25) == math.sqrt(0.2)

    def test_approaches_emd(self, bsc001):
        R, E = 0.2, 0.5
        gaps = []
        for et in (100.0, 300.0, 1400.0):
            inp = _operating_point(R, E, et)
            gaps.append(consm_bound(inp, bsc001) - emd(bsc001, inp.rate, inp.exponent))
        assert all(g >= -1e-9 for g in gaps)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.1

    def test_non_increasing_in_expected_time(self, bsc001):
        R, E = 0.1, 0.4
        vals = []
        for et in (50.0, 100.0, 200.0, 400.0, 800.0):
            inp = ConverseInputs(math.exp(-E * et), et, 2, rates=(), exponents=())
            # keep the rate fixed by scaling |M|
            inp = ConverseInputs(inp.pe, et, max(2, round(math.exp(R * et))) if R * et < 700 else 10**round(R * et / math.log(10)))
            vals.append(consm_bound(inp, bsc001))
        assert all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))

    def test_hypothesis_violation(self, bsc001):
        with pytest.raises(ConverseError):
            consm_bound(ConverseInputs(0.3, 10.0, 3), bsc001)


class TestConbits:
    def test_inside_region_passes(self, bsc001):
        et = 2000.0
        q = RateExponentQuery([0.1, 0.1], [1.5, 0.8])
        assert region_feasible(bsc001, q)[0]
        inp = ConverseInputs(1e-300, et, 4, rates=q.rates, exponents=q.exponents)
        assert conbits_necessary(inp, bsc001)[0]

    def test_beyond_burnashev_fails(self, bsc001):
        et = 2000.0
        e = burnashev(bsc001, 0.2) + 0.5
        inp = ConverseInputs(1e-300, et, 4, rates=(0.2,), exponents=(e,))
        ok, plan = conbits_necessary(inp, bsc001)
        assert not ok and plan is None

    def test_limit_agrees_with_region(self, bsc001):
        rng = np.random.default_rng(0)
        c, d = bsc001.capacity_nats, bsc001.d_max_nats
        et = 1e5
        for _ in range(15):
            r = rng.uniform(0, c / 2, 2)
            e = np.sort(rng.uniform(0, d, 2))[::-1]
            q = RateExponentQuery(r, e)
            feas = region_feasible(bsc001, q)[0]
            # shrink or inflate by a margin larger than the slack terms at this E[T]
            inside = RateExponentQuery(r * 0.97, e * 0.97 - 0.02)
            outside = RateExponentQuery(r, e + 0.2)
            pe = math.exp(-700)
            if feas:
                exps = tuple(max(v, 0.0) for v in inside.exponents)
                assert conbits_necessary(ConverseInputs(pe, et, 4, rates=inside.rates, exponents=exps), bsc001)[0]
            if not region_feasible(bsc001, RateExponentQuery(r * 0.99, e + 0.15))[0]:
                inp = ConverseInputs(pe, et, 4, rates=outside.rates, exponents=outside.exponents)
                assert not conbits_necessary(inp, bsc001)[0]

    def test_hypothesis_violation(self, bsc001):
        with pytest.raises(ConverseError):
            conbits_necessary(ConverseInputs(0.3, 10.0, 4, rates=(0.1,), exponents=(0.1,)), bsc001)


class TestFloors:
    def test_single_message(self, bsc001):
        assert pe_floor(1, bsc001, 0.5) == 0.0

    def test_fixed_length(self, bsc01):
        n, m = 6, 4
        want = (m - 1) / m * (0.1 / 0.9) ** n
        assert pe_floor(m, bsc01, lam_ratio(bsc01) ** n) == pytest.approx(want, rel=1e-14)

    def test_layer_floor(self, bsc01):
        assert layer_floor(6, bsc01, 0.01) == pe_floor(6, bsc01, 0.01)

    def test_min_conditional(self, bsc01):
        assert min_conditional_floor(0.1, 4, bsc01, 3) == pytest.approx(0.65 * (1 / 9) ** 3, rel=1e-14)

    def test_guards(self, bsc01):
        with pytest.raises(ConverseError):
            pe_floor(0, bsc01, 0.5)
        with pytest.raises(ConverseError):
            pe_floor(2, bsc01, 1.5)


def erasure_spec(w, n, n1, m, thr, ctrl, seed):
    inner = MwCodeSpec(n1, 0.5, 0, 1, U2, U2, m, seed, thr)
    return ErasureCodeSpec(inner, n, ctrl, w.accept_letter, w.reject_letter)


def test_t_star_geometric(bsc01):
    spec = erasure_spec(bsc01, 6, 4, 3, 1.4, 1.0, 4)
    table = exact_enumerate(spec, bsc01)
    t = t_star_exact(table)
    era = table.erasure().max()
    target = 2 / 3 - float(np.mean(table.vlc_error()))
    # P(T > t | m) = era^(t / n) at multiples of n; t* is the first one below target
    assert era ** (t / spec.n) <= target
    assert t == spec.n or era ** (t / spec.n - 1) > target


def _random_enumerable(rng, w):
    while True:
        m = int(rng.integers(3, 7))
        n = int(rng.integers(8, 13))
        n1 = int(rng.integers(max(2, n // 2), n))
        spec = erasure_spec(w, n, n1, m, float(rng.uniform(1.0, 3.0)), float(rng.uniform(0.5, 2.5)),
                            int(rng.integers(0, 2**31)))
        table = exact_enumerate(spec, w)
        if table.erasure().max() < 0.95:
            return spec, table


def test_sandwich_on_enumerable_vlc():
    rng = np.random.default_rng(12)
    seen = {"pass": 0, "vacuous": 0}
    for w in (Channel.bsc(0.02), Channel.bsc(0.05)):
        for _ in range(6):
            spec, table = _random_enumerable(rng, w)
            verdicts = check_exact_vlc(table, w)
            for v in verdicts:
                assert v.status != "fail", v
                seen[v.status] += 1
            floor = [v for v in verdicts if v.bound_name == "pe_floor"][0]
            assert floor.observed >= floor.bound_value
    assert seen["pass"] > 0


def test_fixed_floor_exact(bsc01):
    spec = erasure_spec(bsc01, 6, 4, 3, 1.4, 1.0, 4)
    assert all(v.status == "pass" for v in check_exact_fixed(exact_enumerate(spec, bsc01), bsc01))


def test_floor_verdict_needs_interval_below_floor_to_fail(bsc01):
    spec = erasure_spec(bsc01, 6, 4, 3, 1.4, 1.0, 4)
    rep = simulate(VlcScheme(spec), bsc01, 2_000, seed=1)
    rep.counts.error[:] = 0
    rep.counts.layer[:] = 0
    verdicts = check_report(rep, bsc01, bitwise=False)
    # zero observed errors: lower limit 0 is below the floor, the upper limit is not
    assert [v.status for v in verdicts] == ["vacuous", "vacuous"]
    assert verdicts[0].observed == 0.0 < verdicts[0].bound_value


def test_report_checks_pass(bsc01):
    spec = erasure_spec(bsc01, 6, 4, 3, 1.4, 1.0, 4)
    rep = simulate(VlcScheme(spec), bsc01, 20_000, seed=1)
    verdicts = check_report(rep, bsc01, bitwise=False)
    assert [v.bound_name for v in verdicts] == ["pe_floor", "layer_floor1"]
    assert all(v.status == "pass" for v in verdicts)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-12, 1e-3), st.floats(10, 1000), st.integers(4, 1000))
def test_consm_at_least_exponent(pe, et, m):
    w = Channel.bsc(0.05)
    inp = ConverseInputs(pe, et, m)
    try:
        b = consm_bound(inp, w)
    except ConverseError:
        return
    assert b >= inp.exponent - 1e-12
