"""Converse inequalities as numeric bound functions.

All quantities are in nats and channel uses. ``h_b`` is the binary entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import Channel, binary_entropy
from .exponents import J, PhasePlan, _feasible
from .vlc import ExactOutcomeTable, SimReport, Verdict, wilson

ETA_TOL = 1e-9


class ConverseError(ValueError):
    pass


@dataclass(frozen=True)
class EntropySchedule:
    """Expected interval lengths E[T_j - T_{j-1}], entropy decay rates, list masses.

    ``interval_means`` and ``decay_rates`` have k+1 entries (the last interval
    ends at the decoding time); ``list_mass`` has k entries.
    """

    interval_means: tuple[float, ...]
    decay_rates: tuple[float, ...]
    list_mass: tuple[float, ...]
    pe: float

    def __post_init__(self):
        k = len(self.list_mass)
        if len(self.interval_means) != k + 1 or len(self.decay_rates) != k + 1:
            raise ConverseError("need k+1 intervals and decay rates for k list decoders")
        if min(self.interval_means) < 0:
            raise ConverseError("interval means must be non-negative")
        if not 0 <= self.pe <= 1:
            raise ConverseError("pe must be a probability")


def _check_eta(eta: float, w: Channel) -> float:
    if eta > w.capacity_nats + ETA_TOL:
        raise ConverseError(f"entropy decay rate {eta} exceeds capacity")
    return min(eta, w.capacity_nats)


def query_bound(sched: EntropySchedule, i: int, w: Channel) -> float:
    """Lower bound on the probability that the decision misses the i-th list (1-based)."""
    k = len(sched.list_mass)
    if not 1 <= i <= k:
        raise ConverseError(f"list index {i} outside [1, {k}]")
    a = sched.pe + sched.list_mass[i - 1]
    if a > 0.5:
        raise ConverseError("Pe + list mass exceeds 1/2")
    cost = sum(
        sched.interval_means[j] * J(w, _check_eta(sched.decay_rates[j], w))
        for j in range(i, k + 1)
        if sched.interval_means[j] > 0
    )
    return math.exp((-binary_entropy(a) - cost) / (1 - a))


def single_message_bound(pe: float, msg_count: int, t2: float, eta2: float, t_rest: float, w: Channel) -> float:
    """Lower bound on ln Pe(m) from the two-list instantiation (T_1 = 0, A_1 = {m})."""
    a = pe + 1.0 / msg_count
    if a > 0.5:
        raise ConverseError("Pe + 1/|M| exceeds 1/2")
    num = -binary_entropy(a) - t2 * J(w, _check_eta(eta2, w)) - t_rest * w.d_max_nats
    return num / (1 - a)


@dataclass(frozen=True)
class ConverseInputs:
    """Measured or exact operating point of a variable-length code."""

    pe: float
    expected_T: float
    msg_count: int
    delta: float | None = None
    rates: tuple[float, ...] = ()
    exponents: tuple[float, ...] = ()

    @property
    def rate(self) -> float:
        return math.log(self.msg_count) / self.expected_T

    @property
    def exponent(self) -> float:
        return -math.log(self.pe) / self.expected_T if self.pe > 0 else math.inf

    def resolved_delta(self, slack: float = 0.0, limit: float = 0.5) -> float:
        """Explicit delta, else 1/ln(1/Pe), else sqrt(Pe).

        The fallback minimizes delta + Pe/delta and is used when the first
        choice breaks ``slack + Pe + delta + Pe/delta <= limit``.
        """
        if self.delta is not None:
            return self.delta
        pe = self.pe
        if not 0 < pe < 1:
            raise ConverseError("default delta needs 0 < Pe < 1")
        if pe < 1 / math.e:
            d = 1.0 / math.log(1.0 / pe)
            if slack + pe + d + pe / d <= limit:
                return d
        return math.sqrt(pe)


def consm_bound(inp: ConverseInputs, w: Channel) -> float:
    """Upper bound on -ln Pe(m) / E[T] valid for every message m."""
    pe, et, m = inp.pe, inp.expected_T, inp.msg_count
    if not 0 < pe < 1 or et <= 0 or m < 2:
        raise ConverseError("need 0 < Pe < 1, E[T] > 0 and |M| >= 2")
    d = w.d_max_nats
    delta = inp.resolved_delta(1.0 / m, 0.5)
    if delta <= 0:
        raise ConverseError("delta must be positive")
    e1 = pe + delta + pe / delta + 1.0 / m
    if e1 > 0.5:
        raise ConverseError(f"eps1 = {e1} exceeds 1/2")
    e2 = (binary_entropy(e1) - math.log(w.lam * delta)) / et
    eps = (e1 * d + e2) / (1 - e1)
    E, R = inp.exponent, inp.rate
    frac = 1 - (E - eps) / d if d > 0 else 0.0
    if frac <= 0:
        return E
    u = max(R - eps, 0.0) / frac
    return E + frac * J(w, min(u, w.capacity_nats))


def conbits_necessary(inp: ConverseInputs, w: Channel, tol: float = 1e-9) -> tuple[bool, PhasePlan | None]:
    """Necessary condition on per-layer rates and exponents of any bit-wise code."""
    pe, et = inp.pe, inp.expected_T
    if not inp.rates or len(inp.rates) != len(inp.exponents):
        raise ConverseError("rates and exponents vectors of equal length are required")
    if not 0 < pe < 1 or et <= 0:
        raise ConverseError("need 0 < Pe < 1 and E[T] > 0")
    delta = inp.resolved_delta(0.0, 0.2)
    e3 = pe + delta + pe / delta
    if e3 > 0.2:
        raise ConverseError(f"eps3 = {e3} exceeds 1/5")
    hb = binary_entropy(e3)
    e4 = hb / et
    e5 = (hb - math.log(w.lam * delta)) / et
    R = np.asarray(inp.rates, dtype=float)
    E = np.asarray(inp.exponents, dtype=float)
    j_rates = (1 - e3) * R
    c_rates = j_rates.copy()
    c_rates[0] -= e4
    return _feasible(w, j_rates, c_rates, (1 - e3) * E - e5, tol)


def pe_floor(msg_count: int, w: Channel, t_transform: float) -> float:
    """(|M|-1)/|M| E[(lam/(1-lam))^T]; ``t_transform`` is the expectation."""
    if msg_count < 1:
        raise ConverseError("msg_count must be positive")
    if not 0 <= t_transform <= 1:
        raise ConverseError("t_transform must lie in [0, 1]")
    return (msg_count - 1) / msg_count * t_transform


def layer_floor(prefix_count: int, w: Channel, t_transform: float) -> float:
    """Same floor for the first-i sub-messages, with |M^i| = prod_{j<=i} |M_j|."""
    return pe_floor(prefix_count, w, t_transform)


def min_conditional_floor(pe: float, msg_count: int, w: Channel, t_star: int) -> float:
    """(lam/(1-lam))^t* (1 - 1/|M| - Pe) lower bound on min_m Pe(m)."""
    r = w.lam / (1 - w.lam)
    return max(1 - 1 / msg_count - pe, 0.0) * r**t_star


def lam_ratio(w: Channel) -> float:
    return w.lam / (1 - w.lam)


def t_star_exact(table: ExactOutcomeTable) -> int | None:
    """First t with max_m P(T > t | m) <= (|M|-1)/|M| - Pe for the repeat-until-non-erasure code."""
    era = table.erasure()
    m = table.message_count
    target = (m - 1) / m - float(np.mean(table.vlc_error()))
    if target <= 0:
        return None
    worst = float(era.max())
    if worst <= target:
        # P(T > t) = 1 for t < n
        return table.n if target < 1 else 0
    if worst >= 1:
        return None
    rounds = math.ceil(math.log(target) / math.log(worst))
    return rounds * table.n


# ---------------------------------------------------------------------------
# verdicts over simulation reports and exact tables


def _floor_verdict(name: str, floor: float, observed: float, upper: float | None = None) -> Verdict:
    """Pass when ``observed`` (a lower confidence limit) clears the floor.

    With an ``upper`` limit the check fails only when the whole interval lies
    below the floor; an interval straddling it is inconclusive (vacuous).
    """
    if observed >= floor:
        status = "pass"
    elif upper is None or upper < floor:
        status = "fail"
    else:
        status = "vacuous"
    return Verdict(name, float(floor), float(observed), float(observed - floor), status)


def _upper_verdict(name: str, bound: float, observed: float) -> Verdict:
    status = "pass" if observed <= bound else "fail"
    return Verdict(name, float(bound), float(observed), float(bound - observed), status)


def _vacuous(name: str, observed: float = math.nan) -> Verdict:
    return Verdict(name, math.nan, observed, math.nan, "vacuous")


def check_report(report: SimReport, w: Channel, bitwise: bool) -> list[Verdict]:
    """Converse checks on a Monte Carlo report.

    For fixed-length runs the decoding time is n and erasures count as wrong
    decisions in the floor check.
    """
    out = []
    r = lam_ratio(w)
    K = report.message_count
    if report.mode == "vlc" and not report.completed().any():
        # every trial hit the round cap; nothing to compare against
        names = ["pe_floor"] + [f"layer_floor{i + 1}" for i in range(report.ell)] + (["conbits"] if bitwise else [])
        return [_vacuous(n) for n in names]
    transform = report.time_transform(r) if report.mode == "vlc" else r**report.n
    if report.mode == "vlc":
        e, lo, hi = report.interval("error")
    else:
        c = report.counts
        wrong = int(c.error.sum() + c.erasure.sum())
        tot = int(c.trials.sum())
        e, (lo, hi) = wrong / tot, wilson(wrong, tot)
    out.append(_floor_verdict("pe_floor", pe_floor(K, w, transform), lo, hi))
    if report.mode == "vlc":
        for i in range(report.ell):
            prefix = int(np.prod(report.sizes[: i + 1]))
            _, llo, lhi = report.interval(f"layer:{i + 1}")
            out.append(_floor_verdict(f"layer_floor{i + 1}", layer_floor(prefix, w, transform), llo, lhi))
    if bitwise and report.mode == "vlc":
        out.append(_conbits_verdict(report, w, hi))
    return out


def _conbits_verdict(report: SimReport, w: Channel, pe_hi: float) -> Verdict:
    et, _ = report.mean_time()
    rates = tuple(math.log(s) / et for s in report.sizes)
    exps = []
    for i in range(report.ell):
        _, _, hi = report.interval(f"layer:{i + 1}")
        exps.append(-math.log(hi) / et)
    try:
        inp = ConverseInputs(pe_hi, et, report.message_count, rates=rates, exponents=tuple(exps))
        ok, _ = conbits_necessary(inp, w)
    except ConverseError:
        return _vacuous("conbits")
    return Verdict("conbits", 0.0, 0.0, 0.0, "pass" if ok else "fail")


def check_exact_fixed(table: ExactOutcomeTable, w: Channel) -> list[Verdict]:
    """Floor check for a fixed-length code; erasures count as wrong decisions."""
    wrong = float(np.mean(table.error() + table.erasure()))
    floor = pe_floor(table.message_count, w, lam_ratio(w) ** table.n)
    return [_floor_verdict("pe_floor", floor, wrong)]


def check_exact_vlc(table: ExactOutcomeTable, w: Channel, delta: float | None = None) -> list[Verdict]:
    """Sandwich checks on the exact repeat-until-non-erasure code."""
    out = []
    era = table.erasure()
    if np.any(era >= 1):
        return [_vacuous("pe_floor")]
    r = lam_ratio(w)
    n = table.n
    # E[r^T | m] for geometric rounds with success 1 - era
    q = r**n
    trans = float(np.mean((1 - era) * q / (1 - era * q)))
    pe_m = table.vlc_error()
    pe = float(np.mean(pe_m))
    K = table.message_count
    out.append(_floor_verdict("pe_floor", pe_floor(K, w, trans), pe))
    layers = table.vlc_layer()
    for i in range(table.ell):
        prefix = int(np.prod(table.sizes[: i + 1]))
        out.append(_floor_verdict(f"layer_floor{i + 1}", layer_floor(prefix, w, trans), float(np.mean(layers[:, i]))))
    ts = t_star_exact(table)
    if ts is not None:
        out.append(_floor_verdict("min_conditional_floor", min_conditional_floor(pe, K, w, ts), float(pe_m.min())))
    et = float(np.mean(table.vlc_mean_time()))
    try:
        bound = consm_bound(ConverseInputs(pe, et, K, delta), w)
        observed = -math.log(float(pe_m.min())) / et
        out.append(_upper_verdict("consm", bound, observed))
    except ConverseError:
        out.append(_vacuous("consm"))
    if table.ell > 1:
        rates = tuple(math.log(s) / et for s in table.sizes)
        exps = tuple(-math.log(float(np.mean(layers[:, i]))) / et for i in range(table.ell))
        try:
            ok, _ = conbits_necessary(ConverseInputs(pe, et, K, delta, rates, exps), w)
            out.append(Verdict("conbits", 0.0, 0.0, 0.0, "pass" if ok else "fail"))
        except ConverseError:
            out.append(_vacuous("conbits"))
    return out


def any_failure(verdicts: Sequence[Verdict]) -> bool:
    return any(v.status == "fail" for v in verdicts)
