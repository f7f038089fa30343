"""Exponent trade-off functions for variable-length block codes with feedback.

``j_single`` is the single-letter divergence/rate trade-off, ``j_big`` its
two-point upper concave envelope, and the remaining functions build the
missed-detection exponent and the bit-wise achievable region on top of it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import linprog, minimize

from .channel import Channel, Distribution, mutual_information_batch

RATE_CLAMP = 1e-9
TABLE_POINTS = 2000
REFINE_STRIDE = 8


class ExponentError(ValueError):
    """Raised when a rate/exponent query lies outside the valid region."""


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TimeSharePlan:
    """Two-phase plan (tau, x1, x2, P1, P2) witnessing a value of J."""

    tau: float
    x1: int
    x2: int
    p1: Distribution
    p2: Distribution

    def rate(self, w: Channel) -> float:
        i = mutual_information_batch(np.stack([self.p1.probs, self.p2.probs]), w.matrix)
        return float(self.tau * i[0] + (1 - self.tau) * i[1])

    def objective(self, w: Channel) -> float:
        k1 = _kl_to_rows(w, self.p1.probs)[self.x1]
        k2 = _kl_to_rows(w, self.p2.probs)[self.x2]
        return float(self.tau * k1 + (1 - self.tau) * k2)

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "x1": self.x1,
            "x2": self.x2,
            "p1": self.p1.tolist(),
            "p2": self.p2.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TimeSharePlan":
        return cls(
            float(obj["tau"]),
            int(obj["x1"]),
            int(obj["x2"]),
            Distribution(obj["p1"]),
            Distribution(obj["p2"]),
        )


@dataclass(frozen=True)
class PhasePlan:
    """Time-sharing fractions of the bit-wise scheme."""

    phis: tuple[float, ...]

    def __post_init__(self):
        phis = tuple(float(p) for p in self.phis)
        if any(p < 0 for p in phis) or sum(phis) > 1 + 1e-9:
            raise ExponentError(f"invalid time-sharing vector {phis}")
        object.__setattr__(self, "phis", phis)

    def to_json(self) -> dict:
        return {"phis": list(self.phis)}


@dataclass(frozen=True)
class RateExponentQuery:
    rates: tuple[float, ...]
    exponents: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        exps = tuple(float(e) for e in self.exponents)
        if len(rates) != len(exps) or not rates:
            raise ExponentError("rates and exponents must be non-empty and of equal length")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "exponents", exps)

    @property
    def ell(self) -> int:
        return len(self.rates)

    @classmethod
    def from_json(cls, obj: dict) -> "RateExponentQuery":
        return cls(obj["rates"], obj["exponents"])

    def to_json(self) -> dict:
        return {"rates": list(self.rates), "exponents": list(self.exponents)}


@dataclass
class CurvePoint:
    x: float
    y: float
    witness: TimeSharePlan | PhasePlan | None = None

    def witness_json(self) -> str:
        if self.witness is None:
            return ""
        return json.dumps(self.witness.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# single-letter optimisation


def _kl_to_rows(w: Channel, p: np.ndarray) -> np.ndarray:
    """D(PW || W_x) for every input letter x."""
    q = p @ w.matrix
    pos = q > 0
    negent = float(np.sum(q[pos] * np.log(q[pos])))
    return negent - np.log(w.matrix) @ q


def _objective(P: np.ndarray, W: np.ndarray, logW: np.ndarray):
    """Row-wise max_x D(P_i W || W_x) and its argmax letter."""
    q = P @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        qlogq = np.where(q > 0, q * np.log(q), 0.0)
    K = qlogq.sum(axis=1)[:, None] - q @ logW.T
    x = np.argmax(K, axis=1)
    return K[np.arange(len(x)), x], x


def _simplex_grid(k: int, res: int) -> np.ndarray:
    """All points of the simplex with coordinates in multiples of 1/res."""
    pts = []
    for bars in combinations(range(res + k - 1), k - 1):
        edges = (-1,) + bars + (res + k - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.asarray(pts, dtype=float) / res


def _grid_resolution(k: int) -> int:
    # caps the grid near 3e5 points
    return {2: 400, 3: 400, 4: 120}.get(k, 0)


@lru_cache(maxsize=32)
def _candidates(w: Channel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Start points for the single-letter search: (P, I(P), best value, best letter)."""
    k = w.input_size
    res = _grid_resolution(k)
    if res:
        P = _simplex_grid(k, res)
    else:
        rng = np.random.default_rng(20240101)
        edge = []
        for a, b in combinations(range(k), 2):
            t = np.linspace(0, 1, 65)[:, None]
            row = np.zeros((65, k))
            row[:, a], row[:, b] = t[:, 0], 1 - t[:, 0]
            edge.append(row)
        P = np.vstack([np.eye(k), *edge, rng.dirichlet(np.ones(k), 20000)])
    P = np.vstack([P, w.capacity_input.probs[None, :]])
    I = mutual_information_batch(P, w.matrix)
    K, x = _objective(P, w.matrix, np.log(w.matrix))
    return P, I, K, x


def _best_start(w: Channel, rates: np.ndarray):
    P, I, K, x = _candidates(w)
    order = np.argsort(-I, kind="stable")
    Ks = K[order]
    prefix = np.maximum.accumulate(Ks)
    # first index attaining each running maximum
    change = np.r_[True, prefix[1:] > prefix[:-1]]
    arg = np.maximum.accumulate(np.where(change, np.arange(len(Ks)), 0))
    n_feas = np.searchsorted(-I[order], -rates, side="right")
    # the capacity-achieving input is always feasible for r <= C
    cap_idx = len(P) - 1
    n_feas = np.maximum(n_feas, 1)
    pick = order[arg[n_feas - 1]]
    bad = I[pick] < rates
    pick = np.where(bad, cap_idx, pick)
    return P[pick].copy()


def _feasible_step(P, d, r, t_lim, W, iters=60):
    """Largest t in [0, t_lim] with I(P + t d) >= r, per row (I is concave along d)."""
    full = P + t_lim[:, None] * d
    ok = mutual_information_batch(np.clip(full, 0, None), W) >= r
    lo = np.zeros_like(t_lim)
    hi = t_lim.copy()
    todo = ~ok & (t_lim > 0)
    if np.any(todo):
        Pt, dt, rt = P[todo], d[todo], r[todo]
        l, h = lo[todo], hi[todo]
        for _ in range(iters):
            mid = 0.5 * (l + h)
            feas = mutual_information_batch(np.clip(Pt + mid[:, None] * dt, 0, None), W) >= rt
            l = np.where(feas, mid, l)
            h = np.where(feas, h, mid)
        lo[todo] = l
    return np.where(ok, t_lim, lo)


def _polish(w: Channel, P: np.ndarray, r: np.ndarray, sweeps: int = 40, n_random: int = 8):
    """Line-search ascent of the convex objective over {P : I(P;W) >= r}.

    Along any line the feasible set is a segment and the objective is convex,
    so each step jumps to whichever segment end is better.
    """
    W = w.matrix
    logW = np.log(W)
    k = w.input_size
    rng = np.random.default_rng(7)
    best, _ = _objective(P, W, logW)
    pair_dirs = []
    for a, b in combinations(range(k), 2):
        d = np.zeros(k)
        d[a], d[b] = 1.0, -1.0
        pair_dirs.append(d)
    n_sweeps = 1 if k == 2 else sweeps
    # rows that stop improving for a few sweeps are dropped
    idle = np.zeros(len(P), dtype=int)
    active = np.ones(len(P), dtype=bool)
    for _ in range(n_sweeps):
        dirs = list(pair_dirs)
        if k > 2:
            rnd = rng.standard_normal((n_random, k))
            rnd -= rnd.mean(axis=1, keepdims=True)
            dirs.extend(rnd)
        idx = np.flatnonzero(active)
        Pa, ra, ba = P[idx], r[idx], best[idx]
        moved = np.zeros(len(idx), dtype=bool)
        for d0 in dirs:
            for sign in (1.0, -1.0):
                d = np.broadcast_to(sign * d0, Pa.shape)
                neg = d < 0
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = np.where(neg, Pa / -d, np.inf)
                t_lim = np.min(ratio, axis=1)
                t = _feasible_step(Pa, d, ra, t_lim, W)
                cand = np.clip(Pa + t[:, None] * d, 0, None)
                cand /= cand.sum(axis=1, keepdims=True)
                val, _ = _objective(cand, W, logW)
                feas = mutual_information_batch(cand, W) >= ra
                better = feas & (val > ba + 1e-15)
                Pa[better] = cand[better]
                ba[better] = val[better]
                moved |= better
        P[idx], best[idx] = Pa, ba
        idle[idx] = np.where(moved, 0, idle[idx] + 1)
        active = idle < 3
        if not active.any():
            break
    val, x = _objective(P, W, logW)
    return val, x, P


def _refine(w: Channel, P: np.ndarray, r: float):
    """SLSQP on each letter's problem from the polished start; keeps the best feasible point."""
    W = w.matrix
    logW = np.log(W)
    k = w.input_size
    best_val, best_x = _objective(P[None, :], W, logW)
    best_val, best_x, best_P = float(best_val[0]), int(best_x[0]), P.copy()

    def info(p):
        q = p @ W
        return float(np.sum(p[:, None] * W * (logW - np.log(q))))

    def info_grad(p):
        q = p @ W
        return np.sum(W * (logW - np.log(q)), axis=1) - 1.0

    cons = [
        {"type": "ineq", "fun": lambda p: info(p) - r, "jac": info_grad},
        {"type": "eq", "fun": lambda p: p.sum() - 1.0, "jac": lambda p: np.ones(k)},
    ]
    for x in range(k):
        def neg_kl(p, x=x):
            q = np.clip(p @ W, 1e-300, None)
            return -float(np.sum(q * (np.log(q) - logW[x])))

        def neg_kl_grad(p, x=x):
            q = np.clip(p @ W, 1e-300, None)
            return -(W @ (np.log(q) + 1.0 - logW[x]))

        res = minimize(neg_kl, P, jac=neg_kl_grad, bounds=[(0.0, 1.0)] * k, constraints=cons,
                       method="SLSQP", options={"ftol": 1e-14, "maxiter": 200})
        cand = np.clip(res.x, 0.0, None)
        if cand.sum() <= 0:
            continue
        cand /= cand.sum()
        if mutual_information_batch(cand[None, :], W)[0] < r - 1e-10:
            continue
        val = -neg_kl(cand)
        if val > best_val:
            best_val, best_x, best_P = val, x, cand
    return best_val, best_x, best_P


def _check_rate(w: Channel, r: float) -> float:
    c = w.capacity_nats
    if r > c + RATE_CLAMP:
        raise ExponentError(f"rate {r} exceeds capacity {c}")
    return min(r, c)


def j_single(w: Channel, r: float) -> tuple[float, tuple[int, Distribution]]:
    """max over (x, P) with I(P;W) >= r of D(PW || W_x), with its maximizer."""
    r = _check_rate(w, r)
    if r <= 0:
        return w.d_max_nats, (w.reject_letter, Distribution.point_mass(w.input_size, w.accept_letter))
    rates = np.array([r])
    P = _best_start(w, rates)
    val, x, P = _polish(w, P, rates)
    if w.input_size > 2:
        v, xi, p = _refine(w, P[0], r)
        return v, (xi, Distribution.normalized(p))
    return float(val[0]), (int(x[0]), Distribution.normalized(P[0]))


# ---------------------------------------------------------------------------
# tabulated envelope


@dataclass(eq=False)
class JTable:
    """Tabulated j on a rate grid and its upper concave hull."""

    channel: Channel
    rates: np.ndarray
    values: np.ndarray
    letters: np.ndarray
    inputs: np.ndarray
    hull: np.ndarray = field(init=False)

    def __post_init__(self):
        self.hull = _upper_hull(self.rates, self.values)
        hr, hv = self.rates[self.hull], self.values[self.hull]
        if len(hr) > 1:
            self.slopes = np.diff(hv) / np.diff(hr)
            self.intercepts = hv[:-1] - self.slopes * hr[:-1]
        else:
            self.slopes = np.zeros(1)
            self.intercepts = hv[:1].copy()

    def evaluate(self, r) -> np.ndarray:
        """J at rates in (-inf, C]; rates <= 0 give D exactly."""
        r = np.asarray(r, dtype=float)
        hr, hv = self.rates[self.hull], self.values[self.hull]
        out = np.interp(np.clip(r, 0, hr[-1]), hr, hv)
        return np.where(r <= 0, self.channel.d_max_nats, out)

    def plan(self, r: float) -> TimeSharePlan:
        hr = self.rates[self.hull]
        r = min(max(r, 0.0), hr[-1])
        pos = int(np.searchsorted(hr, r, side="right")) - 1
        pos = min(max(pos, 0), len(hr) - 1)
        i1 = self.hull[pos]
        if pos == len(hr) - 1 or hr[pos] == r:
            i2, tau = i1, 1.0
        else:
            i2 = self.hull[pos + 1]
            tau = float((hr[pos + 1] - r) / (hr[pos + 1] - hr[pos]))
        return TimeSharePlan(
            tau,
            int(self.letters[i1]),
            int(self.letters[i2]),
            Distribution.normalized(self.inputs[i1]),
            Distribution.normalized(self.inputs[i2]),
        )


def _upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it lies on or below the chord a -> i
            if (y[b] - y[a]) * (x[i] - x[a]) <= (y[i] - y[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=int)


@lru_cache(maxsize=32)
def j_table(w: Channel, points: int = TABLE_POINTS) -> JTable:
    c = w.capacity_nats
    # clustered at both ends, where j has unbounded slope
    rates = c * np.sin(np.linspace(0.0, 0.5 * np.pi, points)) ** 2
    rates[-1] = c
    P = _best_start(w, rates)
    vals, letters, P = _polish(w, P, rates)
    if w.input_size > 2:
        # line search stalls on larger simplices; SLSQP on a stride of rows
        for i in range(1, points, REFINE_STRIDE):
            v, x, p = _refine(w, P[i].copy(), float(rates[i]))
            if v > vals[i]:
                vals[i], letters[i], P[i] = v, x, p
    vals[0] = w.d_max_nats
    letters[0] = w.reject_letter
    P[0] = 0.0
    P[0, w.accept_letter] = 1.0
    # j is non-increasing: a witness feasible at a higher rate is feasible below it
    for i in range(points - 2, -1, -1):
        if vals[i + 1] > vals[i]:
            vals[i], letters[i], P[i] = vals[i + 1], letters[i + 1], P[i + 1]
    return JTable(w, rates, vals, letters, P)


def j_big(w: Channel, r: float) -> tuple[float, TimeSharePlan]:
    """J(r): the two-point concave envelope of ``j_single``."""
    if r > w.capacity_nats + RATE_CLAMP:
        raise ExponentError(f"rate {r} exceeds capacity {w.capacity_nats}")
    table = j_table(w)
    if r <= 0:
        xa, xr = w.accept_letter, w.reject_letter
        pm = Distribution.point_mass(w.input_size, xa)
        return w.d_max_nats, TimeSharePlan(1.0, xr, xr, pm, pm)
    return float(table.evaluate(r)), table.plan(r)


def J(w: Channel, r) -> np.ndarray | float:
    """Vectorised J without witnesses."""
    out = j_table(w).evaluate(r)
    return float(out) if np.ndim(out) == 0 else out


def perspective(w: Channel, rate: float, phi: float) -> float:
    """phi * J(rate / phi), zero when rate = phi = 0."""
    if phi <= 0:
        if rate > 0:
            raise ExponentError("positive rate with zero time share")
        return 0.0
    u = rate / phi
    c = w.capacity_nats
    if u > c * (1 + RATE_CLAMP) + RATE_CLAMP:
        raise ExponentError(f"rate share {u} exceeds capacity {c}")
    return phi * J(w, min(u, c))


# ---------------------------------------------------------------------------
# message-wise and bit-wise exponents


def burnashev(w: Channel, r: float) -> float:
    c, d = w.capacity_nats, w.d_max_nats
    if r < 0 or r > c + RATE_CLAMP:
        raise ExponentError(f"rate {r} outside [0, C={c}]")
    if c == 0:
        return d
    return max(1 - r / c, 0.0) * d


def emd(w: Channel, r: float, e: float) -> float:
    """Missed-detection exponent at rate r and overall error exponent e."""
    c, d = w.capacity_nats, w.d_max_nats
    if r < 0 or r > c + RATE_CLAMP:
        raise ExponentError(f"rate {r} outside [0, C={c}]")
    if e < 0 or e > burnashev(w, min(r, c)) + RATE_CLAMP:
        raise ExponentError(f"exponent {e} outside the Burnashev region at rate {r}")
    if d == 0:
        return 0.0
    frac = 1 - e / d
    if frac <= 0:
        # footnote convention at (0, D)
        return e
    return e + perspective(w, min(r, c), frac)


def optimal_e1(w: Channel, r1: float, r2: float, e2: float) -> float:
    """Largest first-layer exponent for a two-layer query (closed form)."""
    c, d = w.capacity_nats, w.d_max_nats
    if min(r1, r2, e2) < 0:
        raise ExponentError("rates and exponents must be non-negative")
    if r1 + r2 > c + RATE_CLAMP:
        raise ExponentError(f"r1 + r2 = {r1 + r2} exceeds capacity {c}")
    if c > 0 and e2 > (1 - (r1 + r2) / c) * d + RATE_CLAMP:
        raise ExponentError("e2 outside the Burnashev region")
    if d == 0:
        return 0.0
    s = 1 - (r1 / c if c > 0 else 0.0) - e2 / d
    if s <= 0:
        return e2
    return e2 + perspective(w, r2, s)


def _lp_region(w: Channel, j_rates, c_rates, exponents):
    """max t s.t. exponents_i + t <= (1 - sum phi) D + sum_{j>i} phi_j J(j_rates_j/phi_j).

    Returns (t*, phis) or (None, None) when the linear constraints alone fail.
    The perspective terms are exact on the piecewise-linear envelope:
    phi J(R/phi) = min_k (a_k phi + b_k R) for phi >= R/C.
    """
    table = j_table(w)
    c, d = w.capacity_nats, w.d_max_nats
    ell = len(exponents)
    j_rates = np.asarray(j_rates, dtype=float)
    c_rates = np.asarray(c_rates, dtype=float)
    if c > 0:
        lower = np.maximum(np.maximum(c_rates, 0.0) / c, 0.0)
        lower = np.maximum(lower, np.where(np.arange(ell) > 0, np.maximum(j_rates, 0.0) / c, 0.0))
    else:
        if np.any(np.maximum(c_rates, 0) > 0) or np.any(j_rates[1:] > 0):
            return None, None
        lower = np.zeros(ell)
    if lower.sum() > 1 + 1e-12:
        return None, None
    lower = np.minimum(lower, 1.0)
    n_h = ell - 1
    nv = ell + n_h + 1  # phi_1..phi_l, h_2..h_l, t
    cost = np.zeros(nv)
    cost[-1] = -1.0
    A, b = [], []
    for i in range(ell):
        row = np.zeros(nv)
        row[:ell] = d
        for j in range(i + 1, ell):
            row[ell + j - 1] = -1.0
        row[-1] = 1.0
        A.append(row)
        b.append(d - exponents[i])
    a_k, b_k = table.intercepts, table.slopes
    seg_hi = table.rates[table.hull][1:] if len(table.hull) > 1 else np.array([c])
    for j in range(1, ell):
        # phi_j <= 1 keeps R_j / phi_j >= R_j, so segments left of R_j never bind
        keep = seg_hi >= j_rates[j] - 1e-12
        for ak, bk in zip(a_k[keep], b_k[keep]):
            row = np.zeros(nv)
            row[ell + j - 1] = 1.0
            row[j] = -ak
            A.append(row)
            b.append(bk * j_rates[j])
    row = np.zeros(nv)
    row[:ell] = 1.0
    A.append(row)
    b.append(1.0)
    bounds = [(lo, 1.0) for lo in lower] + [(None, None)] * n_h + [(None, 10.0 * (d + 1))]
    res = linprog(cost, A_ub=np.asarray(A), b_ub=np.asarray(b), bounds=bounds, method="highs",
                  options={"presolve": False})
    if res.status != 0:
        return None, None
    phis = np.clip(res.x[:ell], lower, 1.0)
    if phis.sum() > 1:
        phis = phis / phis.sum()
    return float(res.x[-1]), phis


def phase_slacks(w: Channel, j_rates, exponents, phis) -> np.ndarray:
    """RHS minus LHS of each exponent constraint for a given time-sharing vector."""
    d = w.d_max_nats
    ell = len(exponents)
    terms = [0.0] + [perspective(w, j_rates[j], phis[j]) for j in range(1, ell)]
    base = (1 - sum(phis)) * d
    return np.array([base + sum(terms[i + 1:]) - exponents[i] for i in range(ell)])


def region_feasible(w: Channel, q: RateExponentQuery, tol: float = 1e-6) -> tuple[bool, PhasePlan | None]:
    """Achievability of a rate/exponent vector pair, with a witness time-sharing vector."""
    if min(q.rates) < 0 or min(q.exponents) < 0:
        raise ExponentError("rates and exponents must be non-negative")
    return _feasible(w, q.rates, q.rates, q.exponents, tol)


def _feasible(w, j_rates, c_rates, exponents, tol):
    if all(e <= 0 for e in exponents) and all(r <= 0 for r in c_rates) and all(r <= 0 for r in j_rates[1:]):
        return True, PhasePlan((0.0,) * len(exponents))
    t, phis = _lp_region(w, j_rates, c_rates, exponents)
    if t is None or t < -tol:
        return False, None
    return True, PhasePlan(tuple(phis))


def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """Largest value in [lo, hi] where monotone ``pred`` holds (pred(lo) assumed)."""
    if pred(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_exponent(w: Channel, q: RateExponentQuery, index: int, tol: float = 1e-9) -> float | None:
    """Largest value of exponent ``index`` (0-based) keeping the query feasible."""
    def ok(v):
        exps = list(q.exponents)
        exps[index] = v
        return region_feasible(w, RateExponentQuery(q.rates, exps), tol=0.0)[0]

    if not ok(0.0):
        return None
    return _bisect(ok, 0.0, w.d_max_nats + 1.0, tol)


# ---------------------------------------------------------------------------
# curves


def j_curve(w: Channel, n_points: int) -> list[CurvePoint]:
    c = w.capacity_nats
    xs = np.linspace(0.0, c, n_points) if n_points > 1 else np.array([0.0])
    return [CurvePoint(float(x), *j_big(w, float(x))) for x in xs]


def emd_curve(w: Channel, e: float, n_points: int) -> list[CurvePoint]:
    c, d = w.capacity_nats, w.d_max_nats
    top = c * (1 - e / d) if d > 0 else 0.0
    xs = np.linspace(0.0, max(top, 0.0), n_points) if n_points > 1 else np.array([0.0])
    pts = []
    for x in xs:
        y = emd(w, float(x), e)
        frac = 1 - e / d if d > 0 else 0.0
        plan = j_big(w, float(x) / frac)[1] if frac > 0 else None
        pts.append(CurvePoint(float(x), y, plan))
    return pts


def _parse_axis(axis: str, ell: int) -> tuple[str, int]:
    try:
        kind, idx = axis.split(":")
        i = int(idx) - 1
    except ValueError:
        raise ExponentError(f"invalid axis {axis!r}; expected 'rate:j' or 'exponent:j'") from None
    if kind not in ("rate", "exponent") or not 0 <= i < ell:
        raise ExponentError(f"invalid axis {axis!r}")
    return kind, i


def trace_region_boundary(
    w: Channel,
    fixed: RateExponentQuery,
    sweep: str,
    n_points: int,
    target: str = "exponent:1",
    lo: float = 0.0,
    hi: float | None = None,
    tol: float = 1e-6,
) -> list[CurvePoint]:
    """Sweep one coordinate and find the largest feasible value of ``target``.

    Coordinates of ``fixed`` named by ``sweep`` and ``target`` are ignored.
    Sweep values where even target = 0 is infeasible are omitted.
    """
    ell = fixed.ell
    skind, si = _parse_axis(sweep, ell)
    tkind, ti = _parse_axis(target, ell)
    if (skind, si) == (tkind, ti):
        raise ExponentError("sweep and target axes coincide")
    if tkind != "exponent":
        raise ExponentError("target axis must be an exponent")
    if n_points < 1:
        raise ExponentError("n_points must be positive")
    if hi is None:
        if skind == "rate":
            hi = max(w.capacity_nats - sum(r for j, r in enumerate(fixed.rates) if j != si), 0.0)
        else:
            hi = w.d_max_nats
    xs = np.linspace(lo, hi, n_points) if n_points > 1 and hi > lo else np.array([lo])
    out = []
    for x in xs:
        rates, exps = list(fixed.rates), list(fixed.exponents)
        (rates if skind == "rate" else exps)[si] = float(x)
        exps[ti] = 0.0
        q = RateExponentQuery(rates, exps)
        y = max_exponent(w, q, ti, tol=tol * 1e-3)
        if y is None:
            continue
        exps[ti] = max(y - tol, 0.0)
        _, plan = region_feasible(w, RateExponentQuery(rates, exps), tol=0.0)
        out.append(CurvePoint(float(x), float(y), plan))
    return out


def write_curve_csv(points: list[CurvePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "y", "witness_json"])
        for p in points:
            wr.writerow([repr(p.x), repr(p.y), p.witness_json()])
