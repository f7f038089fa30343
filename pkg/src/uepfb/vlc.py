"""Repeat-until-non-erasure wrappers, Monte Carlo harness, and exact oracle."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import Channel, kl_divergence, mutual_information
from .codec import (
    BitwiseCode,
    BitwiseCodeSpec,
    CodecError,
    DecodeOutcome,
    ErasureCode,
    ErasureCodeSpec,
    MwCode,
    MwCodeSpec,
    control_accepts,
    make_code,
    slack_terms,
    spec_from_json,
    spec_to_json,
)
from .exponents import perspective
from .keyed_rng import MESSAGE_STEP, uniforms

DEFAULT_MAX_ROUNDS = 10_000
BLOCK = 4096
MAX_OUTPUTS = 10**7
Z95 = 1.959963984540054


class SimulationError(ValueError):
    pass


def wilson(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for k successes out of n."""
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


@dataclass(frozen=True)
class VlcScheme:
    inner: ErasureCodeSpec | BitwiseCodeSpec
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if self.max_rounds < 1:
            raise SimulationError("max_rounds must be at least 1")
        if not isinstance(self.inner, (ErasureCodeSpec, BitwiseCodeSpec)):
            raise SimulationError("the variable-length wrapper needs an erasure-capable code")

    def to_json(self) -> dict:
        return {"type": "vlc", "inner": spec_to_json(self.inner), "max_rounds": self.max_rounds}

    @classmethod
    def from_json(cls, obj: dict) -> "VlcScheme":
        return cls(spec_from_json(obj["inner"]), int(obj.get("max_rounds", DEFAULT_MAX_ROUNDS)))


def load_scheme(obj: dict):
    """A ``VlcScheme`` or a fixed-length code spec from its JSON form."""
    if obj.get("type") == "vlc":
        return VlcScheme.from_json(obj)
    return spec_from_json(obj)


def _inner(scheme):
    return scheme.inner if isinstance(scheme, VlcScheme) else scheme


def _labels(k: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """Flat 0-based message indices -> (B, ell) array of 1-based labels."""
    return np.stack(np.unravel_index(np.asarray(k), tuple(sizes)), axis=1) + 1


def _label_key(k: int, sizes: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in _labels(np.array([k]), sizes)[0])


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class _Counts:
    trials: np.ndarray
    correct: np.ndarray
    error: np.ndarray
    erasure: np.ndarray
    truncated: np.ndarray
    layer: np.ndarray
    rounds: np.ndarray
    rounds_sq: np.ndarray
    round_hist: np.ndarray

    @classmethod
    def zeros(cls, k: int, ell: int, max_rounds: int) -> "_Counts":
        z = lambda: np.zeros(k, dtype=np.int64)  # noqa: E731
        return cls(z(), z(), z(), z(), z(), np.zeros((k, ell), dtype=np.int64), z(), z(),
                   np.zeros(max_rounds, dtype=np.int64))

    def __iadd__(self, other: "_Counts") -> "_Counts":
        for f in self.__dataclass_fields__:
            getattr(self, f).__iadd__(getattr(other, f))
        return self


def _pick_messages(seed: int, trial_ids: np.ndarray, pool: np.ndarray) -> np.ndarray:
    u = uniforms(seed, trial_ids, [MESSAGE_STEP])[:, 0]
    return pool[np.minimum((u * pool.size).astype(np.int64), pool.size - 1)]


def _run_block(code, seed: int, trial_ids: np.ndarray, pool: np.ndarray, vlc: bool, max_rounds: int) -> _Counts:
    sizes = code.sizes
    K, ell, n = int(np.prod(sizes)), len(sizes), code.n
    out = _Counts.zeros(K, ell, max_rounds)
    k = _pick_messages(seed, trial_ids, pool)
    msgs = _labels(k, sizes)
    np.add.at(out.trials, k, 1)
    active = np.arange(len(k))
    steps = np.arange(n, dtype=np.uint64)
    for r in range(max_rounds if vlc else 1):
        if active.size == 0:
            break
        U = uniforms(seed, trial_ids[active], steps + np.uint64(r * n))
        dec, erased = code.run(msgs[active], U)
        done = ~erased if vlc else np.ones(active.size, dtype=bool)
        idx = active[done]
        kd = k[idx]
        ok = np.all(dec[done] == msgs[idx], axis=1)
        er = erased[done]
        np.add.at(out.correct, kd, ok & ~er)
        np.add.at(out.erasure, kd, er)
        np.add.at(out.error, kd, ~ok & ~er)
        wrong = np.cumsum(dec[done] != msgs[idx], axis=1) > 0
        np.add.at(out.layer, kd, wrong & ~er[:, None])
        np.add.at(out.rounds, kd, r + 1)
        np.add.at(out.rounds_sq, kd, (r + 1) ** 2)
        out.round_hist[r] += idx.size
        active = active[~done]
    np.add.at(out.truncated, k[active], 1)
    return out


@dataclass
class SimReport:
    """Integer outcome counts of a simulation campaign plus derived estimates.

    For variable-length runs ``erasure`` stays 0 and ``round_hist[r]`` counts
    trials finishing in round r+1; for fixed-length runs every trial takes
    exactly one round and erasures are final outcomes.
    """

    mode: str
    n: int
    sizes: tuple[int, ...]
    trials: int
    seed: int
    counts: _Counts = field(repr=False)
    spec: dict = field(default_factory=dict, repr=False)

    @property
    def ell(self) -> int:
        return len(self.sizes)

    @property
    def message_count(self) -> int:
        return int(np.prod(self.sizes))

    def completed(self) -> np.ndarray:
        c = self.counts
        return c.trials - c.truncated

    # per-message estimates
    def pe_message(self, k: int) -> float:
        d = self.completed()[k]
        return self.counts.error[k] / d if d else float("nan")

    def pera_message(self, k: int) -> float:
        """Erasure probability of one block: final erasures (fixed) or failed rounds (VLC)."""
        c = self.counts
        if self.mode == "fixed":
            return c.erasure[k] / c.trials[k] if c.trials[k] else float("nan")
        rounds = c.rounds[k]
        return (rounds - self.completed()[k]) / rounds if rounds else float("nan")

    def interval(self, kind: str, k: int | None = None) -> tuple[float, float, float]:
        """(estimate, lower, upper) for kind in error/erasure/correct or layer:i."""
        c = self.counts
        sel = slice(None) if k is None else k
        if kind.startswith("layer:"):
            i = int(kind.split(":")[1]) - 1
            num = int(np.sum(c.layer[sel, i]))
            den = int(np.sum(self.completed()[sel]))
        elif kind == "round_erasure":
            num = int(np.sum(c.rounds[sel]) - np.sum(self.completed()[sel]))
            den = int(np.sum(c.rounds[sel]))
        else:
            num = int(np.sum(getattr(c, kind)[sel]))
            den = int(np.sum(self.completed()[sel] if kind != "erasure" else c.trials[sel]))
        if den == 0:
            return float("nan"), 0.0, 1.0
        lo, hi = wilson(num, den)
        return num / den, lo, hi

    def mean_time(self, k: int | None = None) -> tuple[float, float]:
        """Mean decoding time in channel uses and its standard error."""
        c = self.counts
        sel = slice(None) if k is None else k
        m = int(np.sum(self.completed()[sel]))
        if m == 0:
            return float("nan"), float("nan")
        s1 = float(np.sum(c.rounds[sel]))
        s2 = float(np.sum(c.rounds_sq[sel]))
        mean = s1 / m
        var = max(s2 / m - mean * mean, 0.0)
        return self.n * mean, self.n * math.sqrt(var / m)

    def time_transform(self, base: float) -> float:
        """Empirical E[base^T] over completed trials."""
        h = self.counts.round_hist
        tot = h.sum()
        if tot == 0:
            return float("nan")
        r = np.arange(1, h.size + 1)
        nz = h > 0
        return float(np.sum(h[nz] * np.exp(r[nz] * self.n * math.log(base))) / tot)

    def to_json(self) -> dict:
        c = self.counts
        last = int(np.max(np.nonzero(c.round_hist)[0], initial=-1)) + 1
        per = {}
        for k in range(self.message_count):
            if c.trials[k] == 0:
                continue
            per[_label_key(k, self.sizes)] = {
                "trials": int(c.trials[k]),
                "correct": int(c.correct[k]),
                "error": int(c.error[k]),
                "erasure": int(c.erasure[k]),
                "truncated": int(c.truncated[k]),
                "layer_errors": c.layer[k].tolist(),
                "rounds": int(c.rounds[k]),
                "rounds_sq": int(c.rounds_sq[k]),
            }
        est = {}
        for kind in ["error", "erasure", "round_erasure"] + [f"layer:{i + 1}" for i in range(self.ell)]:
            e, lo, hi = self.interval(kind)
            est[kind] = {"estimate": e, "ci95": [lo, hi]}
        mt, se = self.mean_time()
        est["mean_time"] = {"estimate": mt, "se": se}
        return {
            "mode": self.mode,
            "n": self.n,
            "sizes": list(self.sizes),
            "trials": self.trials,
            "seed": self.seed,
            "spec": self.spec,
            "per_message": per,
            "round_hist": c.round_hist[:last].tolist(),
            "estimates": est,
        }

    def to_csv(self) -> str:
        """Per-message summary table."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["message", "trials", "completed", "error", "erasure", "truncated",
                     "pe", "pe_lo", "pe_hi", "pera", "mean_T", "mean_T_se"])
        for k in range(self.message_count):
            if self.counts.trials[k] == 0:
                continue
            e, lo, hi = self.interval("error", k)
            mt, se = self.mean_time(k)
            wr.writerow([_label_key(k, self.sizes), int(self.counts.trials[k]), int(self.completed()[k]),
                         int(self.counts.error[k]), int(self.counts.erasure[k]), int(self.counts.truncated[k]),
                         repr(e), repr(lo), repr(hi), repr(self.pera_message(k)), repr(mt), repr(se)])
        return buf.getvalue()


def simulate(
    scheme,
    w: Channel,
    trials: int,
    seed: int,
    parallelism: int = 1,
    messages: Sequence | None = None,
) -> SimReport:
    """Monte Carlo over ``trials`` independent trials.

    ``scheme`` is a ``VlcScheme`` (repeat until non-erasure) or a fixed-length
    code spec. Messages are drawn uniformly from ``messages`` (labels; repeats
    weight the draw), by default from the whole message set. Trial t's noise
    depends only on (seed, t), so the report does not depend on ``parallelism``.
    """
    if trials < 1:
        raise SimulationError("trials must be at least 1")
    vlc = isinstance(scheme, VlcScheme)
    code = make_code(_inner(scheme), w)
    sizes = code.sizes
    K = int(np.prod(sizes))
    if messages is None:
        pool = np.arange(K)
    else:
        lab = np.array([[m] if np.isscalar(m) else list(m) for m in messages], dtype=np.int64)
        if lab.shape[1] != len(sizes) or np.any(lab < 1) or np.any(lab > np.array(sizes)):
            raise SimulationError("message pool contains invalid labels")
        pool = np.ravel_multi_index(tuple((lab - 1).T), sizes)
    max_rounds = scheme.max_rounds if vlc else 1
    blocks = [np.arange(s, min(s + BLOCK, trials), dtype=np.uint64) for s in range(0, trials, BLOCK)]

    def job(ids):
        return _run_block(code, seed, ids, pool, vlc, max_rounds)

    total = _Counts.zeros(K, len(sizes), max_rounds)
    if parallelism <= 1:
        results = map(job, blocks)
    else:
        ex = ThreadPoolExecutor(max_workers=parallelism)
        results = ex.map(job, blocks)
    for part in results:
        total += part
    if parallelism > 1:
        ex.shutdown()
    spec = scheme.to_json() if vlc else spec_to_json(scheme)
    return SimReport("vlc" if vlc else "fixed", code.n, tuple(sizes), trials, seed, total, spec)


def simulate_fixed(spec, w: Channel, trials: int, seed: int, parallelism: int = 1, messages=None) -> SimReport:
    return simulate(spec, w, trials, seed, parallelism, messages)


def run_vlc(scheme: VlcScheme, w: Channel, message, rng_seed: int, trial: int = 0):
    """One variable-length transmission: (DecodeOutcome, T). T is None when truncated."""
    code = make_code(scheme.inner, w)
    lab = np.atleast_1d(np.asarray(message, dtype=np.int64))
    if lab.size != len(code.sizes) or np.any(lab < 1) or np.any(lab > np.array(code.sizes)):
        raise CodecError(f"invalid message {message!r}")
    n = code.n
    steps = np.arange(n, dtype=np.uint64)
    for r in range(scheme.max_rounds):
        U = uniforms(rng_seed, [trial], steps + np.uint64(r * n))
        dec, erased = code.run(lab[None, :], U)
        if not erased[0]:
            return DecodeOutcome("message", tuple(int(v) for v in dec[0])), (r + 1) * n
    return DecodeOutcome("erasure"), None


# ---------------------------------------------------------------------------
# exact oracle


def _all_outputs(ny: int, L: int) -> np.ndarray:
    if L == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(ny), repeat=L)), dtype=np.int64)


def _phase_matrix(book, w: Channel) -> np.ndarray:
    """T[m, t]: probability that codeword m yields decoder label t (0 = none)."""
    Y = _all_outputs(w.output_size, book.n)
    logW = np.log(w.matrix)
    X = book.codewords
    logp = np.zeros((X.shape[0], Y.shape[0]))
    for t in range(book.n):
        logp += logW[X[:, t]][:, Y[:, t]]
    lab = book.decode_batch(Y)
    onehot = np.zeros((Y.shape[0], X.shape[0] + 1))
    onehot[np.arange(Y.shape[0]), lab] = 1.0
    return np.exp(logp) @ onehot


def _accept_prob(w: Channel, letter: int, L: int, threshold: float, accept_letter: int) -> float:
    Y = _all_outputs(w.output_size, L)
    p = np.exp(np.log(w.matrix[letter])[Y].sum(axis=1))
    return float(p[control_accepts(Y, w, threshold, accept_letter)].sum())


@dataclass
class ExactOutcomeTable:
    """``joint[k, o]`` = P(outcome o | message k); o = 0 is erasure, o = j+1 decodes flat message j."""

    n: int
    sizes: tuple[int, ...]
    joint: np.ndarray

    @property
    def ell(self) -> int:
        return len(self.sizes)

    @property
    def message_count(self) -> int:
        return int(np.prod(self.sizes))

    def correct(self) -> np.ndarray:
        K = self.message_count
        return self.joint[np.arange(K), np.arange(K) + 1]

    def erasure(self) -> np.ndarray:
        return self.joint[:, 0]

    def error(self) -> np.ndarray:
        K = self.message_count
        dec = self.joint[:, 1:]
        return dec.sum(axis=1) - dec[np.arange(K), np.arange(K)]

    def layer(self) -> np.ndarray:
        """(K, ell): P(decoded and some of the first i sub-messages wrong | k)."""
        K = self.message_count
        lab = _labels(np.arange(K), self.sizes)
        wrong = np.cumsum(lab[:, None, :] != lab[None, :, :], axis=2) > 0  # [k, j, i]
        return np.einsum("kj,kji->ki", self.joint[:, 1:], wrong)

    def vlc_error(self) -> np.ndarray:
        return self.error() / (1 - self.erasure())

    def vlc_layer(self) -> np.ndarray:
        return self.layer() / (1 - self.erasure())[:, None]

    def vlc_mean_time(self) -> np.ndarray:
        return self.n / (1 - self.erasure())

    def to_json(self) -> dict:
        K = self.message_count
        return {
            "mode": "exact",
            "n": self.n,
            "sizes": list(self.sizes),
            "per_message": {
                _label_key(k, self.sizes): {
                    "correct": float(self.correct()[k]),
                    "error": float(self.error()[k]),
                    "erasure": float(self.erasure()[k]),
                    "layer_errors": self.layer()[k].tolist(),
                    "outcomes": self.joint[k].tolist(),
                }
                for k in range(K)
            },
        }


def exact_enumerate(spec, w: Channel) -> ExactOutcomeTable:
    """Exact outcome distribution by summing over every output string."""
    spec = _inner(spec)
    if w.output_size ** spec.n > MAX_OUTPUTS:
        raise SimulationError(f"|Y|^n = {w.output_size}^{spec.n} exceeds {MAX_OUTPUTS}")
    code = make_code(spec, w)
    if isinstance(code, MwCode):
        T = _phase_matrix(code.book, w)
        M = spec.msg_count
        joint = np.zeros((M, M + 1))
        joint[:, 1:] = T[:, 1:]
        joint[:, code.FALLBACK] += T[:, 0]
        return ExactOutcomeTable(spec.n, code.sizes, joint)
    if isinstance(code, ErasureCode):
        T = _phase_matrix(code.book, w)
        M = spec.inner.msg_count
        args = (spec.control_len, spec.control_threshold, spec.accept_letter)
        acc_a = _accept_prob(w, spec.accept_letter, *args)
        acc_r = _accept_prob(w, spec.reject_letter, *args)
        joint = np.zeros((M, M + 1))
        joint[:, 1:] = T[:, 1:] * acc_r
        joint[np.arange(M), np.arange(M) + 1] = np.diag(T[:, 1:]) * acc_a
        joint[:, 0] = 1.0 - joint[:, 1:].sum(axis=1)
        return ExactOutcomeTable(spec.n, code.sizes, joint)
    return _exact_bitwise(code, w)


def _exact_bitwise(code: BitwiseCode, w: Channel) -> ExactOutcomeTable:
    spec = code.spec
    mats = [_phase_matrix(b, w) for b in code.books]
    L = spec.phase_lens[-1]
    args = (L, spec.control_threshold, spec.accept_letter)
    acc = {True: _accept_prob(w, spec.accept_letter, *args), False: _accept_prob(w, spec.reject_letter, *args)}
    sizes = spec.sizes
    K = int(np.prod(sizes))
    joint = np.zeros((K, K + 1))
    for k in range(K):
        msg = _labels(np.array([k]), sizes)[0]
        # walk all tentative paths; state: previous phase decoded correctly
        paths = [(1.0, True, ())]
        for i, T in enumerate(mats):
            nxt = []
            for p, ok, tents in paths:
                cur = 1 + ok * int(msg[i])
                for t in range(T.shape[1]):
                    q = p * T[cur - 1, t]
                    if q > 0:
                        nxt.append((q, t == cur, tents + (t,)))
            paths = nxt
        for p, ok, tents in paths:
            if any(t <= 1 for t in tents):
                joint[k, 0] += p
                continue
            o = int(np.ravel_multi_index(tuple(t - 2 for t in tents), sizes))
            joint[k, o + 1] += p * acc[ok]
            joint[k, 0] += p * (1 - acc[ok])
    return ExactOutcomeTable(spec.n, tuple(sizes), joint)


# ---------------------------------------------------------------------------
# achievability verification


@dataclass(frozen=True)
class Verdict:
    bound_name: str
    bound_value: float
    observed: float
    margin: float
    status: str  # pass | fail | vacuous

    def to_json(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "bound_value": self.bound_value,
            "observed": self.observed,
            "margin": self.margin,
            "status": self.status,
        }


def probability_verdict(name: str, bound: float, observed: float) -> Verdict:
    """observed must not exceed bound; bounds >= 1 say nothing about a probability."""
    if not bound < 1.0:
        status = "vacuous"
    else:
        status = "pass" if observed <= bound else "fail"
    return Verdict(name, float(bound), float(observed), float(bound - observed), status)


def _safe_exp(x: float) -> float:
    return math.exp(min(x, 700.0))


def _bounds_mw(spec: MwCodeSpec, w: Channel):
    """Lemma-type bounds of the erasure-free code: (pe_1 bound, pe_m bound, count bound)."""
    n = spec.n
    eps, _ = slack_terms(n, 1, w)
    q1, q2 = spec.p1.probs @ w.matrix, spec.p2.probs @ w.matrix
    tau = spec.tau
    kl = tau * kl_divergence(q1, w.row(spec.x1)) + (1 - tau) * kl_divergence(q2, w.row(spec.x2))
    info = tau * mutual_information(spec.p1, w) + (1 - tau) * mutual_information(spec.p2, w)
    return _safe_exp(-n * (kl - eps)), eps, _safe_exp(n * (info - eps))


def _bounds_erasure(spec: ErasureCodeSpec, w: Channel):
    n, R, E, D = spec.n, spec.rate, spec.exponent, w.d_max_nats
    eps, _ = slack_terms(n, 1, w)
    s = 1 - E / D if D > 0 else 0.0
    inner = perspective(w, R, s) if s > 0 else 0.0
    pe1 = _safe_exp(-n * (E + inner - eps))
    pem = eps * min(1.0, _safe_exp(-n * (E - eps)))
    pera = eps + _safe_exp(-n * (inner - eps))
    return pe1, pem, pera


def _bounds_bitwise(spec: BitwiseCodeSpec, w: Channel):
    n, ell = spec.n, spec.ell
    _, eps = slack_terms(n, ell, w)
    phis = list(spec.phis) if spec.phis else [ln / n for ln in spec.phase_lens[:-1]]
    rates = list(spec.rates) if spec.rates else [math.log(s) / n for s in spec.sizes]
    phis.append(1 - sum(phis))
    rates.append(0.0)
    terms = [perspective(w, r, p) for r, p in zip(rates, phis)]
    pemb = [eps * _safe_exp(-n * (-eps + sum(terms[i + 1:]))) for i in range(ell)]
    return pemb, eps


def _observations(source, kind: str, vlc_view: bool):
    """Per-message (value, label) list; reports give the upper 95% limit."""
    if isinstance(source, ExactOutcomeTable):
        K = source.message_count
        if kind == "error":
            v = source.vlc_error() if vlc_view else source.error()
        elif kind == "erasure":
            v = source.erasure()
        else:
            i = int(kind.split(":")[1]) - 1
            v = (source.vlc_layer() if vlc_view else source.layer())[:, i]
        return [(float(v[k]), k) for k in range(K)]
    out = []
    for k in range(source.message_count):
        if source.counts.trials[k] == 0:
            continue
        kk = "round_erasure" if kind == "erasure" and source.mode == "vlc" else kind
        out.append((source.interval(kk, k)[2], k))
    return out


def verify_achievability(source, spec, w: Channel) -> list[Verdict]:
    """Check a report or exact table against the non-asymptotic achievability bounds.

    Fixed-length sources are compared with the bounds directly. For
    variable-length reports the error bounds are divided by one minus the
    erasure bound, the repeat-until-non-erasure conversion.
    """
    spec_in = _inner(spec)
    if tuple(source.sizes) != tuple(make_sizes(spec_in)) or source.n != spec_in.n:
        raise SimulationError("report does not match the code spec")
    vlc_view = isinstance(source, SimReport) and source.mode == "vlc"
    verdicts = []

    def per_message(name, kind, bound_of):
        for value, k in _observations(source, kind, vlc_view):
            b = bound_of(k)
            verdicts.append(probability_verdict(f"{name}[{_label_key(k, source.sizes)}]", b, value))

    if isinstance(spec_in, MwCodeSpec):
        pe1, pem, count = _bounds_mw(spec_in, w)
        per_message("mw.pe", "error", lambda k: pe1 if k == 0 else pem)
        m = spec_in.msg_count
        status = "vacuous" if count <= 2 else ("pass" if m >= count else "fail")
        verdicts.append(Verdict("mw.msg_count", count, float(m), float(m - count), status))
    elif isinstance(spec_in, ErasureCodeSpec):
        pe1, pem, pera = _bounds_erasure(spec_in, w)
        conv = (1 - pera) if (vlc_view and pera < 1) else (0.0 if vlc_view else 1.0)
        scale = (lambda b: b / conv if conv > 0 else math.inf)
        per_message("erasure_code.pe", "error", lambda k: scale(pe1 if k == 0 else pem))
        per_message("erasure_code.pera", "erasure", lambda k: pera)
    else:
        pemb, pera = _bounds_bitwise(spec_in, w)
        conv = (1 - pera) if (vlc_view and pera < 1) else (0.0 if vlc_view else 1.0)
        for i in range(spec_in.ell):
            b = pemb[i] / conv if conv > 0 else math.inf
            per_message(f"bitwise.pemb{i + 1}", f"layer:{i + 1}", lambda k, b=b: b)
        per_message("bitwise.pera", "erasure", lambda k: pera)
    return verdicts


def make_sizes(spec) -> tuple[int, ...]:
    if isinstance(spec, MwCodeSpec):
        return (spec.msg_count,)
    if isinstance(spec, ErasureCodeSpec):
        return (spec.inner.msg_count,)
    return tuple(spec.sizes)


def _finite(obj):
    """Replace NaN and infinities by None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_finite(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
