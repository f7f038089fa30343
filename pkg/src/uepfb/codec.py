"""Encoders and decoders of the unequal-error-protection constructions.

Three fixed-length codes are provided:

* ``MwCode``       -- time-shared two-letter codeword for message 1, random
                      codewords for the rest, typicality decoding.
* ``ErasureCode``  -- an ``MwCode`` followed by an accept/reject control phase.
* ``BitwiseCode``  -- ell ``MwCode`` phases with implicit acceptance and
                      explicit rejection, then a control phase.

Messages are 1-based labels. Label 1 is the specially protected message of
an ``MwCode`` and the reserved rejection symbol of every bit-wise phase.
Decoders return 0 for "no decision".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import Channel, Distribution
from .exponents import TimeSharePlan, j_big

NO_DECISION = 0


class CodecError(ValueError):
    pass


def typicality_threshold(nx: int, ny: int, n_phase: int, n_total: int, factor: float = 1.0) -> float:
    """|X||Y| sqrt(factor * n_phase * ln(1 + n_total))."""
    return nx * ny * math.sqrt(factor * n_phase * math.log1p(n_total))


def slack_terms(n: int, ell: int, w: Channel) -> tuple[float, float]:
    """(eps_n, eps_{n,ell}) of the non-asymptotic achievability bounds."""
    if n < 1 or ell < 1:
        raise CodecError("n and ell must be positive")
    eps = (
        10 * w.input_size * w.output_size * math.log(math.e / w.lam)
        * math.sqrt(math.log1p(n)) / math.sqrt(n)
    )
    return eps, eps * math.sqrt(1 + ell)


def _derived_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, dtype=np.uint64)[0] >> 1)


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class MwCodeSpec:
    n: int
    tau: float
    x1: int
    x2: int
    p1: Distribution
    p2: Distribution
    msg_count: int
    seed: int
    threshold: float

    def __post_init__(self):
        if self.n < 0:
            raise CodecError("block length must be non-negative")
        if not 0.0 <= self.tau <= 1.0:
            raise CodecError("tau must lie in [0, 1]")
        if self.msg_count < 2:
            raise CodecError("a code needs at least two messages")
        if len(self.p1) != len(self.p2):
            raise CodecError("p1 and p2 must share the input alphabet")

    @property
    def n_tau(self) -> int:
        # guard against tau * n landing just below an integer
        return min(self.n, math.floor(self.tau * self.n + 1e-9))

    @classmethod
    def design(
        cls,
        w: Channel,
        n: int,
        plan: TimeSharePlan,
        msg_count: int,
        seed: int,
        factor: float = 1.0,
        horizon: int | None = None,
        threshold_scale: float = 1.0,
    ) -> "MwCodeSpec":
        thr = threshold_scale * typicality_threshold(
            w.input_size, w.output_size, n, n if horizon is None else horizon, factor
        )
        return cls(n, plan.tau, plan.x1, plan.x2, plan.p1, plan.p2, msg_count, seed, thr)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "tau": self.tau,
            "x1": self.x1,
            "x2": self.x2,
            "p1": self.p1.tolist(),
            "p2": self.p2.tolist(),
            "msg_count": self.msg_count,
            "seed": self.seed,
            "threshold": self.threshold,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MwCodeSpec":
        return cls(
            int(obj["n"]),
            float(obj["tau"]),
            int(obj["x1"]),
            int(obj["x2"]),
            Distribution(obj["p1"]),
            Distribution(obj["p2"]),
            int(obj["msg_count"]),
            int(obj["seed"]),
            float(obj["threshold"]),
        )


@dataclass(frozen=True)
class ErasureCodeSpec:
    """Message-wise code of length ``inner.n`` followed by a control phase."""

    inner: MwCodeSpec
    n: int
    control_threshold: float
    accept_letter: int
    reject_letter: int
    rate: float = 0.0
    exponent: float = 0.0

    def __post_init__(self):
        if not 1 <= self.inner.n <= self.n:
            raise CodecError("inner length must lie in [1, n]")

    @property
    def control_len(self) -> int:
        return self.n - self.inner.n

    @classmethod
    def design(
        cls,
        w: Channel,
        n: int,
        rate: float,
        exponent: float,
        msg_count: int,
        seed: int,
        threshold_scale: float = 1.0,
        control_scale: float = 1.0,
    ) -> "ErasureCodeSpec":
        d, c = w.d_max_nats, w.capacity_nats
        n1 = math.ceil((1 - exponent / d) * n - 1e-9) if d > 0 else n
        n1 = min(max(n1, 1), n)
        inner_rate = min(n * rate / n1, c)
        _, plan = j_big(w, inner_rate)
        inner = MwCodeSpec.design(w, n1, plan, msg_count, seed, 5.0, n, threshold_scale)
        ctrl = control_scale * typicality_threshold(w.input_size, w.output_size, n - n1, n, 5.0)
        return cls(inner, n, ctrl, w.accept_letter, w.reject_letter, rate, exponent)

    def to_json(self) -> dict:
        return {
            "type": "erasure",
            "inner": self.inner.to_json(),
            "n": self.n,
            "control_threshold": self.control_threshold,
            "accept_letter": self.accept_letter,
            "reject_letter": self.reject_letter,
            "rate": self.rate,
            "exponent": self.exponent,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ErasureCodeSpec":
        return cls(
            MwCodeSpec.from_json(obj["inner"]),
            int(obj["n"]),
            float(obj["control_threshold"]),
            int(obj["accept_letter"]),
            int(obj["reject_letter"]),
            float(obj.get("rate", 0.0)),
            float(obj.get("exponent", 0.0)),
        )


@dataclass(frozen=True)
class BitwiseCodeSpec:
    """ell message-wise phases plus a control phase; ``sizes[i]`` = |M_i|."""

    n: int
    sizes: tuple[int, ...]
    phases: tuple[MwCodeSpec, ...]
    control_threshold: float
    accept_letter: int
    reject_letter: int
    rates: tuple[float, ...] = ()
    phis: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "phases", tuple(self.phases))
        if len(self.sizes) != len(self.phases) or not self.sizes:
            raise CodecError("one phase code per sub-message is required")
        for s, ph in zip(self.sizes, self.phases):
            if s < 1 or ph.msg_count != s + 1:
                raise CodecError("phase i must carry |M_i| + 1 messages")
            if ph.n < 1:
                raise CodecError("every message phase needs at least one channel use")
        if sum(ph.n for ph in self.phases) > self.n:
            raise CodecError("phase lengths exceed the block length")

    @property
    def ell(self) -> int:
        return len(self.sizes)

    @property
    def phase_lens(self) -> tuple[int, ...]:
        lens = tuple(ph.n for ph in self.phases)
        return lens + (self.n - sum(lens),)

    @classmethod
    def design(
        cls,
        w: Channel,
        n: int,
        sizes: Sequence[int],
        phis: Sequence[float],
        seed: int,
        rates: Sequence[float] | None = None,
        threshold_scale: float = 1.0,
        control_scale: float = 1.0,
    ) -> "BitwiseCodeSpec":
        """Phase i has length floor(phi_i n) and uses a J-optimal plan at rate R_i/phi_i.

        ``rates`` default to ln|M_i| / n.
        """
        if rates is None:
            rates = [math.log(s) / n for s in sizes]
        c = w.capacity_nats
        phases = []
        for i, (s, phi, r) in enumerate(zip(sizes, phis, rates)):
            ni = math.floor(phi * n + 1e-9)
            u = min(r / phi, c) if phi > 0 else 0.0
            _, plan = j_big(w, u)
            phases.append(
                MwCodeSpec.design(w, ni, plan, s + 1, _derived_seed(seed, i), 4.0, n, threshold_scale)
            )
        n_ctrl = n - sum(p.n for p in phases)
        ctrl = control_scale * typicality_threshold(w.input_size, w.output_size, n_ctrl, n, 4.0)
        return cls(n, tuple(sizes), tuple(phases), ctrl, w.accept_letter, w.reject_letter,
                   tuple(float(r) for r in rates), tuple(float(p) for p in phis))

    def to_json(self) -> dict:
        return {
            "type": "bitwise",
            "n": self.n,
            "sizes": list(self.sizes),
            "phases": [p.to_json() for p in self.phases],
            "control_threshold": self.control_threshold,
            "accept_letter": self.accept_letter,
            "reject_letter": self.reject_letter,
            "rates": list(self.rates),
            "phis": list(self.phis),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BitwiseCodeSpec":
        return cls(
            int(obj["n"]),
            tuple(obj["sizes"]),
            tuple(MwCodeSpec.from_json(p) for p in obj["phases"]),
            float(obj["control_threshold"]),
            int(obj["accept_letter"]),
            int(obj["reject_letter"]),
            tuple(obj.get("rates", ())),
            tuple(obj.get("phis", ())),
        )


def spec_to_json(spec) -> dict:
    if isinstance(spec, MwCodeSpec):
        return {"type": "mw", **spec.to_json()}
    return spec.to_json()


def spec_from_json(obj: dict):
    kind = obj.get("type", "mw")
    if kind == "mw":
        return MwCodeSpec.from_json(obj)
    if kind == "erasure":
        return ErasureCodeSpec.from_json(obj)
    if kind == "bitwise":
        return BitwiseCodeSpec.from_json(obj)
    raise CodecError(f"unknown code type {kind!r}")


@dataclass(frozen=True)
class DecodeOutcome:
    kind: str  # "message" | "erasure"
    message: tuple[int, ...] | None = None


# ---------------------------------------------------------------------------
# channel transmission


def transmit(w: Channel, X: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Channel outputs for inputs ``X`` by inverse CDF of uniforms ``U``."""
    cdf = w.cdf
    if w.output_size == 2:
        return (U >= cdf[X, 0]).astype(np.int64)
    Y = np.zeros(X.shape, dtype=np.int64)
    for y in range(w.output_size - 1):
        Y += U >= cdf[X, y]
    return Y


# ---------------------------------------------------------------------------
# message-wise code


def _segment_output_stat(Y: np.ndarray, q: np.ndarray) -> np.ndarray:
    """len * TV(emp(Y_row), q) for each row of Y."""
    L = Y.shape[1]
    if L == 0:
        return np.zeros(Y.shape[0])
    counts = np.stack([(Y == y).sum(axis=1) for y in range(q.size)], axis=1)
    return 0.5 * np.abs(counts - L * q).sum(axis=1)


def _segment_joint_stat(Y: np.ndarray, X: np.ndarray, joint: np.ndarray) -> np.ndarray:
    """len * TV(emp(X_m, Y_b), joint) for every output row b and codeword m -> (B, M)."""
    B, L = Y.shape
    M = X.shape[0]
    if L == 0:
        return np.zeros((B, M))
    nx, ny = joint.shape
    xo = [(X == x).astype(np.float64) for x in range(nx)]
    stat = np.zeros((B, M))
    for y in range(ny):
        yo = (Y == y).astype(np.float64)
        for x in range(nx):
            stat += np.abs(yo @ xo[x].T - L * joint[x, y])
    return 0.5 * stat


@dataclass(eq=False)
class Codebook:
    """Materialised code for an ``MwCodeSpec`` on a given channel."""

    spec: MwCodeSpec
    channel: Channel
    codewords: np.ndarray = field(repr=False)

    def __post_init__(self):
        w, s = self.channel, self.spec
        self.q1 = s.p1.probs @ w.matrix
        self.q2 = s.p2.probs @ w.matrix
        self.joint1 = s.p1.probs[:, None] * w.matrix
        self.joint2 = s.p2.probs[:, None] * w.matrix
        self.codewords.setflags(write=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def threshold(self) -> float:
        return self.spec.threshold

    def statistics(self, Y: np.ndarray):
        """(message-1 statistic (B,), codeword typicality statistic (B, M))."""
        nt = self.spec.n_tau
        Y = np.asarray(Y, dtype=np.int64)
        if Y.ndim == 1:
            Y = Y[None, :]
        if Y.shape[1] != self.n:
            raise CodecError(f"output length {Y.shape[1]} != block length {self.n}")
        s1 = _segment_output_stat(Y[:, :nt], self.q1) + _segment_output_stat(Y[:, nt:], self.q2)
        X = self.codewords
        sj = _segment_joint_stat(Y[:, :nt], X[:, :nt], self.joint1)
        sj += _segment_joint_stat(Y[:, nt:], X[:, nt:], self.joint2)
        return s1, sj

    def decode_batch(self, Y: np.ndarray) -> np.ndarray:
        """Decoded labels (B,), 0 where y lies in no decoding region."""
        s1, sj = self.statistics(Y)
        thr = self.threshold
        typical = sj < thr
        unique = typical.sum(axis=1) == 1
        which = np.argmax(typical, axis=1) + 1
        out = np.where(unique & (which >= 2), which, NO_DECISION)
        return np.where(s1 >= thr, 1, out)


def build_mw_codebook(spec: MwCodeSpec, w: Channel) -> Codebook:
    if len(spec.p1) != w.input_size:
        raise CodecError("spec input alphabet does not match the channel")
    rng = np.random.default_rng(spec.seed)
    n, nt = spec.n, spec.n_tau
    others = spec.msg_count - 1
    first = rng.choice(w.input_size, size=(others, nt), p=spec.p1.probs)
    second = rng.choice(w.input_size, size=(others, n - nt), p=spec.p2.probs)
    top = np.r_[np.full(nt, spec.x1), np.full(n - nt, spec.x2)][None, :]
    cw = np.vstack([top, np.hstack([first, second])]).astype(np.int64)
    return Codebook(spec, w, cw)


def decode_mw(book: Codebook, y) -> DecodeOutcome:
    label = int(book.decode_batch(np.asarray(y)[None, :])[0])
    if label == NO_DECISION:
        return DecodeOutcome("erasure")
    return DecodeOutcome("message", (label,))


def control_decode(y_ctrl, w: Channel, threshold: float, accept_letter: int | None = None) -> bool:
    """Accept iff len * TV(emp(y_ctrl), W_xa) < threshold."""
    xa = w.accept_letter if accept_letter is None else accept_letter
    Y = np.asarray(y_ctrl, dtype=np.int64)
    return bool(control_accepts(Y[None, :], w, threshold, xa)[0])


def control_accepts(Y: np.ndarray, w: Channel, threshold: float, accept_letter: int) -> np.ndarray:
    if Y.shape[1] == 0:
        return np.ones(Y.shape[0], dtype=bool)
    return _segment_output_stat(Y, w.matrix[accept_letter]) < threshold


# ---------------------------------------------------------------------------
# code objects with batch transmission
#
# run(messages, U) takes 1-based labels of shape (B, ell) and uniforms of
# shape (B, n) and returns (decoded (B, ell) with 0 on erasure, erased (B,)).


class MwCode:
    """The erasure-free message-wise code; no-decision outputs decode to message 2."""

    FALLBACK = 2

    def __init__(self, spec: MwCodeSpec, w: Channel):
        self.spec = spec
        self.channel = w
        self.book = build_mw_codebook(spec, w)
        self.n = spec.n
        self.sizes = (spec.msg_count,)

    def decide(self, Y: np.ndarray) -> np.ndarray:
        lab = self.book.decode_batch(Y)
        return np.where(lab == NO_DECISION, self.FALLBACK, lab)

    def run(self, messages: np.ndarray, U: np.ndarray):
        X = self.book.codewords[messages[:, 0] - 1]
        Y = transmit(self.channel, X, U)
        dec = self.decide(Y)
        return dec[:, None], np.zeros(len(dec), dtype=bool)


class ErasureCode:
    def __init__(self, spec: ErasureCodeSpec, w: Channel):
        self.spec = spec
        self.channel = w
        self.book = build_mw_codebook(spec.inner, w)
        self.n = spec.n
        self.sizes = (spec.inner.msg_count,)

    def encode(self, message: int, tentative: int) -> np.ndarray:
        return encode_erasure_code(self.spec, self.book, message, tentative)

    def run(self, messages: np.ndarray, U: np.ndarray):
        s, w = self.spec, self.channel
        n1 = s.inner.n
        m = messages[:, 0]
        Y1 = transmit(w, self.book.codewords[m - 1], U[:, :n1])
        tent = self.book.decode_batch(Y1)
        letter = np.where(tent == m, s.accept_letter, s.reject_letter)
        X2 = np.broadcast_to(letter[:, None], (len(m), s.control_len))
        Y2 = transmit(w, X2, U[:, n1:])
        ok = control_accepts(Y2, w, s.control_threshold, s.accept_letter)
        erased = ~ok | (tent == NO_DECISION)
        return np.where(erased, 0, tent)[:, None], erased


def encode_erasure_code(spec: ErasureCodeSpec, book: Codebook, message: int, tentative: int) -> np.ndarray:
    """Input letters of the full block given the fed-back tentative decision."""
    if not 1 <= message <= spec.inner.msg_count:
        raise CodecError(f"message {message} outside [1, {spec.inner.msg_count}]")
    letter = spec.accept_letter if tentative == message else spec.reject_letter
    return np.r_[book.codewords[message - 1], np.full(spec.control_len, letter, dtype=np.int64)]


def encode_bitwise(spec: BitwiseCodeSpec, message: Sequence[int], tentatives: Sequence[int]) -> list[int]:
    """Phase messages m~_1..m~_{ell+1} given the sub-messages and tentative decisions.

    m~_i = 1 + [t_{i-1} == m~_{i-1}] m_i with t_0 = m~_0 = 1 and m_{ell+1} = 1;
    only the first ``len(tentatives)`` decisions are used, so phase i needs t_1..t_{i-1}.
    """
    ell = spec.ell
    if len(message) != ell:
        raise CodecError("message vector has the wrong length")
    for mi, si in zip(message, spec.sizes):
        if not 1 <= mi <= si:
            raise CodecError(f"sub-message {mi} outside [1, {si}]")
    subs = list(message) + [1]
    out = []
    prev_t, prev_m = 1, 1
    for i in range(ell + 1):
        cur = 1 + (prev_t == prev_m) * subs[i]
        out.append(cur)
        if i >= len(tentatives):
            break
        prev_t, prev_m = tentatives[i], cur
    return out


def decode_bitwise(tentatives: Sequence[int]) -> DecodeOutcome:
    """Decision from the ell+1 tentative decisions (control: 2 accept, 1 reject)."""
    if any(t in (NO_DECISION, 1) for t in tentatives):
        return DecodeOutcome("erasure")
    return DecodeOutcome("message", tuple(int(t) - 1 for t in tentatives[:-1]))


class BitwiseCode:
    def __init__(self, spec: BitwiseCodeSpec, w: Channel):
        self.spec = spec
        self.channel = w
        self.books = [build_mw_codebook(p, w) for p in spec.phases]
        self.n = spec.n
        self.sizes = spec.sizes

    def run(self, messages: np.ndarray, U: np.ndarray):
        s, w = self.spec, self.channel
        B = messages.shape[0]
        prev_ok = np.ones(B, dtype=bool)
        tents = []
        start = 0
        for i, book in enumerate(self.books):
            L = book.n
            cur = 1 + prev_ok * messages[:, i]
            Y = transmit(w, book.codewords[cur - 1], U[:, start:start + L])
            t = book.decode_batch(Y)
            tents.append(t)
            prev_ok = t == cur
            start += L
        letter = np.where(prev_ok, s.accept_letter, s.reject_letter)
        L = s.n - start
        Y = transmit(w, np.broadcast_to(letter[:, None], (B, L)), U[:, start:start + L])
        ok = control_accepts(Y, w, s.control_threshold, s.accept_letter)
        T = np.stack(tents, axis=1)
        erased = ~ok | np.any(T <= 1, axis=1)
        return np.where(erased[:, None], 0, T - 1), erased


def make_code(spec, w: Channel):
    if isinstance(spec, MwCodeSpec):
        return MwCode(spec, w)
    if isinstance(spec, ErasureCodeSpec):
        return ErasureCode(spec, w)
    if isinstance(spec, BitwiseCodeSpec):
        return BitwiseCode(spec, w)
    raise CodecError(f"unsupported spec {type(spec).__name__}")
