"""Finite-alphabet probability primitives: distributions, DMCs, divergences.

All logarithms are natural; rates and divergences are in nats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

SUM_TOL = 1e-12
LOAD_TOL = 1e-9
MAX_ALPHABET = 64


class ChannelError(ValueError):
    """Raised for malformed distributions or channel matrices."""


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0 or p.size > MAX_ALPHABET:
            raise ChannelError(f"alphabet size {p.size} outside [1, {MAX_ALPHABET}]")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ChannelError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ChannelError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights: Sequence[float]) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Distribution":
        p = np.zeros(size)
        p[index] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls(np.full(size, 1.0 / size))

    @property
    def size(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def tolist(self) -> list[float]:
        return self.probs.tolist()


@dataclass(frozen=True)
class EmpiricalDist:
    """Symbol counts of a finite sequence."""

    counts: np.ndarray
    length: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64).ravel()
        if np.any(c < 0) or c.sum() <= 0:
            raise ChannelError("counts must be non-negative with positive total")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "length", int(c.sum()))

    def normalized(self) -> Distribution:
        return Distribution(self.counts / self.length)

    def __add__(self, other: "EmpiricalDist") -> "EmpiricalDist":
        if self.counts.size != other.counts.size:
            raise ChannelError("alphabet size mismatch")
        return EmpiricalDist(self.counts + other.counts)


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def total_variation(p, q) -> float:
    a, b = _as_probs(p), _as_probs(q)
    if a.shape != b.shape:
        raise ChannelError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def kl_divergence(p, q) -> float:
    """D(p||q) in nats with 0 ln 0 = 0."""
    a, b = _as_probs(p), _as_probs(q)
    if a.shape != b.shape:
        raise ChannelError(f"dimension mismatch: {a.shape} vs {b.shape}")
    support = a > 0
    if np.any(b[support] <= 0):
        raise ChannelError("q vanishes where p is positive")
    return float(np.sum(a[support] * np.log(a[support] / b[support])))


def binary_entropy(s: float) -> float:
    if s <= 0.0 or s >= 1.0:
        return 0.0
    return -s * np.log(s) - (1 - s) * np.log1p(-s)


@dataclass(frozen=True, eq=False)
class Channel:
    """Discrete memoryless channel with strictly positive transitions.

    Row ``x`` of ``matrix`` is the output distribution W(.|x).
    """

    matrix: np.ndarray

    def __post_init__(self):
        w = np.array(self.matrix, dtype=float)
        if w.ndim != 2:
            raise ChannelError("transition matrix must be 2-D")
        nx, ny = w.shape
        if not (2 <= nx <= MAX_ALPHABET and 2 <= ny <= MAX_ALPHABET):
            raise ChannelError(f"alphabet sizes {w.shape} outside [2, {MAX_ALPHABET}]")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ChannelError("all transition probabilities must be positive")
        if np.any(np.abs(w.sum(axis=1) - 1.0) > SUM_TOL):
            raise ChannelError("rows must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "matrix", w)

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        return cls(np.array([[1 - p, p], [p, 1 - p]]))

    @classmethod
    def from_rows(cls, rows) -> "Channel":
        """Build from rows summing to 1 within ``LOAD_TOL``; rows are renormalized."""
        w = np.asarray(rows, dtype=float)
        if w.ndim != 2:
            raise ChannelError("rows must form a matrix")
        if np.any(w <= 0):
            raise ChannelError("channel entries must be > 0")
        if np.any(np.abs(w.sum(axis=1) - 1.0) > LOAD_TOL):
            raise ChannelError("row sums deviate from 1 by more than 1e-9")
        sums = w.sum(axis=1, keepdims=True)
        off = np.abs(sums - 1.0) > SUM_TOL
        return cls(np.where(off, w / sums, w))

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    @property
    def lam(self) -> float:
        """Smallest transition probability."""
        return float(self.matrix.min())

    def row(self, x: int) -> np.ndarray:
        return self.matrix[x]

    def output_marginal(self, p) -> np.ndarray:
        return _as_probs(p) @ self.matrix

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.matrix, axis=1)
        c[:, -1] = 1.0
        return c

    @cached_property
    def _capacity(self) -> tuple[float, Distribution]:
        return capacity(self)

    @property
    def capacity_nats(self) -> float:
        return self._capacity[0]

    @property
    def capacity_input(self) -> Distribution:
        return self._capacity[1]

    @cached_property
    def _divergence(self) -> tuple[float, int, int]:
        return max_divergence(self)

    @property
    def d_max_nats(self) -> float:
        return self._divergence[0]

    @property
    def accept_letter(self) -> int:
        return self._divergence[1]

    @property
    def reject_letter(self) -> int:
        return self._divergence[2]

    def to_json(self) -> dict:
        return {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "rows": self.matrix.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Channel":
        try:
            rows = obj["rows"]
            nx, ny = int(obj["input_size"]), int(obj["output_size"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ChannelError(f"malformed channel JSON: {exc}") from exc
        w = np.asarray(rows, dtype=float)
        if w.shape != (nx, ny):
            raise ChannelError(f"rows have shape {w.shape}, declared ({nx}, {ny})")
        return cls.from_rows(w)

    def __eq__(self, other) -> bool:
        return isinstance(other, Channel) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())


def load_channel(path) -> Channel:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ChannelError(f"cannot read channel file {path}: {exc}") from exc
    return Channel.from_json(obj)


def mutual_information(p, w: Channel) -> float:
    """I(P;W) in nats."""
    probs = _as_probs(p)
    if probs.shape != (w.input_size,):
        raise ChannelError(f"input distribution has size {probs.size}, channel has {w.input_size}")
    return float(mutual_information_batch(probs[None, :], w.matrix)[0])


def mutual_information_batch(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Row-wise I(P_i; W) for a stack of input distributions ``P`` (k, |X|)."""
    q = P @ W
    # sum_x P(x) D(W_x || q); every W entry is positive so log is finite where q>0
    logratio = np.log(W[None, :, :]) - np.log(q[:, None, :])
    return np.einsum("kx,xy,kxy->k", P, W, logratio)


def capacity(w: Channel, tol: float = 1e-10, max_iter: int = 100_000) -> tuple[float, Distribution]:
    """Blahut-Arimoto iteration stopped on the duality gap.

    For any P, max_x D(W_x || PW) >= C >= I(P;W); iteration stops once
    the two bracket ends are within ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    W = w.matrix
    logW = np.log(W)
    p = np.full(w.input_size, 1.0 / w.input_size)
    lower = 0.0
    for _ in range(max_iter):
        q = p @ W
        d = np.sum(W * (logW - np.log(q)), axis=1)
        lower = float(p @ d)
        upper = float(d.max())
        if upper - lower < tol:
            break
        p = p * np.exp(d - upper)
        p /= p.sum()
    lower = max(lower, 0.0)
    return lower, Distribution(p / p.sum())


def max_divergence(w: Channel) -> tuple[float, int, int]:
    """D = max over ordered pairs of D(W_x || W_x'), with the lexicographically first maximizer."""
    W = w.matrix
    logW = np.log(W)
    # D[x, x'] = sum_y W[x,y] (log W[x,y] - log W[x',y])
    D = np.sum(W * logW, axis=1)[:, None] - W @ logW.T
    np.fill_diagonal(D, -np.inf)
    best = float(D.max())
    xa, xr = np.argwhere(D == best)[0]
    return max(best, 0.0), int(xa), int(xr)


def empirical(seq: Sequence[int], alphabet_size: int | None = None) -> EmpiricalDist:
    s = np.asarray(seq, dtype=np.int64).ravel()
    if s.size == 0:
        raise ChannelError("empirical distribution of an empty sequence")
    if np.any(s < 0):
        raise ChannelError("symbols must be non-negative integers")
    size = alphabet_size if alphabet_size is not None else max(int(s.max()) + 1, 2)
    if s.max() >= size:
        raise ChannelError("symbol outside alphabet")
    return EmpiricalDist(np.bincount(s, minlength=size))
