"""Counter-based uniforms keyed by (seed, trial, step).

Every draw is a pure function of its key, so a trial produces the same
channel noise no matter which worker runs it or in what order.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))

# stream offset reserved for message selection, far above any channel-use index
MESSAGE_STEP = 1 << 62


def splitmix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def uniforms(seed: int, trials, steps) -> np.ndarray:
    """Uniform(0,1) array of shape (len(trials), len(steps))."""
    with np.errstate(over="ignore"):
        key = splitmix64(np.uint64(seed % (1 << 64)))
        t = splitmix64(key ^ splitmix64(np.asarray(trials, dtype=np.uint64)))
        s = np.asarray(steps, dtype=np.uint64) * _GOLDEN
        bits = splitmix64(t[:, None] ^ s[None, :])
    return (bits >> _S11).astype(np.float64) * (1.0 / (1 << 53))
