"""Seeded generators for the synthetic autoregressive processes and the
cyclic random-walk chain used throughout the tests and the evaluation
protocol.

All randomness comes from a counter-based 64-bit generator so that a given
seed produces bit-identical output on every platform.  The scheme,
documented here exactly:

* stream value at counter i (0-based) for seed s is
  ``mix64((s + (i + 1) * 0x9E3779B97F4A7C15) mod 2^64)`` where ``mix64`` is
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2^64);
* a uniform in [0, 1) is the top 53 bits: ``(z >> 11) / 2^53``;
* standard normals come from Box-Muller pairs: uniforms at counters
  (2j, 2j+1) give ``r = sqrt(-2 ln(1 - u1))`` and the pair
  ``(r cos(2 pi u2), r sin(2 pi u2))``;
* decisions that are not innovations (regime switches, chain steps, start
  states) read a second stream whose seed is
  ``mix64((s + 0x632BE59BD9B4E019) mod 2^64)``, leaving the innovation
  stream untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import TimeSeries

_GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB
_AUX_SALT = 0x632BE59BD9B4E019
_U64 = np.uint64
_INV_2_53 = 1.0 / float(1 << 53)

_DATASETS = ("ads1", "ads2", "ads3", "ads4", "markov")

_REGIME_STAY_BASE = 0.99995
_REGIME_COEFFS = {1: -0.5, 2: 0.9}


def _mix64(z):
    """The output mix of the splitmix-style generator (mod 2^64)."""
    z = np.asarray(z, dtype=_U64)
    with np.errstate(over="ignore"):  # wraparound is the modular arithmetic
        z = z ^ (z >> _U64(30))
        z = z * _U64(_MIX_1)
        z = z ^ (z >> _U64(27))
        z = z * _U64(_MIX_2)
        z = z ^ (z >> _U64(31))
    return z


def _uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Stream values [start, start + count) as uniforms in [0, 1)."""
    idx = np.arange(start + 1, start + count + 1, dtype=_U64)
    state = _U64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _U64(_GOLDEN)
    return (_mix64(state) >> _U64(11)).astype(np.float64) * _INV_2_53


def _normals(seed: int, count: int) -> np.ndarray:
    """`count` standard normals from Box-Muller on consecutive uniform pairs."""
    pairs = (count + 1) // 2
    u = _uniforms(seed, 0, 2 * pairs)
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * math.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(angle)
    z[1::2] = r * np.sin(angle)
    return z[:count]


def _aux_seed(seed: int) -> int:
    return int(_mix64(_U64((seed + _AUX_SALT) & 0xFFFFFFFFFFFFFFFF)))


@dataclass(frozen=True)
class GeneratorSpec:
    """Which process to sample, its length, the seed, and the innovation
    scale.  ``markov_states``/``markov_p`` only matter for the chain."""

    which: str
    T: int
    seed: int
    sigma: float = 0.05
    markov_states: int = 10
    markov_p: float = 0.7

    def __post_init__(self):
        if self.which not in _DATASETS:
            raise ValueError(f"unknown dataset {self.which!r}; choose from {_DATASETS}")
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.markov_states < 2:
            raise ValueError("markov_states must be >= 2")
        if not 0.0 <= self.markov_p <= 1.0:
            raise ValueError("markov_p must lie in [0, 1]")


class GenerationResult(NamedTuple):
    """Series plus the generating coefficients alpha_1..alpha_T (empty for
    the chain) and, when the process has one, the hidden state path."""

    series: TimeSeries
    coefficients: np.ndarray
    states: Optional[np.ndarray]


def _coefficients(spec: GeneratorSpec):
    """(alpha_t for t = 1..T, state path or None) for the AR processes."""
    t = np.arange(1, spec.T + 1)
    if spec.which == "ads1":
        return np.where((t >= 1000) & (t <= 2000), -0.9, 0.9), None
    if spec.which == "ads2":
        return 1.0 - t / 1500.0, None
    if spec.which == "ads4":
        return np.full(spec.T, -0.5), None
    # ads3: two-state regime process, switch probability grows with the run
    # length tau as 1 - 0.99995^tau; starts in state 1 with tau = 1
    states = np.empty(spec.T, dtype=np.int64)
    states[0] = 1
    draws = _uniforms(_aux_seed(spec.seed), 0, spec.T - 1)
    state, tau = 1, 1
    for i in range(1, spec.T):
        if draws[i - 1] < _REGIME_STAY_BASE**tau:
            tau += 1
        else:
            state = 3 - state
            tau = 1
        states[i] = state
    alpha = np.where(states == 1, _REGIME_COEFFS[1], _REGIME_COEFFS[2])
    return alpha, states


def generate(spec: GeneratorSpec) -> GenerationResult:
    """Sample the process: Y_0 = 0 and Y_t = alpha_t Y_{t-1} + eps_t with
    eps_t ~ N(0, sigma^2) for the AR datasets; the chain path (as floats)
    for ``markov``.  Identical specs give identical output."""
    if spec.which == "markov":
        path = generate_markov(spec.markov_states, spec.markov_p, spec.T, spec.seed)
        series = TimeSeries(values=path.astype(float))
        return GenerationResult(series=series, coefficients=np.empty(0), states=path)
    alpha, states = _coefficients(spec)
    eps = spec.sigma * _normals(spec.seed, spec.T)
    values = np.empty(spec.T)
    prev = 0.0
    for i in range(spec.T):
        prev = alpha[i] * prev + eps[i]
        values[i] = prev
    return GenerationResult(
        series=TimeSeries(values=values), coefficients=alpha, states=states
    )


def generate_markov(N: int, p: float, T: int, seed: int) -> np.ndarray:
    """Path of T states in {0..N-1}: start uniform, then step to
    (i - 1) mod N with probability p and to (i + 1) mod N otherwise."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if T < 1:
        raise ValueError("T must be >= 1")
    u = _uniforms(_aux_seed(seed), 0, T)
    path = np.empty(T, dtype=np.int64)
    path[0] = min(int(u[0] * N), N - 1)
    for i in range(1, T):
        step = -1 if u[i] < p else 1
        path[i] = (path[i - 1] + step) % N
    return path
