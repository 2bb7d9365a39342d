"""Fitting error, capacities, analytical bounds and Monte-Carlo BER."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple

import numpy as np

from .propagation import PhaseState, PropagationOperators, end_to_end
from .target import PowerAllocation

LOG2_E = math.log2(math.e)


def dbm_to_watts(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


@dataclass(frozen=True)
class LinkBudget:
    """Total transmit power and receiver noise power, both in watts."""

    P_t: float
    sigma2: float

    def __post_init__(self):
        if not self.P_t > 0 or not self.sigma2 > 0:
            raise ValueError("P_t and sigma2 must be positive")

    @classmethod
    def from_dbm(cls, tx_power_dbm: float = 20.0, noise_power_dbm: float = -110.0):
        return cls(dbm_to_watts(tx_power_dbm), dbm_to_watts(noise_power_dbm))


def _power(allocation) -> np.ndarray:
    if isinstance(allocation, PowerAllocation):
        return allocation.p
    return np.asarray(allocation, dtype=float)


def nmse(H: np.ndarray, alpha: complex, Lambda_S: np.ndarray) -> float:
    """``||alpha H - Lambda_S||_F^2 / ||Lambda_S||_F^2`` for one realization."""
    ref = float(np.vdot(Lambda_S, Lambda_S).real)
    if ref == 0:
        raise ValueError("NMSE undefined for an all-zero target")
    R = alpha * np.asarray(H) - Lambda_S
    return float(np.vdot(R, R).real) / ref


def sim_capacity(H: np.ndarray, alpha: complex, allocation, sigma2: float) -> float:
    """Sum rate of the fitted channel with inter-stream leakage treated as noise."""
    p = _power(allocation)
    gains = np.abs(alpha * np.asarray(H)) ** 2
    received = gains * p[None, :]
    signal = np.diag(received)
    interference = received.sum(axis=1) - signal
    return float(np.sum(np.log2(1 + signal / (interference + sigma2))))


@dataclass(frozen=True)
class CapacityBounds:
    lower: float
    upper: float
    e_lambda1_sq: float
    e_lambdaS_sq: float


def capacity_bounds(eigenvalue_samples: Iterable[Tuple[float, float]], S: int, budget: LinkBudget) -> CapacityBounds:
    """Bounds on the ergodic capacity from the sample means of the first and
    ``S``-th squared singular values, with power split equally over ``S``
    streams."""
    samples = np.asarray(list(eigenvalue_samples), dtype=float)
    if samples.size == 0:
        raise ValueError("capacity bounds need at least one eigenvalue sample")
    e1, eS = samples.reshape(-1, 2).mean(axis=0)
    snr = budget.P_t / (S * budget.sigma2)
    return CapacityBounds(
        lower=S * math.log2(1 + snr * eS),
        upper=S * math.log2(1 + snr * e1),
        e_lambda1_sq=float(e1),
        e_lambdaS_sq=float(eS),
    )


def many_stream_limit(e_lambda_sq: float, budget: LinkBudget) -> float:
    """Large-``S`` saturation value ``P_t log2(e) E(lambda^2) / sigma2``."""
    return budget.P_t * LOG2_E * e_lambda_sq / budget.sigma2


class CoherentGainEstimate(NamedTuple):
    estimate: float
    stderr: float
    quadratic_closed_form: float
    exact_closed_form: float


def _coherent_gain_samples(M: int, N: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Samples of ``(sum_m |h1_m|)^2 (sum_n |h2_n|)^2`` with unit CN entries."""

    def coherent_sum(n):
        h = (rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))) / math.sqrt(2)
        return np.abs(h).sum(axis=1) ** 2

    return coherent_sum(M) * coherent_sum(N)


def coherent_gain_oracle(M: int, N: int, rho2: float, trials: int, rng: np.random.Generator) -> CoherentGainEstimate:
    """Monte-Carlo estimate of the single-stream gain ``E|h|^2`` under
    co-phased (optimal) phase shifts over an i.i.d. Rayleigh keyhole link.

    Also reports two closed forms: ``pi^2 rho2 M^2 N^2 / 4`` and the exact
    Rayleigh moment ``rho2 (M + M(M-1)pi/4)(N + N(N-1)pi/4)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = rho2 * _coherent_gain_samples(M, N, trials, rng)
    stderr = float(g.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")

    def exact(n):
        return n + n * (n - 1) * math.pi / 4

    return CoherentGainEstimate(
        estimate=float(g.mean()),
        stderr=stderr,
        quadratic_closed_form=math.pi**2 * rho2 * M**2 * N**2 / 4,
        exact_closed_form=rho2 * exact(M) * exact(N),
    )


def coherent_gain_capacity(M: int, N: int, rho2: float, budget: LinkBudget, trials: int, rng: np.random.Generator) -> float:
    """Mean single-stream capacity ``E log2(1 + P_t |h|^2 / sigma2)`` of the
    co-phased keyhole link used by the meta-atom scaling law."""
    g = rho2 * _coherent_gain_samples(M, N, trials, rng)
    return float(np.mean(np.log2(1 + budget.P_t * g / budget.sigma2)))


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2))


@dataclass(frozen=True)
class BerResult:
    per_stream: np.ndarray
    aggregate: float
    errors: np.ndarray
    bits_per_stream: int


def ber_bpsk_effective(
    H_eff: np.ndarray,
    allocation,
    sigma2: float,
    bits_per_stream: int,
    rng: np.random.Generator,
    chunk: int = 1 << 17,
) -> BerResult:
    """BPSK over an effective S x S channel with per-stream sign detection.

    Stream ``s`` sends ``sqrt(p_s) b_s``; the receiver sees ``H_eff x + n``
    with ``n ~ CN(0, sigma2 I)`` and decides ``sign(Re(y_s / H_eff[s, s]))``.
    Other streams' leakage is not cancelled.
    """
    H_eff = np.atleast_2d(np.asarray(H_eff, dtype=complex))
    S = H_eff.shape[0]
    amp = np.sqrt(_power(allocation))
    diag = np.diag(H_eff)
    errors = np.zeros(S, dtype=np.int64)
    noise_std = math.sqrt(sigma2 / 2)
    done = 0
    while done < bits_per_stream:
        n = min(chunk, bits_per_stream - done)
        bits = rng.integers(0, 2, size=(S, n))
        symbols = 1.0 - 2.0 * bits
        y = H_eff @ (amp[:, None] * symbols)
        y = y + noise_std * (rng.standard_normal((S, n)) + 1j * rng.standard_normal((S, n)))
        decided = np.real(y / diag[:, None]) < 0
        errors += np.count_nonzero(decided != bits.astype(bool), axis=1)
        done += n
    per_stream = errors / bits_per_stream
    return BerResult(per_stream, float(errors.sum() / (S * bits_per_stream)), errors, bits_per_stream)


def ber_bpsk(
    phases: PhaseState,
    ops: PropagationOperators,
    G: np.ndarray,
    allocation,
    sigma2: float,
    bits_per_stream: int,
    rng: np.random.Generator,
    H: Optional[np.ndarray] = None,
) -> BerResult:
    """Monte-Carlo BPSK BER of the SIM link configured by ``phases``."""
    if H is None:
        H = end_to_end(ops, phases, G)
    return ber_bpsk_effective(phases.alpha * H, allocation, sigma2, bits_per_stream, rng)
