"""Truncated-SVD target channel, water-filling and the ideal capacity benchmark."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEGLIGIBLE_GAIN = 1e-30
BISECTION_ITERS = 200


@dataclass(frozen=True)
class SvdTarget:
    singular_values: np.ndarray
    F_S: np.ndarray
    E_S: np.ndarray

    @property
    def S(self) -> int:
        return self.F_S.shape[1]

    @property
    def Lambda_S(self) -> np.ndarray:
        return np.diag(self.singular_values[: self.S]).astype(complex)

    @property
    def lambda_sq(self) -> np.ndarray:
        return self.singular_values[: self.S] ** 2


def truncated_svd_target(G: np.ndarray, S: int) -> SvdTarget:
    """Leading ``S`` singular triplets of ``G = E diag(lambda) F^H``.

    Each singular-vector pair is rotated so that the largest-magnitude entry
    of the right vector is real and positive.
    """
    G = np.asarray(G)
    if not 1 <= S <= min(G.shape):
        raise ValueError(f"S={S} must lie in 1..min(M, N)={min(G.shape)}")
    E, sv, Fh = np.linalg.svd(G)
    F = Fh.conj().T[:, :S]
    E = E[:, :S]
    pivot = F[np.argmax(np.abs(F), axis=0), np.arange(S)]
    rot = np.conj(pivot) / np.abs(pivot)
    return SvdTarget(singular_values=sv, F_S=F * rot, E_S=E * rot)


@dataclass(frozen=True)
class PowerAllocation:
    p: np.ndarray
    tau: float


def _allocate(tau, floors):
    return np.maximum(0.0, tau - floors)


def water_filling(lambda_sq, P_t: float, sigma2: float) -> PowerAllocation:
    """Capacity-optimal ``p_s = max(0, tau - sigma2 / lambda_s^2)`` with sum ``P_t``.

    The water level is bracketed by ``[sigma2/max(lambda^2), P_t +
    sigma2/min(lambda^2)]`` and found by bisection. Streams with a gain
    below 1e-30 receive no power.
    """
    lambda_sq = np.asarray(lambda_sq, dtype=float)
    if P_t <= 0 or sigma2 <= 0:
        raise ValueError("P_t and sigma2 must be positive")
    usable = lambda_sq >= NEGLIGIBLE_GAIN
    if not usable.any():
        return PowerAllocation(np.zeros_like(lambda_sq), 0.0)
    floors = np.full(lambda_sq.shape, np.inf)
    floors[usable] = sigma2 / lambda_sq[usable]

    lo = floors[usable].min()
    hi = P_t + floors[usable].max()
    tol = 1e-9 * P_t
    tau = hi
    for _ in range(BISECTION_ITERS):
        tau = 0.5 * (lo + hi)
        excess = _allocate(tau, floors).sum() - P_t
        if abs(excess) <= 0.1 * tol:
            break
        if excess > 0:
            hi = tau
        else:
            lo = tau
    # exact level on the active set found by bisection, written as floor
    # differences so that p stays accurate when floors dwarf P_t
    active = floors < tau
    if not active.any():
        active = floors == floors[usable].min()
    for _ in range(2 * lambda_sq.size):
        k = int(active.sum())
        mean_floor = floors[active].mean()
        level = P_t / k + mean_floor
        settled = floors < level
        if not settled.any() or np.array_equal(settled, active):
            break
        active = settled
    p = np.zeros_like(lambda_sq)
    p[active] = np.maximum(0.0, P_t / k + (mean_floor - floors[active]))
    return PowerAllocation(p, float(level))


def ideal_capacity(lambda_sq, allocation, sigma2: float) -> float:
    """``sum_s log2(1 + p_s lambda_s^2 / sigma2)`` in bits/s/Hz."""
    p = allocation.p if isinstance(allocation, PowerAllocation) else np.asarray(allocation, dtype=float)
    return float(np.sum(np.log2(1 + p * np.asarray(lambda_sq, dtype=float) / sigma2)))
