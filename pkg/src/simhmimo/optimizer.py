"""Gradient-descent fitting of the SIM phase shifts.

The fitted quantity is ``alpha * Q G P`` and the target is the diagonal matrix
of the ``S`` leading singular values of ``G``. Each iteration takes a
gradient step on every phase (normalized per layer so that the largest step
is ``eta * pi``), refreshes ``alpha`` by least squares and shrinks ``eta``
geometrically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .propagation import PhaseState, PropagationOperators

MULTISTART_FULL = "full"
MULTISTART_BEST_INIT = "best_init"


@dataclass(frozen=True)
class FitHyperparams:
    """Optimizer settings.

    ``stop_delta`` is an absolute threshold on the change of the loss between
    consecutive iterations; ``None`` means ``1e-6 * ||Lambda_S||_F^2``.
    ``multistart="full"`` runs the descent from every random start and keeps
    the best; ``"best_init"`` only descends from the start with the lowest
    initial loss.
    """

    eta0: float = 0.1
    beta: float = 0.5
    max_iters: int = 100
    n_starts: int = 10
    stop_delta: Optional[float] = None
    multistart: str = MULTISTART_FULL

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.max_iters < 1 or self.n_starts < 1:
            raise ValueError("max_iters and n_starts must be at least 1")
        if self.stop_delta is not None and self.stop_delta < 0:
            raise ValueError("stop_delta must be nonnegative")
        if self.multistart not in (MULTISTART_FULL, MULTISTART_BEST_INIT):
            raise ValueError(f"unknown multistart strategy {self.multistart!r}")


@dataclass
class FitResult:
    phases: PhaseState
    loss_trace: List[float]
    final_nmse: float
    iterations: int
    start_index: int
    loss: float
    degenerate: bool = False
    start_losses: List[float] = field(default_factory=list)
    raw_loss_trace: List[float] = field(default_factory=list)


class _Forward:
    """Partial products of one forward pass.

    ``tx_in[l]`` is the M x S field arriving at TX layer l (before its phase
    screen) and ``rx_in[k]`` the S x N row-chain arriving at RX layer k from
    the antenna side, so that ``P = phi[L-1] * tx_in[L-1]`` and
    ``Q = rx_in[K-1] * psi[K-1]``.
    """

    def __init__(self, ops: PropagationOperators, phases: PhaseState, G: np.ndarray):
        self.phi = phases.phi
        self.psi = phases.psi
        x = ops.W[0]
        tx_in = [x]
        for l in range(1, ops.L):
            x = ops.W[l] @ (self.phi[l - 1][:, None] * x)
            tx_in.append(x)
        y = ops.U[0]
        rx_in = [y]
        for k in range(1, ops.K):
            y = (y * self.psi[k - 1][None, :]) @ ops.U[k]
            rx_in.append(y)
        self.tx_in = tx_in
        self.rx_in = rx_in
        self.P = self.phi[-1][:, None] * tx_in[-1]
        self.Q = rx_in[-1] * self.psi[-1][None, :]
        self.GP = G @ self.P
        self.H = self.Q @ self.GP
        self.G = G


def loss(phases: PhaseState, ops: PropagationOperators, G: np.ndarray, Lambda_S: np.ndarray) -> float:
    H = _Forward(ops, phases, G).H
    return _loss_from_H(H, phases.alpha, Lambda_S)


def _loss_from_H(H, alpha, Lambda_S) -> float:
    R = alpha * H - Lambda_S
    return float(np.vdot(R, R).real)


def _gradient(ops: PropagationOperators, fwd: _Forward, alpha: complex, Lambda_S: np.ndarray):
    R = alpha * fwd.H - Lambda_S
    dtheta = np.empty((ops.L, ops.M))
    # left factor: H = left @ diag(phi[l]) @ tx_in[l]
    left = fwd.Q @ fwd.G
    for l in range(ops.L - 1, -1, -1):
        B = fwd.tx_in[l]
        inner = np.sum(left.conj() * (R @ B.conj().T), axis=0)
        dtheta[l] = 2 * np.imag(np.conj(alpha * fwd.phi[l]) * inner)
        if l > 0:
            left = (left * fwd.phi[l][None, :]) @ ops.W[l]
    dxi = np.empty((ops.K, ops.N))
    # right factor: H = rx_in[k] @ diag(psi[k]) @ right
    right = fwd.GP
    for k in range(ops.K - 1, -1, -1):
        C = fwd.rx_in[k]
        inner = np.sum(C.conj() * (R @ right.conj().T), axis=0)
        dxi[k] = 2 * np.imag(np.conj(alpha * fwd.psi[k]) * inner)
        if k > 0:
            right = ops.U[k] @ (fwd.psi[k][:, None] * right)
    return dtheta, dxi


def gradient(phases: PhaseState, ops: PropagationOperators, G: np.ndarray, Lambda_S: np.ndarray):
    """Partial derivatives of the loss w.r.t. every phase, holding alpha fixed.

    Returns ``(dtheta, dxi)`` shaped like ``phases.theta`` and ``phases.xi``.
    """
    return _gradient(ops, _Forward(ops, phases, G), phases.alpha, Lambda_S)


def normalize_gradient(dtheta: np.ndarray, dxi: np.ndarray):
    """Rescale each layer so its largest absolute derivative equals pi.

    An all-zero layer is left untouched.
    """

    def per_layer(d):
        peak = np.max(np.abs(d), axis=1, keepdims=True)
        scale = np.divide(np.pi, peak, out=np.ones_like(peak), where=peak > 0)
        return d * scale

    return per_layer(np.asarray(dtheta, dtype=float)), per_layer(np.asarray(dxi, dtype=float))


def step(phases: PhaseState, dtheta: np.ndarray, dxi: np.ndarray, eta: float) -> PhaseState:
    return PhaseState(phases.theta - eta * dtheta, phases.xi - eta * dxi, phases.alpha)


def update_alpha(H: np.ndarray, Lambda_S: np.ndarray) -> complex:
    """Least-squares scaling ``(h^H h)^{-1} h^H lambda`` over vectorized matrices.

    Returns 0 for an identically zero ``H``.
    """
    h = np.ravel(H)
    energy = np.vdot(h, h).real
    if energy == 0:
        return 0j
    return complex(np.vdot(h, np.ravel(Lambda_S)) / energy)


def decay_lr(eta: float, beta: float) -> float:
    return eta * beta


def _descend(ops, G, Lambda_S, phases: PhaseState, hyper: FitHyperparams, stop_delta: float):
    fwd = _Forward(ops, phases, G)
    phases.alpha = update_alpha(fwd.H, Lambda_S)
    current = _loss_from_H(fwd.H, phases.alpha, Lambda_S)
    trace = [current]
    best_loss, best = current, phases.copy()
    degenerate = phases.alpha == 0
    eta = hyper.eta0
    iterations = 0
    for _ in range(hyper.max_iters):
        dtheta, dxi = normalize_gradient(*_gradient(ops, fwd, phases.alpha, Lambda_S))
        phases = step(phases, dtheta, dxi, eta)
        fwd = _Forward(ops, phases, G)
        phases.alpha = update_alpha(fwd.H, Lambda_S)
        degenerate = degenerate or phases.alpha == 0
        eta = decay_lr(eta, hyper.beta)
        previous, current = current, _loss_from_H(fwd.H, phases.alpha, Lambda_S)
        trace.append(current)
        iterations += 1
        if current < best_loss:
            best_loss, best = current, phases.copy()
        if abs(previous - current) < stop_delta:
            break
    return best, best_loss, trace, iterations, degenerate


def fit(
    ops: PropagationOperators,
    G: np.ndarray,
    Lambda_S: np.ndarray,
    hyper: Optional[FitHyperparams] = None,
    rng: Optional[np.random.Generator] = None,
) -> FitResult:
    """Multi-start gradient descent on the channel-fitting loss.

    Every start draws phases uniformly on [0, 2*pi). The returned phases are
    the best iterate seen across all descents. For the winning start,
    ``loss_trace`` holds the best loss seen up to each iteration (index 0 is
    the initial loss, the last entry equals ``loss``) and ``raw_loss_trace``
    the loss of each iterate itself.
    """
    hyper = hyper or FitHyperparams()
    rng = rng if rng is not None else np.random.default_rng()
    Lambda_S = np.asarray(Lambda_S, dtype=complex)
    target_energy = float(np.vdot(Lambda_S, Lambda_S).real)
    if target_energy == 0:
        raise ValueError("target matrix is identically zero")
    stop_delta = 1e-6 * target_energy if hyper.stop_delta is None else hyper.stop_delta

    starts = [PhaseState.random(ops, rng) for _ in range(hyper.n_starts)]
    if hyper.multistart == MULTISTART_BEST_INIT:
        initial = []
        for ph in starts:
            H = _Forward(ops, ph, G).H
            initial.append(_loss_from_H(H, update_alpha(H, Lambda_S), Lambda_S))
        chosen = int(np.argmin(initial))
        candidates = [(chosen, starts[chosen])]
    else:
        candidates = list(enumerate(starts))

    result = None
    start_losses = []
    for index, phases in candidates:
        best, best_loss, trace, iterations, degenerate = _descend(ops, G, Lambda_S, phases, hyper, stop_delta)
        start_losses.append(best_loss)
        if result is None or best_loss < result.loss:
            result = FitResult(
                phases=best,
                loss_trace=np.minimum.accumulate(trace).tolist(),
                final_nmse=best_loss / target_energy,
                iterations=iterations,
                start_index=index,
                loss=best_loss,
                degenerate=bool(degenerate),
                raw_loss_trace=trace,
            )
    result.start_losses = start_losses
    return result

