"""Joint estimation of sampling-frequency and sampling-time offset.

Given a reference sequence x0 and an offset sequence x1 of the same
underlying bandlimited signal, the pair (delta, epsilon) of the per-sample
delay law d(n) = n*delta + epsilon is found by Newton iterations on the
squared-error cost between the Farrow-compensated x1 and x0.

The index n in the delay law is anchored at the subfilter output center
(global input index minus bank latency D), and the cost compares the
compensated output against x0 delayed by D; with that convention the
minimizer equals the generation-model offsets up to O(delta^2).

The index-weighted sums that make up the gradient and Hessian are computed
with cascaded accumulator chains (:mod:`farrowsync.accum`), which is the
low-multiplier formulation this library is built around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .accum import AccumulatorChain
from .errors import (
    DelayRangeError,
    InsufficientSamplesError,
    InvalidOrderError,
    SingularHessianError,
)
from .farrow import FarrowBank, SubfilterOutputs, subfilter_outputs

__all__ = [
    "OffsetParams",
    "EstimatorConfig",
    "EstimateResult",
    "fractional_delay",
    "cost",
    "per_sample_derivatives",
    "assemble_gradient_hessian",
    "newton_step",
    "estimate",
    "complexity_report",
]


@dataclass(frozen=True)
class OffsetParams:
    """Offset pair (delta, epsilon) with optional physical-rate view.

    ``delta`` is the dimensionless sampling-period difference; ``epsilon``
    the sampling-time offset in units of the reference period T.
    """

    delta: float
    epsilon: float
    f0: float | None = None
    delta_f: float | None = None

    @classmethod
    def from_physical(cls, f0: float, delta_f: float, epsilon: float = 0.0):
        """Build from reference rate f0 [Hz] and rate offset delta_f [Hz]."""
        delta = -delta_f / (f0 + delta_f)
        return cls(delta=delta, epsilon=epsilon, f0=f0, delta_f=delta_f)

    @property
    def f1(self) -> float | None:
        return None if self.f0 is None or self.delta_f is None else self.f0 + self.delta_f

    @property
    def T(self) -> float | None:
        return None if self.f0 is None else 1.0 / self.f0

    def to_delta_f(self, f0: float) -> float:
        """Invert delta back to the physical rate offset for a given f0."""
        return -self.delta * f0 / (1.0 + self.delta)


@dataclass
class EstimatorConfig:
    """Knobs of the Newton estimator."""

    n_samples: int = 256
    max_iters: int = 10
    tol: float = 1e-9
    component: str = "real"  # or "imag"; selector for complex inputs
    d_max: float = 0.5
    hessian_det_floor: float = 1e-30


@dataclass
class EstimateResult:
    """Estimated offsets plus convergence diagnostics."""

    delta_hat: float
    epsilon_hat: float
    iterations: int
    final_cost: float
    converged: bool
    step_history: list = field(default_factory=list)


def fractional_delay(n, delta: float, epsilon: float):
    """Per-sample delay law d(n) = n*delta + epsilon."""
    return np.asarray(n) * delta + epsilon


def _aligned_reference(x0: np.ndarray, u: SubfilterOutputs) -> np.ndarray:
    """Slice of x0 aligned with the valid compensated output.

    Output column j sits at global index n = j + valid_start and estimates
    x0(n - D), so the reference runs valid_start-D .. len-1-D.
    """
    start = u.valid_start - u.latency
    ref = x0[start : start + u.n_valid]
    if len(ref) < 2:
        raise InsufficientSamplesError("aligned valid region shorter than 2 samples")
    return ref


def _center_indices(u: SubfilterOutputs) -> np.ndarray:
    """Delay-law indices (global index minus latency) for each valid column."""
    return np.arange(u.n_valid) + (u.valid_start - u.latency)


def _streams(u: np.ndarray, ref: np.ndarray, d: np.ndarray):
    """Residual and first/second d-derivatives of the Farrow output.

    All three inner polynomial sums are evaluated by Horner's rule:
      y   = sum_k d^k u_k
      y'  = sum_{k>=1} k d^{k-1} u_k
      y'' = sum_{k>=2} k(k-1) d^{k-2} u_k
    """
    L = u.shape[0] - 1
    y = np.array(u[-1], copy=True)
    for k in range(L - 1, -1, -1):
        y *= d
        y += u[k]
    if L >= 1:
        y1 = L * u[-1] * np.ones_like(d)
        for k in range(L - 1, 0, -1):
            y1 *= d
            y1 += k * u[k]
    else:
        y1 = np.zeros_like(d)
    if L >= 2:
        y2 = L * (L - 1) * u[-1] * np.ones_like(d)
        for k in range(L - 1, 1, -1):
            y2 *= d
            y2 += k * (k - 1) * u[k]
    else:
        y2 = np.zeros_like(d)
    return y - ref, y1, y2


def cost(x0, u: SubfilterOutputs, delta: float, epsilon: float) -> float:
    """Half-sum of squared residuals over the valid aligned region."""
    x0 = np.asarray(x0)
    ref = _aligned_reference(x0, u)
    d = fractional_delay(_center_indices(u), delta, epsilon)
    r, _, _ = _streams(u.u, ref, d)
    return 0.5 * float(np.dot(r, r))


def per_sample_derivatives(u_col, x0_n: float, d: float):
    """First and second derivative of one sample's half-squared residual.

    dF  = (y - x0_n) * y'
    d2F = y'^2 + (y - x0_n) * y''
    """
    u = np.asarray(u_col, dtype=float).reshape(-1, 1)
    r, y1, y2 = _streams(u, np.array([x0_n]), np.array([float(d)]))
    return float(r[0] * y1[0]), float(y1[0] ** 2 + r[0] * y2[0])


def _shifted_sums(chain_sums, offset: int):
    """Re-index accumulator sums from local j to n = j + offset.

    sum n v   = S1 + offset*S0
    sum n^2 v = S2 + 2*offset*S1 + offset^2*S0
    """
    if len(chain_sums) == 2:
        s0, s1 = chain_sums
        return s0, s1 + offset * s0
    s0, s1, s2 = chain_sums
    return s0, s1 + offset * s0, s2 + 2 * offset * s1 + offset * offset * s0


def assemble_gradient_hessian(x0, u: SubfilterOutputs, delta: float, epsilon: float):
    """Gradient and Hessian of the cost in (delta, epsilon).

    The per-sample derivative streams are pushed through cascaded
    accumulator chains (depth 2 for the gradient, depth 3 for the Hessian);
    the chain outputs are then shifted from local column index to the
    delay-law index.  Both off-diagonal Hessian entries reuse the same sum,
    so H is symmetric by construction.
    """
    x0 = np.asarray(x0)
    ref = _aligned_reference(x0, u)
    nc = _center_indices(u)
    d = fractional_delay(nc, delta, epsilon)
    r, y1, y2 = _streams(u.u, ref, d)
    dF = r * y1
    d2F = y1 * y1 + r * y2

    offset = int(nc[0])
    g_sums = _shifted_sums(AccumulatorChain(2).extend(dF).weighted_sums(), offset)
    h_sums = _shifted_sums(AccumulatorChain(3).extend(d2F).weighted_sums(), offset)

    g = np.array([g_sums[1], g_sums[0]])
    H = np.array([[h_sums[2], h_sums[1]], [h_sums[1], h_sums[0]]])
    return g, H


def newton_step(w, g, H, det_floor: float = 1e-30):
    """One Newton update w - H^{-1} g via closed-form 2x2 inversion."""
    w = np.asarray(w, dtype=float)
    det = H[0][0] * H[1][1] - H[0][1] * H[1][0]
    if abs(det) < det_floor:
        raise SingularHessianError(
            f"|det H| = {abs(det):.3e} below floor {det_floor:.3e}; "
            "signal excitation is insufficient for joint estimation"
        )
    inv_det = 1.0 / det  # the one division per batch
    step0 = (H[1][1] * g[0] - H[0][1] * g[1]) * inv_det
    step1 = (H[0][0] * g[1] - H[1][0] * g[0]) * inv_det
    return np.array([w[0] - step0, w[1] - step1])


def _select_component(x, component: str) -> np.ndarray:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x.imag.copy() if component == "imag" else x.real.copy()
    return x.astype(float)


def estimate(x0, x1, bank: FarrowBank, cfg: EstimatorConfig | None = None) -> EstimateResult:
    """Jointly estimate (delta, epsilon) between x0 and x1.

    Damped Newton from w = [0, 0]: the subfilter outputs are computed once
    (they do not depend on d); each iteration recomputes the delay and
    derivative streams, assembles (g, H) through the accumulator chains and
    takes a Newton step, halving it (up to 8 times) if the cost would
    increase.  Convergence is declared when
    max(|step_delta| * N, |step_eps|) < tol.
    """
    if cfg is None:
        cfg = EstimatorConfig()
    N = cfg.n_samples
    x0 = np.asarray(x0)
    x1 = np.asarray(x1)
    if len(x0) < N or len(x1) < N:
        raise InsufficientSamplesError(
            f"need at least n_samples={N} samples, got {len(x0)} and {len(x1)}"
        )
    r0 = _select_component(x0[:N], cfg.component)
    r1 = _select_component(x1[:N], cfg.component)

    u = subfilter_outputs(bank, r1)
    nc = _center_indices(u)

    w = np.zeros(2)
    history: list[tuple[float, float]] = []
    F = cost(r0, u, w[0], w[1])
    converged = False
    iters = 0
    for _ in range(cfg.max_iters):
        d = fractional_delay(nc, w[0], w[1])
        bad = np.flatnonzero(np.abs(d) > cfg.d_max)
        if bad.size:
            n_bad = int(nc[bad[0]] + bank.latency)
            raise DelayRangeError(
                f"|d(n)| exceeds d_max = {cfg.d_max} at global index {n_bad} "
                f"for iterate (delta={w[0]:.3e}, eps={w[1]:.3e})",
                index=n_bad,
            )
        g, H = assemble_gradient_hessian(r0, u, w[0], w[1])
        w_new = newton_step(w, g, H, cfg.hessian_det_floor)
        step = w - w_new
        # step-halving safeguard: raw Newton is not globally descent
        F_new = cost(r0, u, w_new[0], w_new[1])
        scale = 1.0
        for _ in range(8):
            if F_new <= F:
                break
            scale *= 0.5
            w_new = w - scale * step
            F_new = cost(r0, u, w_new[0], w_new[1])
        w, F = w_new, F_new
        iters += 1
        history.append((float(w[0]), float(w[1])))
        if max(abs(scale * step[0]) * N, abs(scale * step[1])) < cfg.tol:
            converged = True
            break
    return EstimateResult(
        delta_hat=float(w[0]),
        epsilon_hat=float(w[1]),
        iterations=iters,
        final_cost=float(F),
        converged=converged,
        step_history=history,
    )


def complexity_report(L: int, N: int) -> dict:
    """Closed-form operation counts of one estimation batch.

    Counts cover the derivative streams, accumulator cascades and the 2x2
    Newton update; the subfilter outputs themselves are excluded since the
    compensator computes them anyway.
    """
    if L < 2 or N < 1:
        raise InvalidOrderError(f"need L >= 2 and N >= 1, got L={L}, N={N}")
    return {
        "general_mults": (L + 2) * N + 8,
        "constant_mults": (2 * L - 3) * N + 5,
        "additions": (2 * L + 6) * N + 3,
        "divisions": 1,
    }
