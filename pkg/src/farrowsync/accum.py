"""Cascaded accumulators for index-weighted sums.

The gradient and Hessian of the timing cost need the plain sum of a
derivative stream v_n together with its time-index-weighted (sum n*v_n) and
time-index-squared-weighted (sum n^2*v_n) versions.  Running the stream
through two or three cascaded accumulators and combining the final stage
outputs with constant weights produces all of them without any per-sample
index multiplication:

    A1 = sum v_n
    A2 = sum (N - n) v_n
    A3 = sum (N - n)(N - n + 1)/2 v_n

    sum n   v_n = N*A1 - A2
    sum n^2 v_n = N^2*A1 - (2N + 1)*A2 + 2*A3

Stage i updates after stage i-1 within the same push, so stage 2 sees the
just-updated stage 1; the opposite ordering yields sum (N-1-n)v_n instead.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyChainError

__all__ = ["AccumulatorChain", "brute_force_sums"]


class AccumulatorChain:
    """Cascade of 2 or 3 accumulators over a pushed sample stream."""

    def __init__(self, depth: int = 3):
        if depth not in (2, 3):
            raise ValueError(f"depth must be 2 or 3, got {depth}")
        self.depth = depth
        # extended-precision state: the S2 recombination cancels ~N^3-sized
        # intermediates down to an N^2-sized result, which costs more than
        # float64 leaves for a 1e-12 per-component guarantee at N = 512
        self.state = np.zeros(depth, dtype=np.longdouble)
        self.count = 0

    def reset(self) -> None:
        self.state[:] = 0.0
        self.count = 0

    def push(self, v: float) -> "AccumulatorChain":
        """Feed one sample through the cascade."""
        self.state[0] += v
        for i in range(1, self.depth):
            self.state[i] += self.state[i - 1]
        self.count += 1
        return self

    def extend(self, values) -> "AccumulatorChain":
        """Feed a whole array through the cascade (vectorized).

        Equivalent to pushing every element in order: the running output of
        each stage is its cumulative sum, so the final states are nested
        cumulative sums of the input.
        """
        v = np.asarray(values, dtype=np.longdouble)
        if v.size == 0:
            return self
        s_prev = self.state[0] + np.cumsum(v)  # stage-1 running output incl. prior state
        self.state[0] = s_prev[-1]
        for i in range(1, self.depth):
            s_prev = self.state[i] + np.cumsum(s_prev)
            self.state[i] = s_prev[-1]
        self.count += v.size
        return self

    def weighted_sums(self):
        """Return (S0, S1[, S2]) = (sum v, sum n*v [, sum n^2*v]).

        Combines the accumulator outputs with the constant weights N,
        N^2, 2N+1 and 2; n runs 0..N-1 over the pushed samples.
        """
        if self.count == 0:
            raise EmptyChainError("no samples pushed")
        N = self.count
        a1 = self.state[0]
        a2 = self.state[1]
        s0 = a1
        s1 = N * a1 - a2
        if self.depth == 2:
            return float(s0), float(s1)
        a3 = self.state[2]
        s2 = N * N * a1 - (2 * N + 1) * a2 + 2 * a3
        return float(s0), float(s1), float(s2)


def brute_force_sums(v):
    """Direct (S0, S1, S2) oracle: sum v_n, sum n*v_n, sum n^2*v_n."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0, 0.0, 0.0
    n = np.arange(v.size)
    return float(v.sum()), float((n * v).sum()), float((n * n * v).sum())
