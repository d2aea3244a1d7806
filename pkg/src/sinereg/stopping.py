"""Discrepancy-principle stopping rule and the run report shared by solvers."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StoppingRule", "discrepancy_met", "RunReport", "DEFAULT_MAX_ITERS"]

DEFAULT_MAX_ITERS = 10000


@dataclass(frozen=True)
class StoppingRule:
    """Stop at the first iterate whose residual norm drops to tau * delta.

    Parameters
    ----------
    tau : float
        Multiplier, strictly greater than 1.
    delta : float
        Noise level, >= 0.
    max_iters : int, optional
        Hard iteration cap. ``None`` resolves to
        ``min(domain_dim, 10000)`` at run time.
    """

    tau: float
    delta: float
    max_iters: int | None = None

    def __post_init__(self):
        if not self.tau > 1.0:
            raise ValueError(f"tau must be strictly greater than 1, got {self.tau}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")

    @property
    def threshold(self):
        return self.tau * self.delta

    def resolve_cap(self, domain_dim):
        if self.max_iters is not None:
            return self.max_iters
        return min(domain_dim, DEFAULT_MAX_ITERS)


def discrepancy_met(residual_norm, rule):
    """True iff residual_norm <= tau * delta."""
    if residual_norm < 0:
        raise ValueError(f"residual norm must be nonnegative, got {residual_norm}")
    return residual_norm <= rule.threshold


@dataclass
class RunReport:
    """Outcome of a regularized solve.

    ``residual_history[m]`` is the residual norm of the m-th iterate, so
    ``residual_history[stopping_index]`` is the final one.
    ``terminated_by`` is "discrepancy", "breakdown", or "iteration_cap";
    ``breakdown_step`` holds the step at which the search direction
    vanished, when that happened.
    """

    solver: str
    stopping_index: int
    iterate: np.ndarray
    residual_history: list[float]
    terminated_by: str
    error_history: list[float] | None = None
    breakdown_step: int | None = None
    elapsed_seconds: float = 0.0
    gamma: float | None = None
    alphas: list[float] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)
    # solver state snapshot (set when the run kept vector history); never
    # serialized, used by the diagnostics pass
    state: object | None = field(default=None, repr=False, compare=False)

    @property
    def final_residual(self):
        return self.residual_history[self.stopping_index]

    def to_dict(self):
        """Plain-python dict, safe for ``json.dumps``."""
        return {
            "solver": self.solver,
            "stopping_index": int(self.stopping_index),
            "iterate": [float(v) for v in self.iterate],
            "residual_history": [float(v) for v in self.residual_history],
            "error_history": None
            if self.error_history is None
            else [float(v) for v in self.error_history],
            "terminated_by": self.terminated_by,
            "breakdown_step": None
            if self.breakdown_step is None
            else int(self.breakdown_step),
            "elapsed_seconds": float(self.elapsed_seconds),
            "gamma": None if self.gamma is None else float(self.gamma),
            "alphas": [float(v) for v in self.alphas],
            "betas": [float(v) for v in self.betas],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            solver=d["solver"],
            stopping_index=d["stopping_index"],
            iterate=np.asarray(d["iterate"], dtype=float),
            residual_history=list(d["residual_history"]),
            terminated_by=d["terminated_by"],
            error_history=None
            if d.get("error_history") is None
            else list(d["error_history"]),
            breakdown_step=d.get("breakdown_step"),
            elapsed_seconds=d.get("elapsed_seconds", 0.0),
            gamma=d.get("gamma"),
            alphas=list(d.get("alphas", [])),
            betas=list(d.get("betas", [])),
        )
