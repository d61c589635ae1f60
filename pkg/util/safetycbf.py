"""
Trust-adaptive discrete-time control barrier functions.

The barrier for ego vs pedestrian j is h = ||x_e - x_j||^2 - R^2; the safe
set is every h >= 0. Each step the barrier may decay by at most a fraction
gamma_j, with gamma_j growing with trust in pedestrian j.
"""
from dataclasses import dataclass
import math
from typing import List

from enforce_typing import enforce_types
import numpy as np

from util import constants
from util.errors import DomainError, ParameterError


@enforce_types
@dataclass(frozen=True)
class CbfParams:
    R: float = constants.R
    gamma_ini: float = constants.GAMMA_INI
    delta: float = constants.DELTA
    lambda_: float = constants.LAMBDA

    def __post_init__(self):
        for name in ("R", "gamma_ini", "delta", "lambda_"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)}")
        if not self.R > 0.0:
            raise ParameterError(f"R must be > 0, got {self.R}")
        if self.gamma_ini < 0.0:
            raise ParameterError(f"gamma_ini must be >= 0, got {self.gamma_ini}")
        if self.delta < 0.0:
            raise ParameterError(f"delta must be >= 0, got {self.delta}")
        if self.gamma_ini + self.delta > 1.0:
            raise ParameterError(
                f"gamma_ini + delta must be <= 1, got {self.gamma_ini + self.delta}"
            )
        if self.lambda_ < 1.0:
            raise ParameterError(f"lambda must be >= 1, got {self.lambda_}")


@enforce_types
@dataclass(frozen=True, eq=False)
class AgentState:
    """position, velocity -- (2,) arrays; grid units and grid units / s"""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        assert self.position.shape == (2,), self.position.shape
        assert self.velocity.shape == (2,), self.velocity.shape
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise DomainError("agent state must be finite")

    def __str__(self):
        return f"AgentState(x={self.position.tolist()}, v={self.velocity.tolist()})"


@enforce_types
def agentState(position, velocity=(0.0, 0.0)) -> AgentState:
    """Convenience constructor from any 2-sequences"""
    return AgentState(
        np.asarray(position, dtype=float).copy(), np.asarray(velocity, dtype=float).copy()
    )


@enforce_types
def barrier(x_e: np.ndarray, x_j: np.ndarray, R: float) -> float:
    d = x_e - x_j
    return float(d @ d - R * R)


@enforce_types
def barrierGradient(x_e: np.ndarray, x_j: np.ndarray) -> np.ndarray:
    """d barrier / d x_e"""
    return 2.0 * (x_e - x_j)


@enforce_types
def barrierVector(x_e: np.ndarray, pedestrians: List[AgentState], R: float) -> np.ndarray:
    """One barrier value per pedestrian; empty for no pedestrians"""
    if not pedestrians:
        return np.zeros(0)
    X_p = np.array([p.position for p in pedestrians])
    D = x_e[None, :] - X_p
    return np.sum(D * D, axis=1) - R * R


@enforce_types
def inSafeSet(x_e: np.ndarray, pedestrians: List[AgentState], R: float) -> bool:
    return bool(np.all(barrierVector(x_e, pedestrians, R) >= 0.0))


@enforce_types
def gammaFromTrust(tau: float, params: CbfParams) -> float:
    """
    @description
      Map trust onto the per-step barrier decay allowance.
      Range is [gamma_ini, gamma_ini + delta], monotone in tau.

    @arguments
      tau -- trust, in [0,1]
      params -- CbfParams (validated on construction)

    @return
      gamma -- float in [0,1]
    """
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"trust must be in [0,1], got {tau}")
    return params.gamma_ini + params.delta * tau**params.lambda_


@enforce_types
def discreteCbfResidual(h_next: float, h_curr: float, gamma: float) -> float:
    """>= 0 iff the step satisfies h(t+1) >= (1 - gamma) h(t)"""
    return h_next - (1.0 - gamma) * h_curr
