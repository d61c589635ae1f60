"""
Per-pedestrian trust estimation.

Three trait scores (smartphone usage, eye contact, pose fluctuation) are
updated recursively from per-step confidence values, combined linearly into
a total score, then aggregated over time into a trust value in [0,1].
"""
from dataclasses import dataclass, replace
import math
from typing import Dict, List, Optional, Tuple

from enforce_typing import enforce_types

from util import constants
from util.errors import (
    DomainError,
    InvalidBoundsError,
    InvalidWeightsError,
    OrderingError,
    ParameterError,
)


@enforce_types
@dataclass(frozen=True)
class TraitWeights:
    """rho -- weight per trait, in trait order (smartphone, eye, pose)"""

    rho: Tuple[float, ...] = constants.RHO

    def __post_init__(self):
        if len(self.rho) != constants.N_TRAITS:
            raise InvalidWeightsError(
                f"need {constants.N_TRAITS} trait weights, got {len(self.rho)}"
            )
        if any(w < 0.0 or not math.isfinite(w) for w in self.rho):
            raise InvalidWeightsError(f"trait weights must be >= 0, got {self.rho}")
        if abs(sum(self.rho) - 1.0) > constants.WEIGHT_SUM_TOL:
            raise InvalidWeightsError(f"trait weights must sum to 1, got {self.rho}")


@enforce_types
@dataclass(frozen=True)
class TrustDynamicsParams:
    alpha: float = constants.ALPHA
    beta: float = constants.BETA
    beta0: float = constants.BETA0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in [0,1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError(f"beta must be in [0,1], got {self.beta}")
        if not 0.0 < self.beta0 <= 1.0:
            raise ParameterError(f"beta0 must be in (0,1], got {self.beta0}")


@enforce_types
@dataclass(frozen=True)
class TraitParams:
    nu1: float = constants.NU1
    nu2: float = constants.NU2
    nu3: float = constants.NU3
    nu01: float = constants.NU01
    nu02: float = constants.NU02
    nu03: float = constants.NU03

    def __post_init__(self):
        for name in ("nu1", "nu2", "nu3", "nu01", "nu02", "nu03"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0:
                raise ParameterError(f"{name} must be in (0,1], got {val}")


@enforce_types
@dataclass(frozen=True)
class Confidences:
    """One step of classifier output for one pedestrian.
    c_fluc is None when no previous pose exists to compare against."""

    c_sm: float
    c_eye: float
    c_fluc: Optional[float] = None


@enforce_types
@dataclass(frozen=True)
class TrustRecord:
    ped_id: str
    s1: float
    s2: float
    s3: float
    total_score: float
    trust: float
    last_observed_step: int
    initialized: bool = True


# ========================================================================
# scalar recursions


@enforce_types
def saturate(v: float, lo: float, hi: float) -> float:
    """Clamp v onto [lo, hi]"""
    if lo > hi:
        raise InvalidBoundsError(f"lo={lo} > hi={hi}")
    return min(hi, max(lo, v))


@enforce_types
def totalScore(traits: Tuple[float, ...], weights: TraitWeights) -> float:
    """
    @description
      Weighted linear combination of trait scores.

    @arguments
      traits -- (s1, s2, s3), each in [0,1]
      weights -- TraitWeights

    @return
      total_score -- float in [0,1]
    """
    if len(traits) != len(weights.rho):
        raise InvalidWeightsError(
            f"{len(traits)} traits but {len(weights.rho)} weights"
        )
    for s in traits:
        _checkUnit(s, "trait score")
    S = sum(rho_i * s_i for rho_i, s_i in zip(weights.rho, traits))
    # unit-sum weights keep S in [0,1] up to rounding
    return saturate(S, 0.0, 1.0)


@enforce_types
def initTrust(S0: float, params: TrustDynamicsParams) -> float:
    _checkUnit(S0, "total score")
    return params.beta0 * S0


@enforce_types
def updateTrust(tau_prev: float, S_new: float, params: TrustDynamicsParams) -> float:
    _checkUnit(tau_prev, "trust")
    _checkUnit(S_new, "total score")
    return saturate(params.alpha * tau_prev + params.beta * S_new, 0.0, 1.0)


@enforce_types
def updateSmartphoneTrait(
    s_prev: float, c_sm: float, params: TraitParams, first_observation: bool
) -> float:
    """Smartphone confidence is inversely related to the trait score"""
    _checkUnit(s_prev, "smartphone trait")
    _checkUnit(c_sm, "c_sm")
    if first_observation:
        return params.nu01 * (1.0 - c_sm)
    s = params.nu1 * s_prev + (1.0 - params.nu1) * (1.0 - c_sm)
    return saturate(s, 0.0, 1.0)


@enforce_types
def updateEyeTrait(
    s_prev: float, c_eye: float, params: TraitParams, first_observation: bool
) -> float:
    """Eye contact only ever adds to the score"""
    _checkUnit(s_prev, "eye trait")
    _checkUnit(c_eye, "c_eye")
    if first_observation:
        return params.nu02 * c_eye
    return saturate(s_prev + params.nu2 * c_eye, 0.0, 1.0)


@enforce_types
def updatePoseTrait(
    s_prev: float, c_fluc: float, params: TraitParams, first_observation: bool
) -> float:
    _checkUnit(s_prev, "pose trait")
    _checkUnit(c_fluc, "c_fluc")
    if first_observation:
        return params.nu03
    s = params.nu3 * s_prev + (1.0 - params.nu3) * c_fluc
    return saturate(s, 0.0, 1.0)


# ========================================================================
# registry


@enforce_types
class TrustRegistry:
    """
    Trust records keyed by tracking id. Single writer; records are frozen
    values, so snapshots can be handed to other threads.

    A pedestrian that isn't observed at a step keeps its last trust value.
    Records are never evicted.
    """

    def __init__(
        self,
        weights: TraitWeights,
        dynamics: TrustDynamicsParams,
        traits: TraitParams,
    ):
        self.weights = weights
        self.dynamics = dynamics
        self.traits = traits
        self._records: Dict[str, TrustRecord] = {}

    def observe(self, ped_id: str, confidences: Confidences, step: int) -> TrustRecord:
        """
        @description
          Fold one step of confidences into the pedestrian's record.
          Order: trait recursions, total score, trust aggregation.

        @arguments
          ped_id -- tracking identifier
          confidences -- Confidences for this step
          step -- time index; must exceed the last observed step for ped_id

        @return
          record -- the new TrustRecord (also stored)
        """
        _checkUnit(confidences.c_sm, "c_sm")
        _checkUnit(confidences.c_eye, "c_eye")
        if confidences.c_fluc is not None:
            _checkUnit(confidences.c_fluc, "c_fluc")

        prev = self._records.get(ped_id)
        P = self.traits
        if prev is None:
            s1 = updateSmartphoneTrait(0.0, confidences.c_sm, P, True)
            s2 = updateEyeTrait(0.0, confidences.c_eye, P, True)
            s3 = updatePoseTrait(0.0, 0.0, P, True)
            S = totalScore((s1, s2, s3), self.weights)
            tau = initTrust(S, self.dynamics)
        else:
            if step <= prev.last_observed_step:
                raise OrderingError(
                    f"{ped_id}: step {step} not after last observed step "
                    f"{prev.last_observed_step}"
                )
            if confidences.c_fluc is None:
                raise DomainError(f"{ped_id}: c_fluc required after first observation")
            s1 = updateSmartphoneTrait(prev.s1, confidences.c_sm, P, False)
            s2 = updateEyeTrait(prev.s2, confidences.c_eye, P, False)
            s3 = updatePoseTrait(prev.s3, confidences.c_fluc, P, False)
            S = totalScore((s1, s2, s3), self.weights)
            tau = updateTrust(prev.trust, S, self.dynamics)

        record = TrustRecord(
            ped_id=ped_id,
            s1=s1,
            s2=s2,
            s3=s3,
            total_score=S,
            trust=tau,
            last_observed_step=step,
            initialized=True,
        )
        self._records[ped_id] = record
        return record

    def get(self, ped_id: str) -> Optional[TrustRecord]:
        return self._records.get(ped_id)

    def trust(self, ped_id: str) -> Optional[float]:
        """Latest trust for ped_id, or None if never observed"""
        record = self._records.get(ped_id)
        return None if record is None else record.trust

    def snapshot(self) -> Dict[str, TrustRecord]:
        return dict(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, ped_id) -> bool:
        return ped_id in self._records

    def __str__(self):
        s = ["TrustRegistry={"]
        s += [f"{r.ped_id}: tau={r.trust:.3f} " for r in self._records.values()]
        s += ["/TrustRegistry}"]
        return "".join(s)


# ========================================================================
# dynamics variants


@enforce_types
def dynamicsPresets() -> Dict[str, TrustDynamicsParams]:
    """
    @return
      presets -- dict of [name] : TrustDynamicsParams
        monotone -- trust never decreases; beta is the per-step rate of increase
        moving_average -- alpha + beta = 1, beta0 = 1: smooths the total score
        memoryless -- trust is the current total score
    """
    return {
        "monotone": TrustDynamicsParams(
            alpha=constants.ALPHA, beta=constants.BETA, beta0=constants.BETA0
        ),
        "moving_average": TrustDynamicsParams(alpha=0.9, beta=0.1, beta0=1.0),
        "memoryless": TrustDynamicsParams(alpha=0.0, beta=1.0, beta0=1.0),
    }


@enforce_types
def trustTrajectory(
    confidence_seq: list,
    weights: TraitWeights,
    dynamics: TrustDynamicsParams,
    traits: TraitParams,
) -> List[Optional[float]]:
    """
    @description
      Trust of a single pedestrian over a sequence of steps.

    @arguments
      confidence_seq -- list of Confidences or None, one per step. None = unobserved
      weights, dynamics, traits -- estimator parameters

    @return
      trusts -- list of float (None until the first observation)
    """
    registry = TrustRegistry(weights, dynamics, traits)
    ped_id = "ped"
    trusts: List[Optional[float]] = []
    for step, conf in enumerate(confidence_seq):
        if conf is not None:
            if ped_id not in registry:
                conf = replace(conf, c_fluc=None)
            registry.observe(ped_id, conf, step)
        trusts.append(registry.trust(ped_id))
    return trusts


@enforce_types
def _checkUnit(v: float, what: str):
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{what} must be in [0,1], got {v}")
