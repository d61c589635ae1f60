"""
Deterministic closed-loop 2D simulator.

Per step: refresh trust (fixed, or estimated from scripted confidences),
solve the controller, apply its first control exactly, move pedestrians at
constant velocity, record one TraceRow. Pedestrians never react to the ego.
"""
# pylint: disable=logging-fstring-interpolation
from dataclasses import dataclass
import math
from typing import Dict, List, Optional, Tuple

from enforce_typing import enforce_types
import numpy as np

from util import constants
from util.confidence import ConfidenceProvider, ConfidenceScript, ScriptedConfidenceProvider
from util.errors import ConfigError
from util.logger import logger
from util.mpccontroller import MpcController, MpcParams
from util.reference import referenceVelocity
from util.safetycbf import AgentState, CbfParams, barrier, gammaFromTrust
from util.trustengine import TraitParams, TraitWeights, TrustDynamicsParams, TrustRegistry

Vec2 = Tuple[float, float]


@enforce_types
@dataclass(frozen=True)
class PedestrianConfig:
    """Exactly one of trust (fixed mode) or script (dynamic mode) is set"""

    start: Vec2
    velocity: Vec2 = (0.0, 0.0)
    trust: Optional[float] = None
    script: Optional[ConfidenceScript] = None
    ped_id: str = ""

    def __post_init__(self):
        if (self.trust is None) == (self.script is None):
            raise ConfigError(
                f"pedestrian {self.ped_id or self.start}: set exactly one of"
                " 'trust' (fixed) or 'script' (dynamic)"
            )
        if self.trust is not None and not 0.0 <= self.trust <= 1.0:
            raise ConfigError(f"pedestrian trust must be in [0,1], got {self.trust}")
        if not all(math.isfinite(v) for v in self.start + self.velocity):
            raise ConfigError(
                f"pedestrian {self.ped_id or self.start}: start and velocity must be finite"
            )

    @property
    def trust_mode(self) -> str:
        return "fixed" if self.trust is not None else "dynamic"


@enforce_types
@dataclass(frozen=True)
class ScenarioConfig:
    dt: float
    horizon: int
    R: float
    gamma_ini: float
    delta: float
    lambda_: float
    goal: Vec2
    ego_start: Vec2
    pedestrians: Tuple[PedestrianConfig, ...]
    name: str = "scenario"
    u_max: float = constants.U_MAX
    kp: float = constants.KP
    goal_tol: float = constants.GOAL_TOL
    max_steps: int = constants.MAX_STEPS
    grid_bounds: Tuple[Vec2, Vec2] = constants.GRID_BOUNDS
    solver_tol: float = constants.SOLVER_TOL
    max_iters: int = constants.MAX_ITERS
    terminal_weight: float = constants.TERMINAL_WEIGHT
    reference_mode: str = constants.REFERENCE_MODE
    trust_decimation: int = constants.TRUST_DECIMATION
    alpha: float = constants.ALPHA
    beta: float = constants.BETA
    beta0: float = constants.BETA0
    rho: Tuple[float, ...] = constants.RHO
    nu1: float = constants.NU1
    nu2: float = constants.NU2
    nu3: float = constants.NU3
    nu01: float = constants.NU01
    nu02: float = constants.NU02
    nu03: float = constants.NU03

    def __post_init__(self):
        vectors = self.goal + self.ego_start + self.grid_bounds[0] + self.grid_bounds[1]
        if not all(math.isfinite(v) for v in vectors + (self.kp, self.goal_tol)):
            raise ConfigError("goal, ego_start, grid_bounds, kp and goal_tol must be finite")
        ids = self.pedIds()
        duplicates = sorted({ped_id for ped_id in ids if ids.count(ped_id) > 1})
        if duplicates:
            raise ConfigError(f"pedestrian ids must be unique, got duplicates {duplicates}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if not self.goal_tol > 0.0:
            raise ConfigError(f"goal_tol must be > 0, got {self.goal_tol}")
        if not self.kp > 0.0:
            raise ConfigError(f"kp must be > 0, got {self.kp}")
        if self.trust_decimation < 1:
            raise ConfigError(
                f"trust_decimation must be >= 1, got {self.trust_decimation}"
            )
        try:
            self.cbfParams()
            self.mpcParams()
            self.trustDynamics()
            self.traitParams()
            self.traitWeights()
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def cbfParams(self) -> CbfParams:
        return CbfParams(
            R=self.R, gamma_ini=self.gamma_ini, delta=self.delta, lambda_=self.lambda_
        )

    def mpcParams(self) -> MpcParams:
        return MpcParams(
            dt=self.dt,
            horizon=self.horizon,
            u_max=self.u_max,
            state_bounds=self.grid_bounds,
            solver_tol=self.solver_tol,
            max_iters=self.max_iters,
            terminal_weight=self.terminal_weight,
            reference_mode=self.reference_mode,
        )

    def trustDynamics(self) -> TrustDynamicsParams:
        return TrustDynamicsParams(alpha=self.alpha, beta=self.beta, beta0=self.beta0)

    def traitParams(self) -> TraitParams:
        return TraitParams(
            nu1=self.nu1,
            nu2=self.nu2,
            nu3=self.nu3,
            nu01=self.nu01,
            nu02=self.nu02,
            nu03=self.nu03,
        )

    def traitWeights(self) -> TraitWeights:
        return TraitWeights(rho=self.rho)

    def pedIds(self) -> List[str]:
        return [p.ped_id or f"ped{j}" for j, p in enumerate(self.pedestrians)]


@enforce_types
@dataclass(frozen=True)
class PedestrianRow:
    position: Vec2
    dist: float
    trust: float
    gamma: float
    h: float


@enforce_types
@dataclass(frozen=True)
class TraceRow:
    step: int
    time: float
    ego: Vec2
    u: Vec2
    u_ref: Vec2
    peds: Tuple[PedestrianRow, ...]
    min_cbf_residual: Optional[float]
    status: str
    solve_time: float


@enforce_types
@dataclass(frozen=True)
class ScenarioSummary:
    min_dist_per_ped: Tuple[Optional[float], ...]
    steps_to_goal: Optional[int]
    violations: int
    fallback_steps: int
    total_solve_time_s: float
    steps: int

    @property
    def reached_goal(self) -> bool:
        return self.steps_to_goal is not None


@enforce_types
def pedestrianPosition(ped: PedestrianConfig, step: int, dt: float) -> np.ndarray:
    """Ground truth: start + v * t, evaluated directly (no accumulation)"""
    return np.array(ped.start) + np.array(ped.velocity) * (step * dt)


@enforce_types
def runScenario(
    config: ScenarioConfig, providers: Optional[dict] = None
) -> Tuple[List[TraceRow], ScenarioSummary]:
    """
    @description
      Run one scenario to the goal or to max_steps.

    @arguments
      config -- ScenarioConfig (validated on construction)
      providers -- optional dict of [ped_id] : ConfidenceProvider, replacing
        the scripted stream of those dynamic-trust pedestrians, eg a
        PoseConfidenceProvider

    @return
      trace -- list of TraceRow, one per executed step
      summary -- ScenarioSummary
    """
    logger.info(f"runScenario({config.name}): begin")
    cbf = config.cbfParams()
    controller = MpcController(config.mpcParams(), cbf, kp=config.kp)
    registry = TrustRegistry(
        config.traitWeights(), config.trustDynamics(), config.traitParams()
    )
    ped_ids = config.pedIds()
    overrides = providers or {}
    dynamic_ids = [i for i, p in zip(ped_ids, config.pedestrians) if p.script is not None]
    unknown = sorted(set(overrides) - set(dynamic_ids))
    if unknown:
        raise ConfigError(f"providers given for non-dynamic pedestrians {unknown}")
    sources: Dict[str, ConfidenceProvider] = {
        ped_id: overrides[ped_id] if ped_id in overrides else ScriptedConfidenceProvider(ped.script)
        for ped_id, ped in zip(ped_ids, config.pedestrians)
        if ped.script is not None
    }

    goal = np.array(config.goal, dtype=float)
    x_e = np.array(config.ego_start, dtype=float)
    dt = config.dt

    trace: List[TraceRow] = []
    steps_to_goal: Optional[int] = None
    for step in range(config.max_steps + 1):
        if float(np.linalg.norm(x_e - goal)) <= config.goal_tol:
            steps_to_goal = step
            break
        if step == config.max_steps:
            break

        trusts = _currentTrusts(config, ped_ids, sources, registry, step)
        peds = [
            AgentState(pedestrianPosition(p, step, dt), np.array(p.velocity, dtype=float))
            for p in config.pedestrians
        ]
        ego = AgentState(x_e.copy(), np.zeros(2))

        u, solution = controller.step(ego, peds, trusts, goal)
        u_ref = referenceVelocity(x_e, goal, config.kp, config.u_max)

        ped_rows = []
        for ped, tau in zip(peds, trusts):
            ped_rows.append(
                PedestrianRow(
                    position=_vec2(ped.position),
                    dist=float(np.linalg.norm(x_e - ped.position)),
                    trust=tau,
                    gamma=gammaFromTrust(tau, cbf),
                    h=barrier(x_e, ped.position, cbf.R),
                )
            )
        trace.append(
            TraceRow(
                step=step,
                time=step * dt,
                ego=_vec2(x_e),
                u=_vec2(u),
                u_ref=_vec2(u_ref),
                peds=tuple(ped_rows),
                min_cbf_residual=solution.residuals,
                status=solution.status,
                solve_time=solution.solve_time,
            )
        )

        x_e = x_e + u * dt

        if (step + 1) % 100 == 0:
            logger.info(f"  step {step + 1}: ego at {_vec2(x_e)}")

    summary = summarize(trace, config, steps_to_goal)
    min_dists = [None if d is None else round(d, 3) for d in summary.min_dist_per_ped]
    logger.info(
        f"runScenario({config.name}): done. steps={summary.steps}"
        f", steps_to_goal={summary.steps_to_goal}"
        f", min_dist={min_dists}"
        f", violations={summary.violations}, fallback_steps={summary.fallback_steps}"
    )
    return trace, summary


@enforce_types
def summarize(
    trace: List[TraceRow], config: ScenarioConfig, steps_to_goal: Optional[int]
) -> ScenarioSummary:
    n_peds = len(config.pedestrians)
    min_dists: List[Optional[float]] = [None] * n_peds
    violations, fallback_steps = 0, 0
    for row in trace:
        for j, ped_row in enumerate(row.peds):
            prev = min_dists[j]
            min_dists[j] = ped_row.dist if prev is None else min(prev, ped_row.dist)
        if any(ped_row.dist < config.R for ped_row in row.peds):
            violations += 1
        if row.status == constants.SOLVER_STATUSES[2]:
            fallback_steps += 1
    return ScenarioSummary(
        min_dist_per_ped=tuple(min_dists),
        steps_to_goal=steps_to_goal,
        violations=violations,
        fallback_steps=fallback_steps,
        total_solve_time_s=float(sum(row.solve_time for row in trace)),
        steps=len(trace),
    )


@enforce_types
def distanceSeries(trace: List[TraceRow]) -> Dict[str, List[float]]:
    """dict of [ped{j}] : distance to ego at each step"""
    if not trace:
        return {}
    return {
        f"ped{j}": [row.peds[j].dist for row in trace] for j in range(len(trace[0].peds))
    }


def _currentTrusts(
    config: ScenarioConfig,
    ped_ids: List[str],
    providers: Dict[str, ConfidenceProvider],
    registry: TrustRegistry,
    step: int,
) -> List[float]:
    """Fixed trust, or the registry's latest estimate (0.0 until first seen)"""
    trusts = []
    for ped_id, ped in zip(ped_ids, config.pedestrians):
        if ped.trust is not None:
            trusts.append(ped.trust)
            continue
        if step % config.trust_decimation == 0:
            conf = providers[ped_id].confidencesAt(step)
            if conf is not None:
                registry.observe(ped_id, conf, step)
        tau = registry.trust(ped_id)
        trusts.append(0.0 if tau is None else tau)
    return trusts


def _vec2(v: np.ndarray) -> Vec2:
    return (float(v[0]), float(v[1]))
