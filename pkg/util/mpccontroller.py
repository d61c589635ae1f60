"""
Receding-horizon controller with trust-adaptive CBF constraints.

Each control step solves, over the control sequence u(t..t+N_h-1):

  min   sum_k ||u_k - u_ref_k||^2  (+ optional terminal cost)
  s.t.  x_{k+1} = x_k + u_k dt            (eliminated: single shooting)
        |u_k|_inf <= u_max,  x_k in grid box
        h(x_{k+1}, p_j(k+1)) - (1 - gamma_j) h(x_k, p_j(k)) >= 0   for all k, j

Pedestrians are rolled out at constant velocity, so their predicted
positions don't depend on the controls and are precomputed.
"""
# pylint: disable=logging-fstring-interpolation
from dataclasses import dataclass
import math
import time
from typing import List, Optional, Tuple
import warnings

from enforce_typing import enforce_types
import numpy as np
from scipy import optimize

from util import constants
from util.errors import DomainError, ParameterError, ShapeError
from util.logger import logger
from util.reference import referenceVelocity
from util.safetycbf import AgentState, CbfParams, gammaFromTrust

OPTIMAL, SUBOPTIMAL, FALLBACK = constants.SOLVER_STATUSES


@enforce_types
@dataclass(frozen=True)
class MpcParams:
    dt: float = constants.DT
    horizon: int = constants.HORIZON
    u_max: float = constants.U_MAX
    state_bounds: Tuple[Tuple[float, float], Tuple[float, float]] = constants.GRID_BOUNDS
    solver_tol: float = constants.SOLVER_TOL
    max_iters: int = constants.MAX_ITERS
    terminal_weight: float = constants.TERMINAL_WEIGHT
    reference_mode: str = constants.REFERENCE_MODE

    def __post_init__(self):
        finite = [self.dt, self.u_max, self.solver_tol, self.terminal_weight]
        finite += [v for corner in self.state_bounds for v in corner]
        if not all(math.isfinite(v) for v in finite):
            raise ParameterError("MPC parameters and state bounds must be finite")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if self.horizon < 1:
            raise ParameterError(f"horizon must be >= 1, got {self.horizon}")
        if not self.u_max > 0.0:
            raise ParameterError(f"u_max must be > 0, got {self.u_max}")
        if not self.solver_tol > 0.0:
            raise ParameterError(f"solver_tol must be > 0, got {self.solver_tol}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.terminal_weight < 0.0:
            raise ParameterError(
                f"terminal_weight must be >= 0, got {self.terminal_weight}"
            )
        if self.reference_mode not in constants.REFERENCE_MODES:
            raise ParameterError(
                f"reference_mode must be one of {constants.REFERENCE_MODES}"
                f", got {self.reference_mode!r}"
            )
        (lo, hi) = self.state_bounds
        if lo[0] >= hi[0] or lo[1] >= hi[1]:
            raise ParameterError(f"state_bounds must have lo < hi, got {self.state_bounds}")

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.state_bounds[0], dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.state_bounds[1], dtype=float)


@enforce_types
@dataclass(frozen=True, eq=False)
class MpcSolution:
    """
    controls -- (N_h, 2) velocity sequence
    predicted_ego -- (N_h+1, 2) ego positions, starting at the current one
    cost -- objective value at controls
    status -- one of optimal | feasible_suboptimal | infeasible_fallback
    residuals -- min CBF residual over all constraints; None without pedestrians
    solve_time -- wall-clock seconds spent in the solver
    """

    controls: np.ndarray
    predicted_ego: np.ndarray
    cost: float
    status: str
    residuals: Optional[float]
    solve_time: float
    iterations: int = 0
    message: str = ""


# ========================================================================
# prediction models and cost


@enforce_types
def predictEgo(state: AgentState, u: np.ndarray, dt: float) -> AgentState:
    """Single integrator: the commanded velocity moves the ego for one step"""
    return AgentState(state.position + u * dt, u.astype(float).copy())


@enforce_types
def predictPedestrians(
    pedestrians: List[AgentState], dt: float, k: int
) -> List[AgentState]:
    """Constant-velocity rollout k steps ahead"""
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    return [
        AgentState(p.position + p.velocity * (k * dt), p.velocity.copy())
        for p in pedestrians
    ]


@enforce_types
def stageCost(u: np.ndarray, u_ref: np.ndarray) -> float:
    d = u - u_ref
    return float(d @ d)


# ========================================================================
# problem


@enforce_types
class MpcProblem:
    """
    One finite-horizon problem. Decision vector is the flattened (N_h, 2)
    control sequence; every function below takes that flat vector.
    """

    def __init__(
        self,
        ego: AgentState,
        pedestrians: List[AgentState],
        gammas: np.ndarray,
        reference: np.ndarray,
        params: MpcParams,
        cbf: CbfParams,
        goal: np.ndarray,
    ):
        N = params.horizon
        if gammas.shape != (len(pedestrians),):
            raise ShapeError(
                f"{gammas.shape[0]} gammas for {len(pedestrians)} pedestrians"
            )
        if np.any(gammas < 0.0) or np.any(gammas > 1.0):
            raise DomainError(f"gammas must be in [0,1], got {gammas}")
        if reference.shape != (N, 2):
            raise ShapeError(f"reference must be ({N}, 2), got {reference.shape}")

        self.ego = ego
        self.pedestrians = list(pedestrians)
        self.gammas = gammas
        self.reference = reference
        self.params = params
        self.cbf = cbf
        self.goal = goal

        self.N = N
        self.N_p = len(pedestrians)
        dt = params.dt

        # (N+1, N_p, 2) pedestrian rollout
        if self.N_p:
            X_p = np.array([p.position for p in pedestrians])
            V_p = np.array([p.velocity for p in pedestrians])
            ks = np.arange(N + 1, dtype=float)[:, None, None]
            self.ped_rollout = X_p[None, :, :] + V_p[None, :, :] * ks * dt
        else:
            self.ped_rollout = np.zeros((N + 1, 0, 2))

        # d x_{k+1} / d u_i = dt * I  for i <= k
        self._le = np.tril(np.ones((N, N)))
        self._lt = np.tril(np.ones((N, N)), -1)
        self._A_state = dt * np.kron(self._le, np.eye(2))
        self._lo = np.tile(params.lo, N)
        self._hi = np.tile(params.hi, N)

    @property
    def numCbfConstraints(self) -> int:
        return self.N * self.N_p

    def rollout(self, u: np.ndarray) -> np.ndarray:
        """(N+1, 2) predicted ego positions"""
        U = u.reshape(self.N, 2)
        X = self.ego.position[None, :] + self.params.dt * np.cumsum(U, axis=0)
        return np.vstack([self.ego.position[None, :], X])

    # cost
    def cost(self, u: np.ndarray) -> float:
        D = u.reshape(self.N, 2) - self.reference
        J = float(np.sum(D * D))
        w = self.params.terminal_weight
        if w > 0.0:
            e = self.rollout(u)[-1] - self.goal
            J += w * float(e @ e)
        return J

    def costGradient(self, u: np.ndarray) -> np.ndarray:
        G = 2.0 * (u.reshape(self.N, 2) - self.reference)
        w = self.params.terminal_weight
        if w > 0.0:
            e = self.rollout(u)[-1] - self.goal
            G = G + 2.0 * w * self.params.dt * e[None, :]
        return G.ravel()

    # CBF constraints, row index k * N_p + j
    def _barriers(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        X = self.rollout(u)
        D = X[:, None, :] - self.ped_rollout
        H = np.sum(D * D, axis=2) - self.cbf.R**2
        return H, D

    def cbfResiduals(self, u: np.ndarray) -> np.ndarray:
        H, _ = self._barriers(u)
        return (H[1:] - (1.0 - self.gammas)[None, :] * H[:-1]).ravel()

    def cbfJacobian(self, u: np.ndarray) -> np.ndarray:
        _, D = self._barriers(u)
        G = 2.0 * self.params.dt * D  # d h_k / d u_i for i < k
        G_next = G[1:][:, :, None, :]
        G_curr = ((1.0 - self.gammas)[None, :, None] * G[:-1])[:, :, None, :]
        J = (
            self._le[:, None, :, None] * G_next
            - self._lt[:, None, :, None] * G_curr
        )
        return J.reshape(self.N * self.N_p, self.N * 2)

    # state box
    def stateConstraints(self, u: np.ndarray) -> np.ndarray:
        X = self.rollout(u)[1:].ravel()
        return np.concatenate([X - self._lo, self._hi - X])

    def stateJacobian(self, u: np.ndarray) -> np.ndarray:  # pylint: disable=unused-argument
        return np.vstack([self._A_state, -self._A_state])

    def maxViolation(self, u: np.ndarray) -> float:
        v = max(0.0, float(np.max(np.abs(u))) - self.params.u_max)
        v = max(v, -float(np.min(self.stateConstraints(u))))
        if self.N_p:
            v = max(v, -float(np.min(self.cbfResiduals(u))))
        return v

    def minResidual(self, u: np.ndarray) -> Optional[float]:
        if not self.N_p:
            return None
        return float(np.min(self.cbfResiduals(u)))

    def __str__(self):
        return (
            f"MpcProblem: N_h={self.N}, N_p={self.N_p}"
            f", # cbf constraints={self.numCbfConstraints}"
            f", gammas={self.gammas.tolist()}"
        )


@enforce_types
def assemble(
    ego: AgentState,
    pedestrians: List[AgentState],
    trusts: List[float],
    reference: np.ndarray,
    params: MpcParams,
    cbf: CbfParams,
    goal: Optional[np.ndarray] = None,
) -> MpcProblem:
    """
    @description
      Build the finite-horizon problem for this control step.
      gamma_j comes from the latest trust and is held over the horizon.

    @arguments
      ego -- current ego state
      pedestrians -- current pedestrian states
      trusts -- one trust value per pedestrian
      reference -- (N_h, 2) desired velocities
      params, cbf -- controller and barrier parameters
      goal -- (2,) goal, only used by the terminal cost

    @return
      problem -- MpcProblem
    """
    if len(trusts) != len(pedestrians):
        raise ShapeError(f"{len(trusts)} trusts for {len(pedestrians)} pedestrians")
    gammas = np.array([gammaFromTrust(float(t), cbf) for t in trusts], dtype=float)
    if goal is None:
        goal = ego.position.copy()
    return MpcProblem(ego, pedestrians, gammas, reference, params, cbf, goal)


@enforce_types
def solve(problem: MpcProblem, warm_start: Optional[np.ndarray] = None) -> MpcSolution:
    """
    @description
      Solve with SLSQP from the warm start (or the reference when cold).
      Never raises: failures come back as status infeasible_fallback with
      zero-velocity controls. A feasible warm start is returned instead when
      it is cheaper or the solver result is infeasible.

    @arguments
      problem -- MpcProblem
      warm_start -- (N_h, 2) initial control sequence, or None

    @return
      solution -- MpcSolution
    """
    P = problem.params
    N = problem.N
    if warm_start is None:
        x0 = problem.reference.ravel().copy()
    else:
        assert warm_start.shape == (N, 2), warm_start.shape
        x0 = warm_start.ravel().copy()
    x0 = np.clip(x0, -P.u_max, P.u_max)

    constraints = [
        {
            "type": "ineq",
            "fun": problem.stateConstraints,
            "jac": problem.stateJacobian,
        }
    ]
    if problem.N_p:
        constraints.append(
            {"type": "ineq", "fun": problem.cbfResiduals, "jac": problem.cbfJacobian}
        )

    st = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = optimize.minimize(
                problem.cost,
                x0,
                jac=problem.costGradient,
                method="SLSQP",
                bounds=[(-P.u_max, P.u_max)] * (2 * N),
                constraints=constraints,
                options={"maxiter": P.max_iters, "ftol": P.solver_tol * 1e-3},
            )
    # pylint: disable=broad-except
    except Exception as e:
        solve_time = time.perf_counter() - st
        logger.warning(f"solve: solver raised '{e}'; falling back to a stop")
        return _fallbackSolution(problem, solve_time, f"solver raised: {e}")
    solve_time = time.perf_counter() - st

    u = np.clip(res.x, -P.u_max, P.u_max)
    warm_ok = warm_start is not None and problem.maxViolation(x0) <= P.solver_tol
    if not np.all(np.isfinite(u)) or problem.maxViolation(u) > P.solver_tol:
        if not warm_ok:
            logger.warning(f"solve: no feasible solution ({res.message}); stopping")
            return _fallbackSolution(problem, solve_time, str(res.message))
        logger.warning(f"solve: solver result infeasible ({res.message}); keeping warm start")
        (u, status) = (x0, SUBOPTIMAL)
    else:
        status = OPTIMAL if res.success else SUBOPTIMAL
    cost = problem.cost(u)

    # never return something worse than a feasible warm start
    if warm_ok:
        warm_cost = problem.cost(x0)
        if warm_cost < cost:
            (u, cost) = (x0, warm_cost)

    return MpcSolution(
        controls=u.reshape(N, 2),
        predicted_ego=problem.rollout(u),
        cost=cost,
        status=status,
        residuals=problem.minResidual(u),
        solve_time=solve_time,
        iterations=int(res.nit),
        message=str(res.message),
    )


@enforce_types
def _fallbackSolution(problem: MpcProblem, solve_time: float, message: str) -> MpcSolution:
    u = np.zeros(problem.N * 2)
    return MpcSolution(
        controls=u.reshape(problem.N, 2),
        predicted_ego=problem.rollout(u),
        cost=problem.cost(u),
        status=FALLBACK,
        residuals=problem.minResidual(u),
        solve_time=solve_time,
        iterations=0,
        message=message,
    )


# ========================================================================
# controller


@enforce_types
class MpcController:
    """
    Receding-horizon loop state: owns the warm start carried between steps.
    Single-threaded; use one instance per simulation run.
    """

    def __init__(self, params: MpcParams, cbf: CbfParams, kp: float = constants.KP):
        if kp <= 0.0:
            raise ParameterError(f"kp must be > 0, got {kp}")
        self.params = params
        self.cbf = cbf
        self.kp = kp
        self._prev: Optional[MpcSolution] = None

    def reset(self):
        self._prev = None

    def warmStart(self) -> Optional[np.ndarray]:
        """Previous controls shifted one step, last entry repeated"""
        if self._prev is None:
            return None
        U = self._prev.controls
        return np.vstack([U[1:], U[-1:]])

    def referenceSequence(
        self, x_e: np.ndarray, goal: np.ndarray, warm: Optional[np.ndarray]
    ) -> np.ndarray:
        """
        constant -- the law evaluated at the current state, held over the horizon
        nominal -- the law evaluated along the warm-start trajectory
        """
        P = self.params
        if P.reference_mode == "nominal" and warm is not None:
            X = x_e[None, :] + P.dt * np.cumsum(np.vstack([np.zeros((1, 2)), warm[:-1]]), axis=0)
            return np.array([referenceVelocity(x, goal, self.kp, P.u_max) for x in X])
        u_ref = referenceVelocity(x_e, goal, self.kp, P.u_max)
        return np.tile(u_ref, (P.horizon, 1))

    def step(
        self,
        ego: AgentState,
        pedestrians: List[AgentState],
        trusts: List[float],
        goal: np.ndarray,
    ) -> Tuple[np.ndarray, MpcSolution]:
        """
        @description
          One receding-horizon step: build reference, assemble, solve.

        @return
          u_applied -- (2,) first control of the solution
          solution -- MpcSolution
        """
        warm = self.warmStart()
        reference = self.referenceSequence(ego.position, goal, warm)
        problem = assemble(
            ego, pedestrians, trusts, reference, self.params, self.cbf, goal
        )
        solution = solve(problem, warm)
        self._prev = None if solution.status == FALLBACK else solution
        return solution.controls[0].copy(), solution
