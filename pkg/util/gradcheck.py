"""
Central finite differences, for checking analytic gradients and Jacobians.
"""
from typing import Callable, Dict

from enforce_typing import enforce_types
import numpy as np


@enforce_types
def finiteDifferenceJacobian(
    func: Callable, x: np.ndarray, eps: float = 1e-5
) -> np.ndarray:
    """
    @arguments
      func -- maps (n,) array to a scalar or an (m,) array
      x -- (n,) point to differentiate at
      eps -- step size

    @return
      jac -- (n,) for scalar func, else (m, n)
    """
    x0 = np.asarray(x, dtype=float)
    n = x0.size
    cols = []
    for i in range(n):
        xp, xm = x0.copy(), x0.copy()
        xp[i] += eps
        xm[i] -= eps
        fplus = np.atleast_1d(np.asarray(func(xp), dtype=float))
        fminus = np.atleast_1d(np.asarray(func(xm), dtype=float))
        cols.append((fplus - fminus) / (2.0 * eps))
    jac = np.stack(cols, axis=1)
    if np.ndim(func(x0)) == 0:
        return jac[0]
    return jac


@enforce_types
def relativeError(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Norm-wise relative error, guarded against all-zero references"""
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), 1e-12)
    return float(np.linalg.norm(analytic - numeric)) / scale


@enforce_types
def checkProblemGradients(problem, u: np.ndarray, eps: float = 1e-5) -> Dict[str, float]:
    """
    @description
      Compare an MpcProblem's analytic derivatives against central differences.

    @return
      errors -- dict of [cost | cbf | state] : relative error
    """
    errors = {
        "cost": relativeError(
            problem.costGradient(u), finiteDifferenceJacobian(problem.cost, u, eps)
        ),
        "state": relativeError(
            problem.stateJacobian(u),
            finiteDifferenceJacobian(problem.stateConstraints, u, eps),
        ),
    }
    if problem.numCbfConstraints > 0:
        errors["cbf"] = relativeError(
            problem.cbfJacobian(u),
            finiteDifferenceJacobian(problem.cbfResiduals, u, eps),
        )
    return errors
