from enforce_typing import enforce_types
import numpy as np

from util.errors import ParameterError


@enforce_types
def referenceVelocity(
    x_e: np.ndarray, x_g: np.ndarray, kp: float, u_max: float
) -> np.ndarray:
    """
    @description
      Bounded proportional law toward the goal. Saturation rescales the
      vector to norm u_max, so the direction always points at the goal.

    @arguments
      x_e -- (2,) ego position
      x_g -- (2,) goal position
      kp -- proportional gain, > 0
      u_max -- speed bound, > 0

    @return
      u_ref -- (2,) desired velocity with ||u_ref|| <= u_max
    """
    if kp <= 0.0:
        raise ParameterError(f"kp must be > 0, got {kp}")
    if u_max <= 0.0:
        raise ParameterError(f"u_max must be > 0, got {u_max}")
    u = kp * (x_g - x_e)
    speed = float(np.linalg.norm(u))
    if speed > u_max:
        u = u * (u_max / speed)
    return u
