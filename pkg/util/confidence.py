"""
Confidence values feeding the trust estimator.

Pose-fluctuation confidence is computed from body keypoints. Smartphone and
eye-contact confidences would come from image classifiers; here they come
from scripted piecewise-constant streams behind the same interface.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from enforce_typing import enforce_types
import numpy as np

from util import constants
from util.errors import DegenerateBboxError, DomainError, ParameterError, ShapeError
from util.trustengine import Confidences


@enforce_types
@dataclass(frozen=True, eq=False)
class PoseKeypoints:
    """
    points -- (N_k, 2) array of absolute keypoint positions, pixels
    bbox_origin -- (2,) top-left corner of the bounding box, pixels
    bbox_dims -- (2,) width, height of the bounding box, pixels
    """

    points: np.ndarray
    bbox_origin: np.ndarray
    bbox_dims: np.ndarray

    def __post_init__(self):
        if self.points.shape != (constants.N_KEYPOINTS, 2):
            raise ShapeError(
                f"need ({constants.N_KEYPOINTS}, 2) keypoints, got {self.points.shape}"
            )
        if self.bbox_origin.shape != (2,) or self.bbox_dims.shape != (2,):
            raise ShapeError("bbox origin and dims must be 2D vectors")


@enforce_types
@dataclass(frozen=True)
class ScriptEntry:
    """Confidences held over the inclusive step range [first, last]"""

    first: int
    last: int
    c_sm: float
    c_eye: float
    c_fluc: float

    def __post_init__(self):
        if self.last < self.first:
            raise ParameterError(f"step range [{self.first}, {self.last}] is empty")
        for name in ("c_sm", "c_eye", "c_fluc"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise DomainError(f"{name} must be in [0,1], got {val}")


@enforce_types
@dataclass(frozen=True)
class ConfidenceScript:
    entries: Tuple[ScriptEntry, ...]

    def __post_init__(self):
        for prev, nxt in zip(self.entries, self.entries[1:]):
            if nxt.first <= prev.last:
                raise ParameterError(
                    f"script ranges must ascend without overlap: "
                    f"[{prev.first}, {prev.last}] then [{nxt.first}, {nxt.last}]"
                )


@enforce_types
def relativeKeypoints(pose: PoseKeypoints) -> np.ndarray:
    """Keypoints relative to the bounding box, each in bbox-normalized units"""
    if np.any(pose.bbox_dims <= 0.0):
        raise DegenerateBboxError(f"bbox dims must be > 0, got {pose.bbox_dims}")
    return (pose.points - pose.bbox_origin) / pose.bbox_dims


@enforce_types
def fluctuationConfidence(p_now: np.ndarray, p_prev: np.ndarray, F: float) -> float:
    """
    @description
      Pose-steadiness confidence: inversely proportional to the mean keypoint
      displacement between consecutive relative poses.

    @arguments
      p_now, p_prev -- (N_k, 2) relative keypoints at this and the previous step
      F -- fluctuation sensitivity, > 0

    @return
      c_fluc -- float in [0,1]. 1.0 for identical poses.
    """
    if p_now.shape != p_prev.shape:
        raise ShapeError(f"pose shapes differ: {p_now.shape} vs {p_prev.shape}")
    if F <= 0.0:
        raise ParameterError(f"fluctuation sensitivity must be > 0, got {F}")
    N_k = p_now.shape[0]
    deviation = float(np.sum(np.linalg.norm(p_now - p_prev, axis=1)))
    if deviation == 0.0:
        return 1.0
    return float(min(1.0, max(0.0, F * N_k / deviation)))


@enforce_types
def scriptedConfidences(script: ConfidenceScript, step: int) -> Optional[Confidences]:
    """Returns the triple for the range holding step, or None if no range does"""
    for entry in script.entries:
        if entry.first <= step <= entry.last:
            return Confidences(c_sm=entry.c_sm, c_eye=entry.c_eye, c_fluc=entry.c_fluc)
    return None


# ========================================================================
# providers


class ConfidenceProvider:
    """Source of per-step confidences for one pedestrian"""

    def confidencesAt(self, step: int) -> Optional[Confidences]:
        raise NotImplementedError


@enforce_types
class ScriptedConfidenceProvider(ConfidenceProvider):
    def __init__(self, script: ConfidenceScript):
        self.script = script

    def confidencesAt(self, step: int) -> Optional[Confidences]:
        return scriptedConfidences(self.script, step)


@enforce_types
class PoseConfidenceProvider(ConfidenceProvider):
    """
    c_sm and c_eye come from a script; c_fluc comes from the pose stream.
    A step with no pose is unobserved. The first pose has nothing to compare
    against, so it yields c_fluc=None.
    """

    def __init__(
        self,
        poses: Dict[int, PoseKeypoints],
        classifier_script: ConfidenceScript,
        F: float = constants.FLUCTUATION_SENSITIVITY,
    ):
        if F <= 0.0:
            raise ParameterError(f"fluctuation sensitivity must be > 0, got {F}")
        self.poses = poses
        self.classifier_script = classifier_script
        self.F = F
        self._prev_step: Optional[int] = None

    def confidencesAt(self, step: int) -> Optional[Confidences]:
        pose = self.poses.get(step)
        scripted = scriptedConfidences(self.classifier_script, step)
        if pose is None or scripted is None:
            return None

        c_fluc = None
        if self._prev_step is not None:
            p_prev = relativeKeypoints(self.poses[self._prev_step])
            c_fluc = fluctuationConfidence(relativeKeypoints(pose), p_prev, self.F)
        self._prev_step = step
        return Confidences(c_sm=scripted.c_sm, c_eye=scripted.c_eye, c_fluc=c_fluc)
