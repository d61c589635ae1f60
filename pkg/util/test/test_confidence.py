from enforce_typing import enforce_types
import numpy as np
import pytest

from util.confidence import (
    ConfidenceScript,
    PoseConfidenceProvider,
    PoseKeypoints,
    ScriptEntry,
    ScriptedConfidenceProvider,
    fluctuationConfidence,
    relativeKeypoints,
    scriptedConfidences,
)
from util.errors import DegenerateBboxError, DomainError, ParameterError, ShapeError

N_K = 17


def _pose(offset: float = 0.0, origin=(100.0, 50.0), dims=(40.0, 80.0)) -> PoseKeypoints:
    base = np.linspace(0.0, 1.0, N_K * 2).reshape(N_K, 2)
    points = np.array(origin) + (base + offset) * np.array(dims)
    return PoseKeypoints(points, np.array(origin), np.array(dims))


def _script() -> ConfidenceScript:
    return ConfidenceScript(
        entries=(
            ScriptEntry(first=0, last=4, c_sm=0.1, c_eye=0.9, c_fluc=0.8),
            ScriptEntry(first=7, last=9, c_sm=0.7, c_eye=0.2, c_fluc=0.3),
        )
    )


@enforce_types
def test_relativeKeypoints():
    pose = _pose()
    rel = relativeKeypoints(pose)
    assert rel.shape == (N_K, 2)
    assert rel[0] == pytest.approx([0.0, 1.0 / (2 * N_K - 1)])
    assert rel[-1] == pytest.approx([1.0 - 1.0 / (2 * N_K - 1), 1.0])

    # invariant to translating the whole person + box
    moved = _pose(origin=(300.0, 10.0))
    assert relativeKeypoints(moved) == pytest.approx(rel)


@enforce_types
def test_relativeKeypoints_degenerateBbox():
    with pytest.raises(DegenerateBboxError):
        relativeKeypoints(_pose(dims=(0.0, 80.0)))


@enforce_types
def test_poseKeypoints_shape():
    with pytest.raises(ShapeError):
        PoseKeypoints(np.zeros((16, 2)), np.zeros(2), np.ones(2))
    with pytest.raises(ShapeError):
        PoseKeypoints(np.zeros((N_K, 2)), np.zeros(3), np.ones(2))


@enforce_types
def test_fluctuationConfidence():
    p = relativeKeypoints(_pose())
    assert fluctuationConfidence(p, p, 0.25) == 1.0

    # every keypoint moves 0.5 -> mean deviation 0.5 -> F / 0.5
    q = p + np.array([0.3, 0.4])
    assert fluctuationConfidence(q, p, 0.25) == pytest.approx(0.5)

    # tiny movement saturates at 1
    r = p + np.array([1e-6, 0.0])
    assert fluctuationConfidence(r, p, 0.25) == 1.0

    with pytest.raises(ShapeError):
        fluctuationConfidence(p[:5], p, 0.25)
    with pytest.raises(ParameterError):
        fluctuationConfidence(q, p, 0.0)


@enforce_types
def test_fluctuationConfidence_decreasesWithMotion():
    p = relativeKeypoints(_pose())
    vals = [fluctuationConfidence(p + d, p, 0.25) for d in (0.2, 0.4, 0.8)]
    assert vals[0] > vals[1] > vals[2]
    assert all(0.0 <= v <= 1.0 for v in vals)


@enforce_types
def test_scriptEntry_validation():
    with pytest.raises(ParameterError):
        ScriptEntry(first=5, last=4, c_sm=0.1, c_eye=0.1, c_fluc=0.1)
    with pytest.raises(DomainError):
        ScriptEntry(first=0, last=4, c_sm=1.1, c_eye=0.1, c_fluc=0.1)


@enforce_types
def test_confidenceScript_overlap():
    a = ScriptEntry(first=0, last=4, c_sm=0.1, c_eye=0.1, c_fluc=0.1)
    b = ScriptEntry(first=4, last=8, c_sm=0.1, c_eye=0.1, c_fluc=0.1)
    with pytest.raises(ParameterError):
        ConfidenceScript(entries=(a, b))
    with pytest.raises(ParameterError):
        ConfidenceScript(entries=(b, a))


@enforce_types
def test_scriptedConfidences():
    script = _script()
    c = scriptedConfidences(script, 0)
    assert (c.c_sm, c.c_eye, c.c_fluc) == (0.1, 0.9, 0.8)
    assert scriptedConfidences(script, 4).c_sm == 0.1
    assert scriptedConfidences(script, 5) is None  # gap = unobserved
    assert scriptedConfidences(script, 9).c_sm == 0.7
    assert scriptedConfidences(script, 10) is None


@enforce_types
def test_scriptedProvider():
    provider = ScriptedConfidenceProvider(_script())
    assert provider.confidencesAt(2) == scriptedConfidences(_script(), 2)
    assert provider.confidencesAt(6) is None


@enforce_types
def test_poseProvider():
    poses = {0: _pose(), 1: _pose(), 3: _pose(offset=0.5)}
    provider = PoseConfidenceProvider(poses, _script(), 0.25)

    c0 = provider.confidencesAt(0)
    assert c0.c_fluc is None and c0.c_sm == 0.1

    c1 = provider.confidencesAt(1)
    assert c1.c_fluc == 1.0  # same pose

    assert provider.confidencesAt(2) is None  # no pose

    # compared against step 1, the last seen pose
    c3 = provider.confidencesAt(3)
    assert 0.0 <= c3.c_fluc < 1.0

    with pytest.raises(ParameterError):
        PoseConfidenceProvider(poses, _script(), -1.0)
