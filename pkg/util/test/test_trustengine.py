from enforce_typing import enforce_types
from hypothesis import given, strategies as st
import numpy as np
import pytest

from util.errors import (
    DomainError,
    InvalidBoundsError,
    InvalidWeightsError,
    OrderingError,
    ParameterError,
)
from util.trustengine import (
    Confidences,
    TraitParams,
    TraitWeights,
    TrustDynamicsParams,
    TrustRegistry,
    dynamicsPresets,
    initTrust,
    saturate,
    totalScore,
    trustTrajectory,
    updateEyeTrait,
    updatePoseTrait,
    updateSmartphoneTrait,
    updateTrust,
)

unit = st.floats(min_value=0.0, max_value=1.0)

ATTENTIVE = Confidences(c_sm=0.1, c_eye=0.9, c_fluc=0.9)
DISTRACTED = Confidences(c_sm=0.9, c_eye=0.1, c_fluc=0.3)


def _registry(dynamics=None) -> TrustRegistry:
    return TrustRegistry(TraitWeights(), dynamics or TrustDynamicsParams(), TraitParams())


# ========================================================================
# scalar functions


@enforce_types
def test_saturate():
    assert saturate(1.3, 0.0, 1.0) == 1.0
    assert saturate(-0.2, 0.0, 1.0) == 0.0
    assert saturate(0.5, 0.0, 1.0) == 0.5
    assert saturate(0.5, 0.5, 0.5) == 0.5
    with pytest.raises(InvalidBoundsError):
        saturate(0.5, 1.0, 0.0)


@enforce_types
def test_totalScore():
    w = TraitWeights(rho=(0.4, 0.5, 0.1))
    assert totalScore((1.0, 1.0, 1.0), w) == pytest.approx(1.0)
    assert totalScore((0.0, 0.0, 0.0), w) == 0.0
    assert totalScore((1.0, 0.0, 0.5), w) == pytest.approx(0.45)

    with pytest.raises(DomainError):
        totalScore((1.2, 0.0, 0.0), w)
    with pytest.raises(InvalidWeightsError):
        totalScore((0.1, 0.2), w)


@enforce_types
def test_traitWeights_validation():
    TraitWeights(rho=(1.0, 0.0, 0.0))
    with pytest.raises(InvalidWeightsError):  # sum != 1
        TraitWeights(rho=(0.4, 0.4, 0.1))
    with pytest.raises(InvalidWeightsError):  # negative
        TraitWeights(rho=(1.2, -0.1, -0.1))
    with pytest.raises(InvalidWeightsError):  # wrong length
        TraitWeights(rho=(0.5, 0.5))


@enforce_types
def test_params_validation():
    with pytest.raises(ParameterError):
        TrustDynamicsParams(alpha=1.1)
    with pytest.raises(ParameterError):
        TrustDynamicsParams(beta=-0.1)
    with pytest.raises(ParameterError):
        TrustDynamicsParams(beta0=0.0)
    with pytest.raises(ParameterError):
        TraitParams(nu1=0.0)
    with pytest.raises(ParameterError):
        TraitParams(nu03=1.5)


@enforce_types
def test_initTrust_and_updateTrust():
    P = TrustDynamicsParams(alpha=1.0, beta=0.08, beta0=0.55)
    assert initTrust(1.0, P) == pytest.approx(0.55)
    assert updateTrust(0.5, 1.0, P) == pytest.approx(0.58)
    assert updateTrust(0.99, 1.0, P) == 1.0  # saturates
    with pytest.raises(DomainError):
        updateTrust(1.5, 0.5, P)
    with pytest.raises(DomainError):
        initTrust(-0.1, P)


@enforce_types
def test_traitUpdates():
    P = TraitParams(nu1=0.6, nu2=0.1, nu3=0.8, nu01=1.0, nu02=1.0, nu03=0.5)

    # smartphone: inverse relation
    assert updateSmartphoneTrait(0.0, 0.2, P, True) == pytest.approx(0.8)
    assert updateSmartphoneTrait(0.5, 1.0, P, False) == pytest.approx(0.3)

    # eye: accumulates
    assert updateEyeTrait(0.0, 0.7, P, True) == pytest.approx(0.7)
    assert updateEyeTrait(0.5, 1.0, P, False) == pytest.approx(0.6)
    assert updateEyeTrait(0.95, 1.0, P, False) == 1.0

    # pose: first observation ignores c_fluc
    assert updatePoseTrait(0.0, 0.0, P, True) == pytest.approx(0.5)
    assert updatePoseTrait(0.5, 1.0, P, False) == pytest.approx(0.6)

    with pytest.raises(DomainError):
        updateEyeTrait(0.5, 1.1, P, False)


@given(s=unit, c=unit)
def test_traitUpdates_stayInUnit(s, c):
    P = TraitParams()
    for first in (True, False):
        assert 0.0 <= updateSmartphoneTrait(s, c, P, first) <= 1.0
        assert 0.0 <= updateEyeTrait(s, c, P, first) <= 1.0
        assert 0.0 <= updatePoseTrait(s, c, P, first) <= 1.0


# ========================================================================
# registry


@enforce_types
def test_registry_firstObservation():
    reg = _registry()
    rec = reg.observe("p", Confidences(c_sm=0.0, c_eye=1.0), 0)
    # s = (1, 1, 0.5) -> S = 0.4 + 0.5 + 0.05
    assert (rec.s1, rec.s2, rec.s3) == pytest.approx((1.0, 1.0, 0.5))
    assert rec.total_score == pytest.approx(0.95)
    assert rec.trust == pytest.approx(0.55 * 0.95)
    assert rec.last_observed_step == 0
    assert rec.initialized
    assert "p" in reg and len(reg) == 1
    assert reg.trust("p") == rec.trust
    assert reg.trust("nobody") is None


@enforce_types
def test_registry_laterObservation():
    reg = _registry()
    rec0 = reg.observe("p", Confidences(c_sm=0.0, c_eye=1.0), 0)
    rec1 = reg.observe("p", Confidences(c_sm=0.0, c_eye=1.0, c_fluc=1.0), 1)
    # s1: 0.6*1 + 0.4*1 = 1; s2: min(1, 1 + 0.1) = 1; s3: 0.8*0.5 + 0.2*1 = 0.6
    assert rec1.s3 == pytest.approx(0.6)
    S = 0.4 + 0.5 + 0.1 * 0.6
    assert rec1.total_score == pytest.approx(S)
    assert rec1.trust == pytest.approx(rec0.trust + 0.08 * S)


@enforce_types
def test_registry_errors():
    reg = _registry()
    reg.observe("p", ATTENTIVE, 3)
    with pytest.raises(OrderingError):
        reg.observe("p", ATTENTIVE, 3)
    with pytest.raises(OrderingError):
        reg.observe("p", ATTENTIVE, 2)
    with pytest.raises(DomainError):  # later steps need c_fluc
        reg.observe("p", Confidences(c_sm=0.1, c_eye=0.9), 4)
    with pytest.raises(DomainError):
        reg.observe("q", Confidences(c_sm=1.2, c_eye=0.9), 0)
    assert "q" not in reg


@enforce_types
def test_registry_unobservedKeepsTrust():
    reg = _registry()
    reg.observe("a", ATTENTIVE, 0)
    reg.observe("b", DISTRACTED, 0)
    tau_b = reg.trust("b")
    reg.observe("a", ATTENTIVE, 5)
    assert reg.trust("b") == tau_b

    snap = reg.snapshot()
    reg.observe("b", DISTRACTED, 6)
    assert snap["b"].trust == tau_b  # snapshot is a copy
    assert "TrustRegistry" in str(reg)


@enforce_types
def test_attentiveBeatsDistracted_after10Steps():
    reg = _registry()
    for step in range(10):
        reg.observe("attentive", ATTENTIVE, step)
        reg.observe("distracted", DISTRACTED, step)
    assert reg.trust("attentive") > reg.trust("distracted")


# ========================================================================
# randomized properties


@enforce_types
def test_randomSequences_stayInUnit_andMonotone():
    rng = np.random.default_rng(0)
    presets = dynamicsPresets()
    for trial in range(10000):
        name = ["monotone", "moving_average", "memoryless"][trial % 3]
        reg = _registry(presets[name])
        prev = None
        for step in range(int(rng.integers(1, 8))):
            c = rng.random(3)
            conf = Confidences(
                c_sm=float(c[0]),
                c_eye=float(c[1]),
                c_fluc=None if step == 0 else float(c[2]),
            )
            rec = reg.observe("p", conf, step)
            for v in (rec.s1, rec.s2, rec.s3, rec.total_score, rec.trust):
                assert 0.0 <= v <= 1.0
            if prev is not None:
                assert rec.s2 >= prev.s2  # eye trait only accumulates
                if name == "monotone":
                    assert rec.trust >= prev.trust
            prev = rec


def _randomStream(rng, n_steps: int):
    stream = []
    for step in range(n_steps):
        c = rng.random(3)
        c_fluc = None if step == 0 else float(c[2])
        stream.append(Confidences(c_sm=float(c[0]), c_eye=float(c[1]), c_fluc=c_fluc))
    return stream


@enforce_types
def test_observe_deterministic():
    rng = np.random.default_rng(5)
    stream = _randomStream(rng, 20)
    (reg1, reg2) = (_registry(), _registry())
    for step, conf in enumerate(stream):
        assert reg1.observe("p", conf, step) == reg2.observe("p", conf, step)


@enforce_types
def test_observe_interleavedIdsIndependent():
    rng = np.random.default_rng(6)
    streams = {ped_id: _randomStream(rng, 15) for ped_id in ["a", "b", "c"]}

    alone = {}
    for ped_id, stream in streams.items():
        reg = _registry()
        alone[ped_id] = [reg.observe(ped_id, conf, step) for step, conf in enumerate(stream)]

    # same streams, ids interleaved in a shuffled order each step
    reg = _registry()
    for step in range(15):
        for raw_id in rng.permutation(["a", "b", "c"]):
            ped_id = str(raw_id)
            rec = reg.observe(ped_id, streams[ped_id][step], step)
            assert rec == alone[ped_id][step]


@enforce_types
def test_movingAverage_converges():
    rng = np.random.default_rng(1)
    for _ in range(10000):
        alpha = float(rng.uniform(0.0, 0.99))
        P = TrustDynamicsParams(alpha=alpha, beta=1.0 - alpha, beta0=1.0)
        S = float(rng.random())
        tau = tau0 = float(rng.random())
        for t in range(1, 30):
            tau = updateTrust(tau, S, P)
            assert abs(tau - S) <= alpha**t * abs(tau0 - S) + 1e-12


# ========================================================================
# presets and trajectories


@enforce_types
def test_dynamicsPresets():
    presets = dynamicsPresets()
    assert sorted(presets) == ["memoryless", "monotone", "moving_average"]
    P = presets["moving_average"]
    assert P.alpha + P.beta == pytest.approx(1.0)
    assert presets["monotone"].alpha == 1.0


@enforce_types
def test_trustTrajectory():
    seq = [None, ATTENTIVE, ATTENTIVE, None, ATTENTIVE]
    tau = trustTrajectory(seq, TraitWeights(), TrustDynamicsParams(), TraitParams())
    assert len(tau) == 5
    assert tau[0] is None
    assert tau[1] is not None and tau[2] > tau[1]
    assert tau[3] == tau[2]  # unobserved: frozen
    assert tau[4] >= tau[3]


@enforce_types
def test_trustTrajectory_memoryless_tracksScore():
    P = dynamicsPresets()["memoryless"]
    seq = [ATTENTIVE, DISTRACTED, DISTRACTED]
    tau = trustTrajectory(seq, TraitWeights(), P, TraitParams())
    reg = _registry(P)
    reg.observe("p", ATTENTIVE, 0)
    assert tau[0] == pytest.approx(reg.get("p").total_score)
    assert tau[2] < tau[0]
