from enforce_typing import enforce_types
from hypothesis import assume, given, strategies as st
import numpy as np
import pytest

from util.errors import DomainError, ParameterError
from util.safetycbf import (
    AgentState,
    CbfParams,
    agentState,
    barrier,
    barrierGradient,
    barrierVector,
    discreteCbfResidual,
    gammaFromTrust,
    inSafeSet,
)

unit = st.floats(min_value=0.0, max_value=1.0)


@enforce_types
def test_barrier():
    x_e, x_j = np.array([20.0, 5.0]), np.array([21.0, 25.0])
    assert barrier(x_e, x_j, 3.0) == pytest.approx(392.0)
    assert barrier(np.array([3.0, 0.0]), np.zeros(2), 3.0) == 0.0
    assert barrier(np.array([1.0, 0.0]), np.zeros(2), 3.0) == pytest.approx(-8.0)


@enforce_types
def test_barrierGradient():
    x_e, x_j = np.array([20.0, 5.0]), np.array([21.0, 25.0])
    assert barrierGradient(x_e, x_j) == pytest.approx([-2.0, -40.0])


@enforce_types
def test_barrierVector_and_inSafeSet():
    x_e = np.array([0.0, 0.0])
    peds = [agentState((3.0, 4.0)), agentState((0.0, 2.0))]
    assert barrierVector(x_e, peds, 3.0) == pytest.approx([16.0, -5.0])
    assert not inSafeSet(x_e, peds, 3.0)
    assert inSafeSet(x_e, peds[:1], 3.0)

    assert barrierVector(x_e, [], 3.0).shape == (0,)
    assert inSafeSet(x_e, [], 3.0)


@enforce_types
def test_agentState():
    s = agentState((1.0, 2.0), (0.5, 0.0))
    assert s.position.tolist() == [1.0, 2.0]
    assert "AgentState" in str(s)
    with pytest.raises(DomainError):
        AgentState(np.array([np.nan, 0.0]), np.zeros(2))
    with pytest.raises(AssertionError):
        AgentState(np.zeros(3), np.zeros(2))


@enforce_types
def test_cbfParams_validation():
    CbfParams(R=3.0, gamma_ini=0.03, delta=0.08, lambda_=1.5)
    with pytest.raises(ParameterError, match="gamma_ini \\+ delta must be <= 1"):
        CbfParams(R=3.0, gamma_ini=0.5, delta=0.6, lambda_=1.5)
    with pytest.raises(ParameterError):
        CbfParams(R=0.0)
    with pytest.raises(ParameterError):
        CbfParams(gamma_ini=-0.01)
    with pytest.raises(ParameterError):
        CbfParams(delta=-0.01)
    with pytest.raises(ParameterError):
        CbfParams(lambda_=0.5)
    for name in ["R", "gamma_ini", "delta", "lambda_"]:
        with pytest.raises(ParameterError, match=f"{name} must be finite"):
            CbfParams(**{name: float("nan")})
    with pytest.raises(ParameterError, match="must be finite"):
        CbfParams(lambda_=float("inf"))


@enforce_types
def test_gammaFromTrust():
    P = CbfParams(R=3.0, gamma_ini=0.03, delta=0.08, lambda_=1.5)
    assert gammaFromTrust(0.0, P) == pytest.approx(0.03)
    assert gammaFromTrust(1.0, P) == pytest.approx(0.11)
    assert gammaFromTrust(0.25, P) == pytest.approx(0.03 + 0.08 * 0.125)
    with pytest.raises(DomainError):
        gammaFromTrust(1.2, P)
    with pytest.raises(DomainError):
        gammaFromTrust(-0.1, P)


@enforce_types
def test_discreteCbfResidual():
    assert discreteCbfResidual(90.0, 100.0, 0.1) == pytest.approx(0.0)
    assert discreteCbfResidual(95.0, 100.0, 0.1) == pytest.approx(5.0)
    assert discreteCbfResidual(80.0, 100.0, 0.1) == pytest.approx(-10.0)


@given(g0=unit, d=unit, lam=st.floats(min_value=1.0, max_value=10.0), t1=unit, t2=unit)
def test_gammaFromTrust_inUnit_andMonotone(g0, d, lam, t1, t2):
    assume(g0 + d <= 1.0)
    P = CbfParams(R=1.0, gamma_ini=g0, delta=d, lambda_=lam)
    lo, hi = sorted([t1, t2])
    gamma_lo, gamma_hi = gammaFromTrust(lo, P), gammaFromTrust(hi, P)
    assert 0.0 <= gamma_lo <= gamma_hi <= 1.0


@enforce_types
def test_cbfCondition_keepsBarrierNonnegative():
    rng = np.random.default_rng(2)
    (accepted, rejected) = (0, 0)
    for _ in range(10000):
        gamma = float(rng.random())
        h = float(rng.uniform(0.0, 100.0))
        for _ in range(20):
            h_next = float(rng.uniform(-h - 1.0, 2.0 * h + 1.0))
            if discreteCbfResidual(h_next, h, gamma) < 0.0:
                rejected += 1
                continue
            accepted += 1
            assert h_next >= 0.0
            h = h_next
    assert accepted > 0 and rejected > 0


@enforce_types
def test_discreteCbfResidual_extremeGammas():
    assert discreteCbfResidual(0.0, 42.0, 1.0) == 0.0  # fully aggressive: boundary allowed
    assert discreteCbfResidual(42.0, 42.0, 0.0) == 0.0  # fully conservative: no decrease


coord = st.floats(min_value=-100.0, max_value=100.0)


@given(ax=coord, ay=coord, bx=coord, by=coord)
def test_barrier_symmetric(ax, ay, bx, by):
    a, b = np.array([ax, ay]), np.array([bx, by])
    assert barrier(a, b, 3.0) == barrier(b, a, 3.0)
