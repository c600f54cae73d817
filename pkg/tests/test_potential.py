import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjwave import PotentialSpec, eval_potential, small_oscillation_frequency
from hjwave.action import ActionModel, omega_from_action
from hjwave.errors import DomainError


@pytest.mark.parametrize("g, x, value, grad", [(0.0, 2.0, 2.0, 2.0), (0.5, 1.0, 1.0, 3.0), (0.3, 0.0, 0.0, 0.0)])
def test_eval_potential_examples(g, x, value, grad):
    v, dv = eval_potential(PotentialSpec(1.0, 1.0, g), x)
    assert v == pytest.approx(value, abs=1e-15)
    assert dv == pytest.approx(grad, abs=1e-15)


def test_gradient_matches_central_difference():
    spec = PotentialSpec(1.3, 0.7, 0.4)
    x = np.linspace(-5, 5, 201)
    h = 1e-5
    fd = (spec.V(x + h) - spec.V(x - h)) / (2 * h)
    _, dv = eval_potential(spec, x)
    assert np.all(np.abs(fd - dv) <= 1e-8 * np.maximum(1.0, np.abs(dv)))


def test_parity_and_positivity():
    spec = PotentialSpec(2.0, 1.5, 0.25)
    x = np.linspace(0, 7, 300)
    v, dv = eval_potential(spec, x)
    vm, dvm = eval_potential(spec, -x)
    np.testing.assert_array_equal(v, vm)
    np.testing.assert_array_equal(dv, -dvm)
    assert np.all(v >= 0)


def test_c_and_curvature():
    assert PotentialSpec(1, 1, 0.5).c == 1.0
    assert PotentialSpec(2, 3, 0).c == 0.0
    assert PotentialSpec(2, 3, 0.1).curvature == pytest.approx(18.0)


@pytest.mark.parametrize("m, omega, g, expected", [(1, 1, 0.5, 1.0), (4, 0.5, 0, 0.5), (1, 2, 1, 2.0)])
def test_small_oscillation_frequency(m, omega, g, expected):
    assert small_oscillation_frequency(PotentialSpec(m, omega, g)) == expected


def test_frequency_matches_action_oracle():
    spec = PotentialSpec(1, 2, 1)
    assert abs(omega_from_action(ActionModel(spec)) - small_oscillation_frequency(spec)) <= 1e-6


@pytest.mark.parametrize("kwargs", [dict(m=0), dict(omega=-1), dict(g=-0.1), dict(m=math.nan), dict(dim="3")])
def test_invalid_spec(kwargs):
    base = dict(m=1.0, omega=1.0, g=0.0, dim="1")
    base.update(kwargs)
    with pytest.raises(ValueError):
        PotentialSpec(**base)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_potential(PotentialSpec(), math.inf)
    with pytest.raises(DomainError):
        eval_potential(PotentialSpec(dim="2-radial"), -0.5)


@given(st.floats(-50, 50), st.floats(0, 5))
def test_potential_even_property(x, g):
    spec = PotentialSpec(1.0, 1.0, g)
    assert spec.V(x) == spec.V(-x)
    assert spec.dV(x) == -spec.dV(-x)
