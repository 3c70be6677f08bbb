import dataclasses
import math

import numpy as np
import pytest

from sgpdesign.design import design_graph
from sgpdesign.errors import NotStronglyConnected
from sgpdesign.theory import (
    MixingConstants,
    ProblemConstants,
    convergence_constants,
    scaling_ratio,
    epsilon_window,
    iteration_bound,
    predicted_total_slots,
)
from sgpdesign.topologies import windmill

UNIT = ProblemConstants(L=1.0, sigma2=0.0, zeta2=0.0, n=2, f0=0.0, f_star=0.0, x0_max_norm=1.0)


def test_constants_hand_values():
    C, q = convergence_constants(0.5, 2)
    assert C == pytest.approx(16, rel=1e-12)
    assert q == pytest.approx(math.sqrt(0.75), rel=1e-12)
    assert tuple(convergence_constants(1.0, 3)) == (4.0, 0.0)
    C, q = convergence_constants(1 / 3, 1)
    assert C == pytest.approx(12) and q == pytest.approx(2 / 3)


def test_constants_domain():
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            convergence_constants(bad, 1)
    with pytest.raises(ValueError):
        convergence_constants(0.5, 0)


def test_tiny_delta_stays_in_log_space():
    c = convergence_constants(1 / 61, 400)
    assert math.isinf(c.C)
    assert c.log_C == pytest.approx(math.log(4) + 400 * math.log(61))
    assert c.log_one_minus_q == pytest.approx(-400 * math.log(61) - math.log(400))
    # the small-p branch and the direct branch agree where both are accurate
    p_exact = convergence_constants(0.5, 60)
    assert p_exact.log_one_minus_q == pytest.approx(-60 * math.log(2) - math.log(60), rel=1e-9)


def test_iteration_bound_hand_value():
    b = iteration_bound(UNIT, convergence_constants(0.5, 2), 0.1)
    one_minus_q = 1 - math.sqrt(0.75)
    assert b.T_lower == pytest.approx(24 * 256 / (one_minus_q**2 * 0.1), rel=1e-9)
    assert f"{b.T_lower:.3e}" == "3.423e+06"
    assert b.log_T_lower == pytest.approx(math.log(b.T_lower))


def test_iteration_bound_scaling():
    c_q = convergence_constants(0.5, 2)
    t1 = iteration_bound(UNIT, c_q, 0.1).T_lower
    assert iteration_bound(UNIT, c_q, 0.2).T_lower == pytest.approx(t1 / 2)
    doubled = (2 * c_q.C, c_q.q)
    assert iteration_bound(UNIT, doubled, 0.1).T_lower == pytest.approx(4 * t1)
    with pytest.raises(ValueError):
        iteration_bound(UNIT, (16.0, 1.0), 0.1)
    with pytest.raises(ValueError):
        iteration_bound(UNIT, c_q, 0.0)


def test_four_term_maximum():
    pc = ProblemConstants(L=2.0, sigma2=0.5, zeta2=0.1, n=4, f0=3.0, f_star=1.0, x0_max_norm=2.0)
    c_q = convergence_constants(0.5, 2)
    b = iteration_bound(pc, c_q, 0.01)
    C, q = c_q
    A, S = pc.A, pc.S
    assert A == pytest.approx(2 * 3 - 2 * 1 + 2 * 0.5)
    assert S == pytest.approx(4 + 16 * 0.5 + 3 * 16 * 0.1)
    expected = (4, 18 * C**2 * 4 * 16 / (1 - q) ** 2, 16 * A**2 / (4 * 1e-4), 24 * 4 * C**2 * S / ((1 - q) ** 2 * 0.01))
    assert b.terms == pytest.approx(expected, rel=1e-9)
    assert b.T_required == pytest.approx(max(expected))


def test_epsilon_window_hand_value():
    w = epsilon_window(UNIT, convergence_constants(0.5, 2))
    assert w["lo"] == 0.0
    assert w["hi"] == pytest.approx(1 / 3)
    assert w["nonempty"] and not w["degenerate"]


def test_epsilon_window_large_c_and_single_node():
    pc = ProblemConstants(L=1.0, sigma2=0.1, zeta2=0.0, n=3, f0=2.0, f_star=0.0, x0_max_norm=1.0)
    lows = [epsilon_window(pc, convergence_constants(d, 5))["lo"] for d in (0.5, 0.2, 0.05)]
    assert lows[0] > lows[1] > lows[2]
    single = ProblemConstants(L=1.0, sigma2=0.0, zeta2=0.0, n=1, f0=1.0, f_star=0.0, x0_max_norm=1.0)
    assert epsilon_window(single, convergence_constants(0.5, 1))["degenerate"]


def test_problem_constant_validation():
    with pytest.raises(ValueError):
        ProblemConstants(L=0.0, sigma2=0, zeta2=0, n=2, f0=0, f_star=0, x0_max_norm=1)
    with pytest.raises(ValueError):
        ProblemConstants(L=1.0, sigma2=0, zeta2=0, n=2, f0=0, f_star=1, x0_max_norm=1)


def test_predicted_slots():
    r = design_graph(windmill(2, 6), 0)
    c_q = convergence_constants(r.delta, r.diameter)
    t = iteration_bound(UNIT, c_q, 0.1).T_lower
    assert predicted_total_slots(r, UNIT, 0.1) == pytest.approx(t * r.tau)
    doubled = dataclasses.replace(r, tau=2 * r.tau)
    assert predicted_total_slots(doubled, UNIT, 0.1) == pytest.approx(2 * t * r.tau)
    with pytest.raises(NotStronglyConnected):
        predicted_total_slots(dataclasses.replace(r, tau=0), UNIT, 0.1)


def test_scaling_band():
    ratios = [
        scaling_ratio(d, D, B)
        for d in np.geomspace(1e-3, 0.9, 15)
        for D in (1, 2, 5, 20, 100)
        for B in (1, 2, 4)
    ]
    assert max(ratios) / min(ratios) <= 4
    assert scaling_ratio(1e-3, 100, 4) == pytest.approx(16, rel=1e-6)


def test_mixing_constants_unpack():
    c = convergence_constants(0.5, 1)
    assert isinstance(c, MixingConstants)
    C, q = c
    assert (C, q) == (8.0, 0.5)
