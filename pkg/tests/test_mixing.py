import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgpdesign.errors import AsymmetricInput
from sgpdesign.graphs import BaseTopology, Digraph
from sgpdesign.mixing import (
    MixingMatrix,
    metropolis_hastings,
    min_weight,
    spectral_gap_param,
    uniform_column_stochastic,
)
from sgpdesign.topologies import random_connected

CYCLE3 = Digraph(3, [(0, 1), (1, 2), (2, 0)])
STAR = BaseTopology(4, [(0, 1), (0, 2), (0, 3)])


def test_uniform_examples():
    w = uniform_column_stochastic(Digraph(3, [(0, 1), (0, 2)]))
    assert np.allclose(w.weights[:, 0], [1 / 3] * 3)
    empty = uniform_column_stochastic(Digraph(3, []))
    assert np.array_equal(empty.weights, np.eye(3)) and min_weight(empty) == 1.0
    w = uniform_column_stochastic(CYCLE3)
    assert w.column(0) == [(0, 0.5), (1, 0.5)]
    assert min_weight(w) == 0.5


def test_uniform_star_delta():
    assert min_weight(uniform_column_stochastic(STAR.as_digraph())) == 0.25


def test_metropolis_examples():
    k3 = metropolis_hastings(BaseTopology(3, [(0, 1), (1, 2), (0, 2)]))
    assert np.allclose(k3.weights, np.full((3, 3), 1 / 3))
    pair = metropolis_hastings(BaseTopology(2, [(0, 1)]))
    assert np.allclose(pair.weights, 0.5)
    star = metropolis_hastings(STAR)
    assert np.allclose(star.weights[0, 1:], 0.25)
    assert np.allclose(np.diag(star.weights)[1:], 0.75)
    assert star.is_symmetric() and star.is_column_stochastic()
    assert np.allclose(star.weights.sum(axis=1), 1)


def test_spectral_examples():
    n = 5
    assert spectral_gap_param(MixingMatrix(np.full((n, n), 1 / n), Digraph(n, []))) == pytest.approx(0, abs=1e-9)
    assert spectral_gap_param(MixingMatrix(np.eye(n), Digraph(n, []))) == pytest.approx(1)
    pair = metropolis_hastings(BaseTopology(2, [(0, 1)]))
    assert spectral_gap_param(pair) == pytest.approx(0, abs=1e-9)
    with pytest.raises(AsymmetricInput):
        spectral_gap_param(uniform_column_stochastic(CYCLE3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_spectral_matches_eigvalsh(seed):
    rng = np.random.default_rng(seed)
    base = random_connected(int(rng.integers(2, 15)), float(rng.uniform(0.2, 0.9)), seed)
    w = metropolis_hastings(base)
    ev = np.sort(np.linalg.eigvalsh(w.weights))
    expected = max(abs(ev[0]), abs(ev[-2])) if base.n > 1 else 0.0
    assert spectral_gap_param(w, tol=1e-13, max_iter=200_000) == pytest.approx(expected, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_uniform_is_column_stochastic_with_expected_delta(seed):
    rng = np.random.default_rng(seed)
    base = random_connected(int(rng.integers(2, 12)), float(rng.uniform(0.2, 0.9)), seed)
    g = Digraph(base.n, [e for e in base.links if rng.random() < 0.5])
    w = uniform_column_stochastic(g)
    assert w.is_column_stochastic()
    out_max = max(g.out_degree(j) for j in range(g.n))
    assert min_weight(w) == 1.0 / (out_max + 1)
    # support is exactly the links plus self-loops
    assert set(zip(*np.nonzero(w.weights))) == {(i, j) for j, i in g.links} | {(i, i) for i in range(g.n)}


def test_text_round_trip(tmp_path):
    w = uniform_column_stochastic(CYCLE3)
    w.write(tmp_path / "m.txt")
    again = MixingMatrix.from_text((tmp_path / "m.txt").read_text())
    assert np.array_equal(again.weights, w.weights)
    assert set(again.support.links) == set(CYCLE3.links)
