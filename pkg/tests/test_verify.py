from sgpdesign.schedule import greedy_color
from sgpdesign.verify import (
    check_chromatic,
    check_uniform_weights,
    check_schedules,
    designed_graphs,
    faulty_colorer,
    run_verify,
)


def test_quick_level_passes():
    results = run_verify("quick", seed=5)
    assert [r.name for r in results] == ["design_bound", "schedule_validity", "chromatic", "uniform_weights", "split_penalty", "pushsum"]
    assert all(r.passed for r in results), [r.failures[:3] for r in results]


def test_injected_fault_names_the_offending_pair():
    designs = list(designed_graphs(3, seed=0))
    res = check_schedules(designs, [], colorer=faulty_colorer)
    assert not res.passed
    assert any("conflicting pair" in msg for msg in res.failures)
    assert "FAIL schedule_validity" in res.line()
    assert check_schedules(designs, [], colorer=greedy_color).passed


def test_faulty_colorer_caught_by_chromatic_bounds():
    res = check_chromatic(30, 8, seed=1, colorer=lambda cg: faulty_colorer(cg))
    # merging two slots can undercut the exact optimum
    assert not res.passed


def test_grid_never_beats_uniform():
    res = check_uniform_weights(10, seed=2)
    assert res.passed and res.info["grid_best_delta"] <= 1 / 3
