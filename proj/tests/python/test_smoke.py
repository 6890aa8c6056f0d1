import pytest

import msprp


def test_presets_and_generate():
    assert "msprp10" in msprp.presets()
    a = msprp.generate("msprp10", skus=3, seed=4)
    b = msprp.generate("msprp10", skus=3, seed=4)
    assert a.to_json() == b.to_json()
    assert a.num_skus == 3
    assert a.num_agents >= 1


def test_json_round_trip():
    inst = msprp.generate("msprp10", seed=2)
    back = msprp.Instance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()
    with pytest.raises(msprp.ParseError):
        msprp.Instance.from_json("{ nope")


def test_solve_and_validate():
    inst = msprp.generate("msprp10", skus=3, seed=1)
    sol = msprp.solve(inst, samples=20, seed=3)
    report = msprp.validate(inst, sol)
    assert all(passed for passed, _ in report.values())
    again = msprp.solve(inst, samples=20, seed=3)
    assert again.objective == sol.objective
    greedy = msprp.solve(inst, mode="greedy")
    assert greedy.objective > 0
    back = msprp.Solution.from_json(sol.to_json())
    assert back.tours == sol.tours


def test_neural_policy(tmp_path):
    inst = msprp.generate("msprp10", seed=5)
    sol = msprp.solve(inst, policy="neural:random:7", seed=1)
    assert all(passed for passed, _ in msprp.validate(inst, sol).values())
    path = tmp_path / "w.bin"
    msprp.save_random_weights(str(path), seed=3)
    sol = msprp.solve(inst, policy="neural:" + str(path), seed=1)
    assert sol.objective > 0


def test_oracle_and_lp():
    inst = msprp.generate_custom(shelves=3, storage=4, skus=2, capacity=4, mean_supply=2.5, mean_demand=2.5, seed=3)
    best = msprp.brute_force(inst)
    sampled = msprp.solve(inst, samples=50, seed=0)
    assert best.objective <= sampled.objective + 1e-12
    assert msprp.export_lp(inst).startswith("\\")
    with pytest.raises(msprp.LimitError):
        msprp.export_lp(msprp.generate("msprp25", seed=0))
