import pytest

from uhlmann import validate


def test_quick_level_passes():
    results = validate.run("quick", seed=3)
    assert [r[0] for r in results][-1] == "isometry"
    assert all(ok for _, ok, _ in results), results


@pytest.mark.parametrize("shift", [1e-3, 1e-5])
def test_fault_is_detected(shift):
    results = dict((name, ok) for name, ok, _ in validate.run("quick", seed=0, fault=shift))
    assert not results["method_equivalence"]
    assert results["spin_algebra"] and results["isometry"]


def test_crash_is_reported(monkeypatch):
    def check_boom(ctx):
        raise RuntimeError("kaput")

    monkeypatch.setattr(validate, "QUICK", [check_boom])
    [(name, ok, detail), _] = validate.run("quick")
    assert name == "boom" and not ok
    assert "kaput" in detail


def test_full_level_passes():
    results = validate.run("full", seed=1)
    assert "sweep_grids" in [r[0] for r in results]
    assert all(ok for _, ok, _ in results), results
