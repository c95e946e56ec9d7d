import numpy as np
import pytest

from nematic_walls.energy import energy_total
from nematic_walls.fields import Field, GridMismatchError
from nematic_walls.model import GridSpec, ToleranceSet
from nematic_walls.solver import (
    NoConvergenceError, apriori_amplitude, default_dt, default_initializers, gradient_flow_run,
    minimize_multistart, pde_residual, random_initializer, thomas_fermi_ansatz, wall_ansatz,
)


def test_energy_never_increases(coarse):
    cfg = coarse(a=1.0)
    seen = []
    gradient_flow_run(random_initializer(cfg), cfg, "random",
                      callback=lambda k, v: seen.append(energy_total(Field(cfg.grid, v.copy()), cfg).total))
    e = np.array(seen)
    assert np.all(np.diff(e) <= 1e-12 * np.maximum(1.0, np.abs(e[1:])))


def test_converged_state_solves_equation(coarse):
    cfg = coarse(a=2.1)
    res = gradient_flow_run(wall_ansatz(cfg), cfg, "wall")
    assert res.converged
    assert pde_residual(res.field, cfg) <= cfg.tolerances.residual_tol
    assert res.residual == pytest.approx(pde_residual(res.field, cfg))


def test_multistart_keeps_candidate_table(coarse):
    res = minimize_multistart(coarse(a=0.7))
    assert set(res.candidates) == {"tf_plus", "tf_minus", "wall", "zero", "random"}
    best = min(c["energy"] for c in res.candidates.values() if c["converged"])
    assert res.energy.total == pytest.approx(best, rel=1e-10)


def test_mirror_branches_tie_to_first_label(coarse):
    res = minimize_multistart(coarse(a=0.0))
    # u and -u are both minimizers at a = 0
    c = res.candidates
    assert c["tf_plus"]["energy"] == pytest.approx(c["tf_minus"]["energy"], rel=1e-12)
    assert res.initializer_label == "tf_plus"


@pytest.mark.parametrize("a", [0.0, 0.7, 2.1])
def test_x2_reflection_symmetry_preserved(coarse, a):
    cfg = coarse(a=a)
    for label, init in default_initializers(cfg).items():
        if label == "random":
            continue
        v = gradient_flow_run(init, cfg, label).field.values
        assert np.max(np.abs(v - v[:, ::-1])) <= 1e-12, label


def test_nonconvergence_reports_best(coarse):
    cfg = coarse(a=2.1).with_(tolerances=ToleranceSet(dt=1.0, max_steps=3))
    with pytest.raises(NoConvergenceError) as info:
        minimize_multistart(cfg)
    assert info.value.best is not None
    assert not info.value.best.converged


def test_grid_mismatch(coarse):
    with pytest.raises(GridMismatchError):
        gradient_flow_run(Field.zeros(GridSpec(2.0, 41, 41)), coarse(), "x")


def test_deterministic(coarse):
    cfg = coarse(a=1.0)
    a = gradient_flow_run(random_initializer(cfg, 7), cfg, "r").field.values
    b = gradient_flow_run(random_initializer(cfg, 7), cfg, "r").field.values
    assert np.array_equal(a, b)


def test_default_dt_and_bound(coarse):
    cfg = coarse()
    h = cfg.grid.spacing
    assert default_dt(cfg) == pytest.approx(min(1.0, 0.5 * h * h / cfg.epsilon**2))
    tf = thomas_fermi_ansatz(cfg)
    assert np.max(np.abs(tf.values)) <= apriori_amplitude(cfg) + 1e-12
