import math

import numpy as np
import pytest

import phaseflow as pf


def test_presets_and_config_round_trip():
    assert "ellipse" in pf.preset_names()
    c = pf.preset("ellipse")
    assert c["physics.mobility"] == "0.5"
    c.set("physics.mobility", 0.25)
    c.level = 4
    back = pf.parse_config(c.dump())
    assert back["physics.mobility"] == "0.25"
    assert back.level == 4
    assert pf.parse_config(back.dump()).dump() == back.dump()


def test_config_errors():
    with pytest.raises(pf.ConfigError):
        pf.parse_config("physics.delta = -1\n")
    with pytest.raises(pf.ConfigError):
        pf.preset("nope")
    with pytest.raises(pf.PhaseflowError):
        pf.parse_config("bogus.key = 1\n")


def test_flux_and_timestep_rule():
    assert pf.eo_flux(2.0, 1.0, -1.0, 0.5) == 1.0
    assert pf.eo_flux(-2.0, 1.0, -1.0, 0.5) == 1.0
    assert pf.timestep_from_estimator(0.0625, 3.0) == 5.625e-3
    assert pf.timestep_from_estimator(0.0625, 1e9) == 5.625e-7
    assert pf.mark_indicator([0.0, 2.0, 10.0], 0.1, 0.2) == [2, 1, 1]
    assert pf.double_well(1.0) == 0.0


def test_structured_mesh():
    v, t = pf.structured_mesh(-1, -1, 1, 1, 4)
    assert v.shape == (25, 2)
    assert t.shape == (32, 3)
    assert t.max() == 24


def test_simulation_steps_satisfy_the_energy_inequality():
    c = pf.preset("ellipse")
    c.level = 4
    c["discretization.convection"] = "fe"
    c["solver.max_inner"] = "300"
    sim = pf.Simulation(c)
    e0 = sim.energy()["E_total"]
    m0 = sim.mass
    for _ in range(3):
        rec = sim.step()
        assert rec["audit"]["pass"]
        assert rec["divergence_residual"] <= 1e-9
    assert sim.steps == 3
    assert sim.energy()["E_total"] < e0
    assert abs(sim.mass - m0) <= 1e-12
    assert sim.phi.shape == (sim.vertices.shape[0],)
    assert sim.velocity.shape == sim.vertices.shape
    assert np.all(np.isfinite(sim.p))


def test_run_returns_energy_table(tmp_path):
    c = pf.preset("ellipse")
    c.level = 4
    c.max_steps = 4
    c["output.directory"] = str(tmp_path)
    out = pf.run(c, write_files=True)
    assert out["steps"] == 4
    assert out["audit_failures"] == 0
    assert out["ledger_pass"]
    assert out["energy"]["E_total"].shape == (4,)
    assert np.all(np.diff(out["energy"]["E_total"]) <= 0)
    assert (tmp_path / "energy.csv").exists()
    assert any(f.endswith(".vtk") for f in out["files"])
    assert math.isclose(out["phi"].max(), 1.0, abs_tol=0.1)
