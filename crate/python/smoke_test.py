"""Smoke test for the Python bindings.

Build the extension first:
    cargo build -p viscophase-py --release --features extension-module
    cp target/release/libviscophase_py.so python/viscophase_py.so
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import viscophase_py as vp


def main():
    cfg = vp.Config("grid.n = 16\ntime.dt = 1e-4\ntime.t_end = 2e-3\n")
    assert "grid.n = 16, 16" in cfg.emit()

    sim = vp.Simulation(cfg)
    first = sim.record()
    records = sim.run()
    assert len(records) == sim.steps == 20
    assert all(abs(r["mass"] - first["mass"]) < 1e-12 for r in records)
    assert all(b["e_total"] <= a["e_total"] + 1e-8 for a, b in zip([first] + records, records))
    assert len(sim.field("phi")) == 16 * 16 and sim.shape() == [16, 16]

    twin = vp.Simulation(cfg)
    twin.run()
    assert sim.relative_energy(twin)["e_total"] == 0.0

    t = [0.1 * k for k in range(11)]
    fit = vp.gronwall_fit(t, [1e-6 * math.exp(2.0 * s) for s in t], [0.0] * 11)
    assert fit["kind"] == "exponential" and abs(fit["c"] - 2.0) < 1e-9

    energies, rows = vp.galerkin_study(cfg, [4, 8], 0.1)
    assert [m for m, _ in energies] == [4, 8] and len(rows) == 1
    assert all(b <= a + 1e-12 for _, e in energies for a, b in zip(e, e[1:]))

    mat = vp.Material.degenerate(1e-3)
    assert mat.mobility(0.0) > 0.0 and mat.concavity_bound() == 1.0

    try:
        vp.Config("regularization.delta = 0.7")
    except ValueError as e:
        assert "(0, 1/2)" in str(e)
    else:
        raise AssertionError("bad delta accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
