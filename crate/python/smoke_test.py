"""Smoke test for the pyfracfv extension module."""

import json
import tempfile
from pathlib import Path

import pyfracfv as ff


def main():
    assert "1.3" in ff.CASES

    k = ff.PermeabilityTensor.rotated_2d(5.0, 1.0, 0.3)
    assert sorted(round(v, 12) for v in k.eigenvalues()) == [1.0, 5.0]

    # Schur complement of a 3x3 system against the hand value
    a = [[4.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 4.0]]
    m, rhs = ff.schur_complement(a, [1.0, 2.0, 3.0], [1])
    assert abs(m[0][0] - (4.0 - 0.25)) < 1e-14
    assert abs(m[0][1] + 0.25) < 1e-14
    assert abs(rhs[0] - 1.5) < 1e-14
    assert abs(ff.condition_number([[10.0, 0.0], [0.0, 1.0]]) - 10.0) < 1e-12
    x = ff.direct_solve(a, [3.0, 2.0, 3.0])
    assert max(abs(v - 1.0) for v in x) < 1e-14

    full = ff.run_case("1.3", resolution=4)
    schur = ff.run_case("1.3", resolution=4, elim="schur")
    assert schur.solved_dofs < full.dofs
    assert schur.errors()[("pressure", "kept")] <= 1e-12
    assert schur.condition_ratio > 1.0
    assert len(schur.series) == 201 and schur.tracer is not None

    lin = ff.run_case("1.1", resolution=8)
    for p, (x, _, _) in zip(lin.pressure, lin.centres()):
        assert abs(p - (1.0 - x)) < 1e-12

    report = json.loads(schur.report_json())
    assert report["norm_version"] == ff.NORM_VERSION
    with tempfile.TemporaryDirectory() as d:
        schur.write(d)
        assert (Path(d) / "pressure.vtk").exists()

    try:
        ff.run_case("1.1", overrides={"bogus": 1.0})
    except ValueError:
        pass
    else:
        raise AssertionError("unknown override accepted")

    print("pyfracfv", ff.__version__, ff.BUILD, "ok")


if __name__ == "__main__":
    main()
