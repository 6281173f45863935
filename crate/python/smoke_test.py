"""Smoke test for the qlocal_py extension module.

Builds nothing itself: expects `cargo build -p qlocal-py` (or --release)
to have produced the cdylib already. Copies it into a temp directory
under the importable name and exercises the binding surface.
"""

import json
import math
import pathlib
import shutil
import sys
import tempfile

REPO = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib():
    candidates = [
        REPO / "target" / "release" / "libqlocal_py.so",
        REPO / "target" / "debug" / "libqlocal_py.so",
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("libqlocal_py.so not found; run `cargo build -p qlocal-py` first")


def main():
    workdir = tempfile.mkdtemp(prefix="qlocal_py_")
    shutil.copy(locate_cdylib(), pathlib.Path(workdir) / "qlocal_py.so")
    sys.path.insert(0, workdir)
    import qlocal_py

    assert math.isclose(qlocal_py.QUANTUM_CHSH_BOUND, 2.0 * math.sqrt(2.0))
    assert qlocal_py.CLASSICAL_CHSH_BOUND == 2.0

    singlet = (REPO / "crates" / "core" / "examples" / "singlet_canonical.json").read_text()
    scenario = qlocal_py.Scenario.from_json(singlet)
    assert scenario.is_fully_sharp()
    assert abs(scenario.chsh() - 2.0 * math.sqrt(2.0)) <= 1e-9
    e00, e01, e10, e11 = scenario.quadruple()
    assert abs(e00 + e01 + e10 - e11 - scenario.chsh()) <= 1e-12
    x, y = scenario.point()
    assert abs(math.hypot(x, y) - 2.0) <= 1e-9
    assert scenario.landau_residual() <= 1e-9
    satisfied, deviation = scenario.no_signaling()
    assert satisfied and deviation <= 1e-9
    assert not scenario.lhv_member()
    reports = json.loads(scenario.reports_json())
    assert [r["name"] for r in reports] == ["bell", "cirelson", "circle"]
    assert not reports[0]["satisfied"]
    assert reports[1]["satisfied"] and reports[2]["satisfied"]

    try:
        qlocal_py.Scenario.from_json("{not json")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON must raise ValueError")

    noncommuting = (REPO / "crates" / "core" / "examples" / "noncommuting_joint.json").read_text()
    try:
        qlocal_py.Scenario.from_json(noncommuting)
    except ValueError as err:
        assert "commute" in str(err)
    else:
        raise AssertionError("non-commuting wings must raise ValueError")

    assert qlocal_py.pr_correlation(0.0) == 1.0
    assert qlocal_py.pr_correlation(math.pi) == -1.0
    assert qlocal_py.pr_canonical_chsh() == 4.0
    quad = qlocal_py.pr_quadruple(0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
    assert quad == (1.0, 1.0, 1.0, -1.0)

    sample = json.loads(qlocal_py.pr_sample_json(math.pi / 3, 50_000, 7))
    assert sum(sample["counts"]) == 50_000
    assert abs(sample["empirical_correlation"] - sample["exact_correlation"]) < 0.02
    assert qlocal_py.pr_sample_json(math.pi / 3, 50_000, 7) == qlocal_py.pr_sample_json(
        math.pi / 3, 50_000, 7
    )

    protocol = json.loads(qlocal_py.protocol_json())
    assert abs(protocol["chsh"] - 4.0) <= 1e-9
    assert protocol["invariant_procedure"] is False
    for side in ("alice_plus", "bob_plus"):
        for p in protocol["marginals"][side]:
            assert abs(p - 0.5) <= 1e-9

    member, detail = qlocal_py.lhv_membership(1.0, 0.0, 0.0, 0.0)
    weights = json.loads(detail)
    assert member and len(weights) == 16
    assert abs(sum(weights) - 1.0) <= 1e-9
    member, detail = qlocal_py.lhv_membership(*scenario.quadruple())
    facet = json.loads(detail)
    assert not member
    assert facet["violated_id"].startswith("chsh[")
    assert facet["value"] > facet["bound"]

    best, converged, evaluations, angles = qlocal_py.maximize_chsh(20_000, 1)
    assert converged and evaluations <= 20_000 and len(angles) == 8
    assert abs(best - 2.0 * math.sqrt(2.0)) <= 1e-6
    best, converged, x, y = qlocal_py.maximize_rotated(0.7, 20_000, 1)
    assert converged
    assert abs(best - 2.0) <= 1e-6
    assert abs(x * math.sin(0.7) + y * math.cos(0.7) - best) <= 1e-9

    print("smoke test passed")


if __name__ == "__main__":
    main()
