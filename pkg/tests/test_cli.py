"""End-to-end driver behaviour: exit codes, reports, determinism."""

import json

import pytest

from entrobench import cli

GOLDEN_MEAN = {"alphabet": ["0", "1"], "allowed": [[True, True], [True, False]]}
LADDER = {
    "kind": "acc", "target": "1/2", "side": "below", "ratio": "1/4",
    "window": "1/4", "body": {"kind": "points", "points": ["1/2"]},
}


def run(tmp_path, command, doc, *extra):
    inp = tmp_path / "input.json"
    inp.write_text(json.dumps(doc))
    out = tmp_path / "out"
    code = cli.main([command, "--input", str(inp), "--out", str(out), *extra])
    report = out / f"{command}.json"
    return code, (json.loads(report.read_text()) if report.exists() else None), out


class TestCommands:
    def test_cb_rank(self, tmp_path):
        code, rep, _ = run(tmp_path, "cb-rank", {"schema": "v1", "scheme": LADDER})
        assert code == 0
        assert rep["result"] == {
            "rank": 2, "core": {"kind": "points", "points": []}}
        assert rep["input"]["scheme"] == LADDER

    def test_cpe_verdict_examples(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]}}
        code, rep, _ = run(tmp_path, "cpe-verdict", doc)
        assert code == 0 and rep["result"] == {"verdict": "CPE", "rank": 1}

        doc = {"schema": "v1", "scheme": {"kind": "perfect", "lo": "1/4", "hi": "3/4"}}
        code, rep, _ = run(tmp_path, "cpe-verdict", doc)
        assert code == 0
        assert rep["result"]["verdict"] == "NotCPE"
        assert rep["result"]["witness"] == doc["scheme"]

    def test_gamma_rank_with_grid(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "grid_n": 64, "eps": "1/16"}
        code, rep, _ = run(tmp_path, "gamma-rank", doc)
        assert code == 0
        r = rep["result"]
        assert r["symbolic_rank"] == r["finite_rank"] == 1
        assert r["symbolic_full"] and r["finite_full"]
        assert len(r["pair_counts"]) == 2

    def test_psi_commands(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "depth": 2}
        code, rep, _ = run(tmp_path, "psi-build", doc)
        assert code == 0 and rep["result"]["laps"] == 5
        doc = dict(doc, n=3)
        doc["depth"] = 3
        code, rep, _ = run(tmp_path, "psi-entropy", doc)
        assert code == 0 and [r["n"] for r in rep["result"]["rows"]] == [1, 2, 3]

    def test_entropy_pairs(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]}}
        code, rep, _ = run(tmp_path, "entropy-pairs", doc)
        assert code == 0
        assert rep["result"]["base"] == doc["scheme"]
        assert not rep["result"]["is_full_square"]

    def test_ie_and_density_and_entropy(self, tmp_path):
        doc = {"schema": "v1", "sft": GOLDEN_MEAN, "U": "0", "V": "1",
               "r": "3/4", "l_max": 6}
        code, rep, _ = run(tmp_path, "ie-verdict", doc)
        assert code == 0
        assert rep["result"] == {
            "positive": False, "threshold": "3/4", "negative_at": 4}

        doc = {"schema": "v1", "sft": GOLDEN_MEAN, "U": "0", "V": "1", "n": 8}
        code, rep, out = run(tmp_path, "density-profile", doc, "--format", "csv")
        assert code == 0
        assert rep["result"]["rows"][-1] == [8, 4, "1/2"]
        assert (out / "density-profile.csv").read_text().splitlines()[-1] == "8,4,1/2"

        code, rep, _ = run(tmp_path, "sft-entropy", {"schema": "v1", "sft": GOLDEN_MEAN})
        assert code == 0
        assert abs(rep["result"]["entropy"] - 0.4812118250596034) < 1e-9

    def test_shadow_check_identity_grid_fails(self, tmp_path):
        doc = {"schema": "v1",
               "grid": {"kind": "line", "intervals": 10, "map": "identity"},
               "eps": "1/5", "delta": "1/10", "p": 10}
        code, rep, _ = run(tmp_path, "shadow-check", doc)
        assert code == 0
        assert rep["result"]["verdict"] == "fails"
        assert rep["result"]["witness"]["labels"] == "rational"
        assert len(rep["result"]["witness"]["seq"]) == 11

    def test_weave(self, tmp_path):
        doc = {"schema": "v1", "grid": {"kind": "sequence", "blocks": 3},
               "pattern": [1, 3, 1]}
        code, rep, _ = run(tmp_path, "weave", doc)
        assert code == 0
        assert rep["result"]["valid"] is True
        assert rep["result"]["pseudo_orbit"]["labels"] == "text"

    def test_construct_check(self, tmp_path):
        doc = {"schema": "v1", "model": {
            "scheme": LADDER, "L": ["1/4", "1/2"],
            "abstract_symbols": ["s0", "s1"], "tail_mode": "open"}}
        code, rep, _ = run(tmp_path, "construct-check", doc)
        assert code == 0
        assert rep["result"]["all_passed"] is True
        names = [c["check"] for c in rep["result"]["checks"]]
        assert "t-value-at-least-gap-end" in names

    def test_cross_validate(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "grid_n": 64, "eps": "1/16"}
        code, rep, _ = run(tmp_path, "cross-validate", doc)
        assert code == 0
        assert rep["result"]["agree"] is True
        assert rep["result"]["eps"] == "1/16"


class TestExitCodes:
    def test_unknown_command(self, tmp_path):
        code, rep, out = run(tmp_path, "frobnicate", {"schema": "v1"})
        assert code == 64 and rep is None
        err = json.loads((out.parent / "out" / "error.json").read_text())
        assert err["error"] == "unknown-command"

    def test_malformed_json(self, tmp_path):
        inp = tmp_path / "input.json"
        inp.write_text("{nope")
        code = cli.main(["cb-rank", "--input", str(inp), "--out", str(tmp_path)])
        assert code == 65
        assert json.loads((tmp_path / "error.json").read_text())["error"] == "malformed-json"

    def test_validation_failures(self, tmp_path):
        cases = [
            {"scheme": {"kind": "points", "points": []}},
            {"schema": "v1"},
            {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]}, "x": 1},
            {"schema": "v2", "scheme": {"kind": "points", "points": ["1/2"]}},
        ]
        for doc in cases:
            code, _, _ = run(tmp_path, "cb-rank", doc)
            assert code == 2

    def test_missing_input_file(self, tmp_path):
        code = cli.main(["cb-rank", "--input", str(tmp_path / "absent.json"),
                         "--out", str(tmp_path)])
        assert code == 2

    def test_resource_budget(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "grid_n": 5000, "eps": "1/16"}
        code, _, _ = run(tmp_path, "gamma-rank", doc)
        assert code == 3
        err = json.loads((tmp_path / "out" / "error.json").read_text())
        assert err["error"] == "resource"

    def test_format_without_table_or_chart(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]}}
        code, _, _ = run(tmp_path, "cpe-verdict", doc, "--format", "svg")
        assert code == 2
        code, _, _ = run(tmp_path, "gamma-rank", doc, "--format", "csv")
        assert code == 2


class TestDeterminismAndPlots:
    def test_reports_are_byte_identical(self, tmp_path):
        doc = {"schema": "v1", "sft": GOLDEN_MEAN, "U": "0", "V": "1", "n": 6}
        inp = tmp_path / "in.json"
        inp.write_text(json.dumps(doc))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert cli.main(["density-profile", "--input", str(inp),
                             "--out", str(out), "--format", "svg"]) == 0
            outs.append(out)
        for fname in ("density-profile.json", "density-profile.svg"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_cascade_chart(self, tmp_path):
        doc = {"schema": "v1", "scheme": LADDER}
        code, _, out = run(tmp_path, "cb-rank", doc, "--format", "svg")
        assert code == 0
        svg = (out / "cb-rank.svg").read_text()
        assert svg.startswith("<svg") and svg.count("level ") == 3

    def test_trace_chart(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "grid_n": 64, "eps": "1/16"}
        code, _, out = run(tmp_path, "gamma-rank", doc, "--format", "svg")
        assert code == 0
        assert (out / "gamma-rank.svg").read_text().startswith("<svg")

    def test_csv_formats(self, tmp_path):
        doc = {"schema": "v1", "scheme": {"kind": "points", "points": ["1/2"]},
               "depth": 2, "n": 2}
        code, _, out = run(tmp_path, "psi-entropy", doc, "--format", "csv")
        assert code == 0
        lines = (out / "psi-entropy.csv").read_text().splitlines()
        assert lines[0] == "n,laps,estimate" and len(lines) == 3

        doc = {"schema": "v1",
               "grid": {"kind": "line", "intervals": 10, "map": "identity"},
               "eps": "1/5", "delta": "1/10", "p": 10}
        code, _, out = run(tmp_path, "shadow-check", doc, "--format", "csv")
        assert code == 0
        assert (out / "shadow-check.csv").read_text().splitlines()[1] == "1/5,1/10,10,fails"
