"""Command-line interface: subcommands, documents, exit codes."""

import json
from dataclasses import replace

import pytest

import fixturelib as fx
import wasmdebloat
from wasmdebloat import decode, encode, validate_module
from wasmdebloat import opcodes as op
from wasmdebloat.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from wasmdebloat.documents import workload_to_document
from wasmdebloat.module import Instruction


def write_pair(tmp_path, module, workload, stem="m"):
    mod = tmp_path / f"{stem}.wasm"
    mod.write_bytes(encode(module))
    wlf = tmp_path / f"{stem}.workload.json"
    wlf.write_text(workload_to_document(workload), "utf-8")
    return str(mod), str(wlf)


def test_exit_code_constants():
    assert (EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_USAGE) == (0, 1, 2, 64)


def test_debloat_writes_module_and_report(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.calculator_module(), fx.CALCULATOR_WORKLOAD)
    out = tmp_path / "out.wasm"
    rep = tmp_path / "report.json"
    code = main(
        ["debloat", "--module", mod, "--workload", wlf,
         "--out", str(out), "--report", str(rep)]
    )
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    doc = json.loads(rep.read_text("utf-8"))
    assert doc["keepRatio"] == 40.0
    assert doc["validation"]["behavioralOk"] is True
    shrunk = decode(out.read_bytes())
    assert len(shrunk.functions) == 7
    assert validate_module(shrunk).ok


def test_debloat_report_defaults_to_stdout(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.calculator_module(), fx.CALCULATOR_WORKLOAD)
    out = tmp_path / "out.wasm"
    code = main(["debloat", "--module", mod, "--workload", wlf, "--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["removeRatio"] == 30.0


def test_missing_module_file(tmp_path, capsys):
    _, wlf = write_pair(tmp_path, fx.add_module(), fx.wl())
    code = main(
        ["debloat", "--module", str(tmp_path / "nope.wasm"),
         "--workload", wlf, "--out", str(tmp_path / "o.wasm")]
    )
    assert code == EXIT_INPUT
    assert "wasm-debloat: error:" in capsys.readouterr().err


def test_malformed_workload_document(tmp_path, capsys):
    mod, _ = write_pair(tmp_path, fx.add_module(), fx.wl())
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", "utf-8")
    code = main(
        ["debloat", "--module", mod, "--workload", str(bad),
         "--out", str(tmp_path / "o.wasm")]
    )
    assert code == EXIT_INPUT
    err = capsys.readouterr().err
    assert "wasm-debloat: error: line 1" in err


def test_unknown_export_in_workload(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.wl(fx.inv("nosuch")))
    code = main(
        ["debloat", "--module", mod, "--workload", wlf,
         "--out", str(tmp_path / "o.wasm")]
    )
    assert code == EXIT_INPUT
    assert "unknown function export: 'nosuch'" in capsys.readouterr().err


def test_trace_prints_entered_functions(tmp_path, capsys):
    mod, wlf = write_pair(
        tmp_path, fx.main_helper_module(), fx.wl(fx.inv("main"))
    )
    code = main(["trace", "--module", mod, "--workload", wlf])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"entered": [0, 1], "callTargets": [1], "tableObserved": []}


def test_trace_with_empty_workload(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.wl())
    code = main(["trace", "--module", mod, "--workload", wlf])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"entered": [], "callTargets": [], "tableObserved": []}


def test_trace_to_file(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.ADD_WORKLOAD)
    out = tmp_path / "trace.json"
    code = main(["trace", "--module", mod, "--workload", wlf, "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text("utf-8"))["entered"] == [0]


def test_trace_rejects_invalid_module(tmp_path, capsys):
    m = fx.add_module().with_(
        exports=(fx.Export("f", "func", 0), fx.Export("f", "func", 0))
    )
    mod, wlf = write_pair(tmp_path, m, fx.wl())
    code = main(["trace", "--module", mod, "--workload", wlf])
    assert code == EXIT_INPUT
    err = capsys.readouterr().err
    assert "module invalid at export[1]: duplicate export name 'f'" in err


def test_validate_identical_modules(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.ADD_WORKLOAD)
    code = main(
        ["validate", "--original", mod, "--debloated", mod, "--workload", wlf]
    )
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"syntacticOk": True, "behavioralOk": True, "mismatches": []}


def test_validate_reports_divergence(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.ADD_WORKLOAD)
    broken = fx.add_module().with_(
        functions=(
            replace(
                fx.add_module().functions[0],
                body=(Instruction(op.UNREACHABLE),),
            ),
        )
    )
    dbl = tmp_path / "broken.wasm"
    dbl.write_bytes(encode(broken))
    code = main(
        ["validate", "--original", mod, "--debloated", str(dbl), "--workload", wlf]
    )
    assert code == EXIT_VALIDATION
    doc = json.loads(capsys.readouterr().out)
    assert doc["behavioralOk"] is False
    assert doc["mismatches"] == [
        {
            "invocation": 0,
            "field": "outcome",
            "original": "Results[i32:5]",
            "debloated": "Trap(unreachable)",
        }
    ]


def test_stats_empty_module(tmp_path, capsys):
    mod = tmp_path / "empty.wasm"
    mod.write_bytes(fx.EMPTY_BYTES)
    code = main(["stats", "--module", str(mod)])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc == {
        "sectionSizes": {},
        "totalBytes": 8,
        "functionsImported": 0,
        "functionsDefined": 0,
    }


def test_stats_calculator(tmp_path, capsys):
    mod, _ = write_pair(tmp_path, fx.calculator_module(), fx.wl())
    code = main(["stats", "--module", str(mod)])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["functionsDefined"] == 10
    assert doc["functionsImported"] == 0
    assert "code" in doc["sectionSizes"]
    assert sum(doc["sectionSizes"].values()) + 8 == doc["totalBytes"]


def test_stats_rejects_garbage(tmp_path, capsys):
    mod = tmp_path / "junk.wasm"
    mod.write_bytes(b"\x00\x01\x02")
    code = main(["stats", "--module", str(mod)])
    assert code == EXIT_INPUT
    assert "wasm-debloat: error: malformed binary" in capsys.readouterr().err


def test_usage_errors_exit_64(capsys):
    for argv in ([], ["debloat"], ["bogus"], ["trace", "--module", "x"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE
        err = capsys.readouterr().err
        assert err.startswith("usage: wasm-debloat")
        assert ": error:" in err


def test_fail_on_behavior_change_clean_run(tmp_path, capsys):
    mod, wlf = write_pair(tmp_path, fx.calculator_module(), fx.CALCULATOR_WORKLOAD)
    code = main(
        ["debloat", "--module", mod, "--workload", wlf,
         "--out", str(tmp_path / "o.wasm"), "--fail-on-behavior-change"]
    )
    assert code == EXIT_OK


def test_fail_on_behavior_change_divergent_run(tmp_path, capsys, monkeypatch):
    from wasmdebloat.shrink import apply_plan as real

    def wrecked(m, plan):
        out = real(m, plan)
        funcs = list(out.functions)
        funcs[0] = replace(funcs[0], locals=(), body=(Instruction(op.UNREACHABLE),))
        return out.with_(functions=tuple(funcs))

    monkeypatch.setattr(wasmdebloat.pipeline, "apply_plan", wrecked)
    mod, wlf = write_pair(tmp_path, fx.add_module(), fx.ADD_WORKLOAD)
    out = tmp_path / "o.wasm"
    rep = tmp_path / "r.json"
    code = main(
        ["debloat", "--module", mod, "--workload", wlf, "--out", str(out),
         "--report", str(rep), "--fail-on-behavior-change"]
    )
    assert code == EXIT_VALIDATION
    assert "behavior changed: 1 mismatch(es)" in capsys.readouterr().err
    # artifact and report are still written for inspection
    assert out.exists()
    doc = json.loads(rep.read_text("utf-8"))
    assert doc["validation"]["behavioralOk"] is False
