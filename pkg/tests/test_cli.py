import json
import time

import pytest

from spinmr.cli import (
    EXIT_FORMULA_MISMATCH,
    EXIT_INVALID_PARAMS,
    EXIT_OK,
    SWEEP_CSV_HEADER,
    _config_from_args,
    build_parser,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_evaluate_text(capsys):
    code, out, err = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0.5", "--gamma", "0")
    assert code == EXIT_OK and err == ""
    values = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(values["lgi_violation"]) == pytest.approx(0.2504, abs=1e-3)
    assert float(values["k_wlgi"]) == pytest.approx(0.1410, abs=1e-3)
    assert float(values["k_nsit"]) == pytest.approx(0.1569, abs=1e-3)


def test_evaluate_json(capsys):
    code, out, _ = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0.5",
                       "--gamma", "0", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload[0]["two_j"] == 30
    assert payload[0]["lambda"] == 0.5
    assert payload[0]["k_lgi"] == pytest.approx(1.2504, abs=1e-3)


def test_evaluate_j_sugar(capsys):
    code_a, out_a, _ = run(capsys, "evaluate", "--j", "15", "--lambda", "0.5")
    code_b, out_b, _ = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0.5")
    assert code_a == code_b == EXIT_OK
    assert out_a == out_b


def test_evaluate_zero_sharpness_nsit(capsys):
    code, out, _ = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0", "--gamma", "0")
    values = dict(line.split(" = ") for line in out.strip().splitlines())
    assert code == EXIT_OK
    assert abs(float(values["k_nsit"])) <= 1e-12


def test_evaluate_invalid_params_exit_code(capsys):
    code, out, err = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0.9",
                         "--gamma", "0.05")
    assert code == EXIT_INVALID_PARAMS
    assert out == ""
    assert err.startswith("error: invalid-params:")
    assert "exceeds 1 - j*gamma = 0.25" in err


def test_gamma_ceiling_enforced_at_parse(capsys):
    code, _, err = run(capsys, "evaluate", "--two-j", "30", "--lambda", "0.1",
                       "--gamma", "0.07")
    assert code == EXIT_INVALID_PARAMS
    assert "1/j" in err


def test_threshold_text(capsys):
    code, out, _ = run(capsys, "threshold", "--two-j", "30", "--gamma", "0",
                       "--condition", "lgi")
    assert code == EXIT_OK
    value = float(out.split("lambda_th = ")[1].split()[0])
    assert value == pytest.approx(0.29, abs=0.01)


def test_threshold_all_csv(capsys):
    code, out, _ = run(capsys, "threshold", "--two-j", "30", "--gamma", "0",
                       "--condition", "all", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "condition,two_j,gamma,lambda_th,persists_to_zero,status"
    assert len(lines) == 4
    nsit_row = next(line for line in lines if line.startswith("nsit"))
    assert ",true,ok" in nsit_row and ",0," in nsit_row


def test_sweep_csv_schema_and_monotonicity(capsys):
    code, out, _ = run(capsys, "sweep", "--two-j", "40", "--lambda", "0.5",
                       "--gamma-grid", "0:0.025:26")
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == SWEEP_CSV_HEADER
    assert len(lines) == 27
    violations = [float(line.split(",")[4]) for line in lines[1:]]
    assert violations == sorted(violations)


def test_sweep_byte_identical_across_runs_and_threads(capsys):
    args = ("sweep", "--two-j", "30", "--lambda", "0.5", "--gamma-grid", "0:0.03:9")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    _, threaded, _ = run(capsys, *args, "--threads", "3")
    assert first == second == threaded


def test_sweep_grid_comma_list(capsys):
    code, out, _ = run(capsys, "sweep", "--two-j", "30", "--lambda", "0.5",
                       "--gamma-grid", "0,0.01,0.02", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert [row["gamma"] for row in payload] == [0.0, 0.01, 0.02]


def test_sweep_invalid_grid_point(capsys):
    code, _, err = run(capsys, "sweep", "--two-j", "30", "--lambda", "0.5",
                       "--gamma-grid", "0,0.2")
    assert code == EXIT_INVALID_PARAMS
    assert "grid point 1" in err


def test_sweep_to_file(tmp_path, capsys):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--two-j", "30", "--lambda", "0.5",
                       "--gamma-grid", "0:0.02:3", "--out", str(target))
    assert code == EXIT_OK and out == ""
    content = target.read_bytes()
    assert b"\r" not in content
    assert content.decode().startswith(SWEEP_CSV_HEADER)


def test_reproduce_table3_csv(capsys):
    code, out, _ = run(capsys, "reproduce", "--table", "3", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert len(lines) == 28
    flags = [line.rsplit(",", 1)[1] for line in lines[1:]]
    assert flags.count("true") == 26
    assert flags.count("false") == 1


def test_reproduce_table3_text_flags_loudly(capsys):
    code, out, _ = run(capsys, "reproduce", "--table", "3")
    assert code == EXIT_OK
    assert "WARNING" in out
    assert "[OUT]" in out


def test_validate_formulas_completes_quickly(capsys):
    start = time.perf_counter()
    code, out, _ = run(capsys, "validate-formulas")
    elapsed = time.perf_counter() - start
    assert code == EXIT_OK
    assert elapsed < 10.0
    assert "bracket reading" in out
    assert "% of points match" in out


def test_validate_formulas_strict_exit_code(capsys):
    code, out, _ = run(capsys, "validate-formulas", "--strict")
    assert code == EXIT_FORMULA_MISMATCH
    assert "MISMATCH" in out


def test_validate_formulas_byte_identical(capsys):
    _, first, _ = run(capsys, "validate-formulas", "--format", "csv")
    _, second, _ = run(capsys, "validate-formulas", "--format", "csv")
    assert first == second


def test_config_round_trip():
    parser = build_parser()
    argv = ["sweep", "--two-j", "40", "--lambda", "0.5",
            "--gamma-grid", "0:0.025:26", "--threads", "2"]
    config = _config_from_args(parser.parse_args(argv))
    rebuilt = ["sweep", "--two-j", str(config.two_j), "--lambda", repr(config.sharpness),
               "--gamma-grid", ",".join(repr(g) for g in config.bias_grid),
               "--threads", str(config.threads), "--format", config.out_format]
    assert _config_from_args(parser.parse_args(rebuilt)).canonical_dict() == \
        config.canonical_dict()


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2
