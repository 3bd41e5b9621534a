import csv

import pytest
from hypothesis import given, settings, strategies as st

from rcond.cli import RunConfig, build_parser, format_config, main, parse_config_text, resolve_config
from rcond.errors import ConfigurationError


def test_config_round_trip_defaults():
    cfg = RunConfig()
    assert RunConfig(**parse_config_text(format_config(cfg))) == cfg


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    lt=st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=5),
    sigma=st.floats(0.01, 2.0),
    use_lambda=st.booleans(),
)
def test_config_round_trip(seed, lt, sigma, use_lambda):
    kw = {"lambda_": tuple(v / 51 for v in sorted(lt))} if use_lambda else {"lambda_tilde": tuple(sorted(lt))}
    cfg = RunConfig(command="sweep", seed=seed, volatility_per_sqrt_year=sigma, **kw)
    assert RunConfig(**parse_config_text(format_config(cfg))) == cfg


@pytest.mark.parametrize("text,where", [
    ("x0 = 1\nbogus = 2\n", ":2:"),
    ("x0 1\n", ":1:"),
    ("n_paths = many\n", ":1:"),
    ("x0 = 1\nx0 = 2\n", ":2:"),
])
def test_parse_diagnostics(text, where):
    with pytest.raises(ConfigurationError, match=where):
        parse_config_text(text)


def test_lambda_inputs_exclusive():
    with pytest.raises(ConfigurationError):
        RunConfig(lambda_tilde=(1.0,), lambda_=(0.3,))
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--lambda", "0.1", "--lambda-tilde", "1"])


def test_flags_override_config(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("command = price\nseed = 3\nlambda = 0.2\n")
    args = build_parser().parse_args(["--config", str(p), "--seed", "9", "--lambda-tilde", "0.5"])
    cfg = resolve_config(args)
    assert cfg.seed == 9 and cfg.lambda_ is None and cfg.lambda_tilde == (0.5,)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_price_lambda_zero_equals_rn(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("n_paths = 2000\nlambda_tilde = 0\n")
    assert main(["--config", str(p), "--command", "price", "--out", str(tmp_path / "o")]) == 0
    (row,) = _rows(tmp_path / "o" / "report.csv")
    assert float(row["value_ra"]) == pytest.approx(float(row["value_rn"]), abs=1e-10)
    eff = (tmp_path / "o" / "effective_config.txt").read_text()
    assert RunConfig(**parse_config_text(eff)).n_paths == 2000


def test_sweep_outputs(tmp_path):
    out = tmp_path / "o"
    lts = ",".join(str(0.2 * k) for k in range(11))
    assert main(["--command", "sweep", "--out", str(out), "--lambda-tilde", lts]) == 0
    rows = _rows(out / "table.csv")
    assert len(rows) == 11
    assert {"value_ra", "M_lambda", "mc_se"} <= set(rows[0])
    fig = _rows(out / "value_curve.csv")
    assert list(fig[0]) == ["lambda_tilde", "value_ra"]
    assert (out / "table.json").exists()


def test_sparse_demo(tmp_path):
    out = tmp_path / "o"
    assert main(["--command", "sparse-demo", "--out", str(out)]) == 0
    rows = _rows(out / "sparsity.csv")
    assert all(float(r["after"]) >= float(r["before"]) for r in rows)


def test_validate(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["--command", "validate", "--out", str(out)]) == 0
    assert "0 failed" in capsys.readouterr().out
    assert (out / "validation_summary.txt").read_text().startswith("passed = ")


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("bogus = 1\n")
    assert main(["--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["--config", str(tmp_path / "missing.txt")]) == 2
    assert main(["--command", "price", "--lambda-tilde", "0.1,0.2", "--out", str(tmp_path / "o")]) == 2
    neg = tmp_path / "neg.txt"
    neg.write_text("volatility_per_sqrt_year = -1\n")
    assert main(["--config", str(neg), "--out", str(tmp_path / "o")]) == 2
    # d >= D is a domain error
    dom = tmp_path / "dom.txt"
    dom.write_text("command = sparse-demo\nsparse_d = 3\nsparse_dim = 3\nsparse_n_scenarios = 10\n")
    assert main(["--config", str(dom), "--out", str(tmp_path / "o")]) == 1
