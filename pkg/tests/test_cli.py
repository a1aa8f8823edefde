import csv
import io
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from fratio import cli
from fratio.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    main,
    parse_config,
    render_csv,
    run_scenario,
)
from fratio.errors import ConfigError, NonConvergenceError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

PDF_DOC = """
[scenario]
mode = pdf

[numerator]
count = 1
gamma_bar_db = 1
m = 5
m_s = 10

[denominator]
count = 1
gamma_bar_db = 1
m = 5
m_s = 10

[sweep]
variable = x
start = 0.1
stop = 10
points = 4
spacing = log
"""

FACTORS = {
    "pdf": ("numerator", "denominator"),
    "cdf": ("numerator", "denominator"),
    "mgf": ("numerator", "denominator"),
    "fit": ("numerator", "denominator"),
    "kstest": ("numerator", "denominator"),
    "secrecy": ("legit", "eaves"),
    "relay": ("first_hop", "second_hop", "self_interference"),
}

SWEEPS = {
    "pdf": "variable = x\nstart = 0.5\nstop = 2\npoints = 2",
    "cdf": "variable = x\nstart = 0.5\nstop = 2\npoints = 2",
    "mgf": "variable = s\nstart = 0.5\nstop = 2\npoints = 2",
    "secrecy": "variable = legit.gamma_bar_db\nstart = 0\nstop = 10\npoints = 2",
    "relay": "variable = first_hop.gamma_bar_db\nstart = 0\nstop = 10\npoints = 2",
}

GOLDEN_HEADERS = {
    "pdf": "x,exact_pdf,lognormal_pdf",
    "cdf": "x,exact_cdf,lognormal_cdf,mc_estimate,mc_stderr",
    "mgf": "s,exact_mgf,mc_estimate,mc_stderr",
    "fit": "epsilon,mu,sigma,kolmogorov_distance",
    "kstest": "repetition,epsilon,mu,sigma,statistic,critical,sample_size,accepted",
    "secrecy": "gammaD_db,sop_bound,sop_mc,sop_mc_stderr,sop_asymptotic,pnsc,pnsc_mc,"
               "pnsc_mc_stderr,sop_lognormal",
    "relay": "gammaAR_db,op_bound,op_mc,op_mc_stderr,op_asymptotic,second_hop_cdf,op_lognormal",
}


def small_doc(mode: str) -> str:
    parts = [f"[scenario]\nmode = {mode}\n"]
    for name in FACTORS[mode]:
        count = 1 if name == "self_interference" else 2
        parts.append(f"[{name}]\ncount = {count}\ngamma_bar_db = 1\nm = 5\nm_s = 10\n")
    if mode in SWEEPS:
        parts.append("[sweep]\n" + SWEEPS[mode] + "\n")
    parts.append("[montecarlo]\nn = 2000\nseed = 3\n")
    if mode == "kstest":
        parts.append("[kstest]\nsample_size = 500\nrepetitions = 2\n")
    return "\n".join(parts)


def write(tmp_path: Path, text: str, name: str = "scenario.ini") -> Path:
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def parse_csv(text: str):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def test_minimal_pdf_config():
    cfg = parse_config(PDF_DOC)
    assert cfg.mode == "pdf"
    assert len(cfg.sweep.values) == 4
    assert cfg.sweep.values[0] == pytest.approx(0.1) and cfg.sweep.values[-1] == pytest.approx(10.0)
    spec = cfg.ratio_spec()
    assert len(spec.numerator) == 1 and spec.numerator[0].m_s == 10.0


def test_ms_below_one_is_named():
    with pytest.raises(ConfigError, match=r"m_s.*exceed 1"):
        parse_config(PDF_DOC.replace("m_s = 10", "m_s = 0.5", 1))


def test_missing_sweep():
    doc = PDF_DOC[: PDF_DOC.index("[sweep]")]
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(doc)


def test_one_point_sweep_rejected():
    with pytest.raises(ConfigError, match="points"):
        parse_config(PDF_DOC.replace("points = 4", "points = 1"))


def test_fit_requires_finite_second_moment():
    doc = PDF_DOC.replace("m_s = 10", "m_s = 2", 1) + "\n[fit]\nepsilon_mode = zero\n"
    with pytest.raises(ConfigError, match="m_s must exceed 2 for log-normal fitting"):
        parse_config(doc)


def test_mode_conflict():
    with pytest.raises(ConfigError, match="conflicts"):
        parse_config(PDF_DOC, "cdf")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(PDF_DOC + "\n[extras]\nfoo = 1\n")


@pytest.mark.parametrize("mode", sorted(GOLDEN_HEADERS))
def test_golden_header(mode, tmp_path):
    out = tmp_path / "out.csv"
    assert main([mode, "--config", str(write(tmp_path, small_doc(mode))), "--out", str(out)]) == EXIT_OK
    text = out.read_text(encoding="utf-8")
    lines = text.split("\n")
    assert lines[0].startswith("# fratio ")
    assert any(ln.startswith("# config_sha256: ") for ln in lines[:5])
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header == GOLDEN_HEADERS[mode]
    assert "\r" not in text


def test_byte_identical_reruns_and_thread_independence(tmp_path):
    cfg_path = write(tmp_path, small_doc("secrecy"))
    outs = []
    for jobs in ("1", "1", "4"):
        out = tmp_path / f"run{len(outs)}.csv"
        assert main(["secrecy", "--config", str(cfg_path), "--out", str(out), "--jobs", jobs]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_override_changes_mc_only(tmp_path):
    cfg = parse_config(small_doc("cdf"))
    a = parse_csv(render_csv(run_scenario(cfg), cfg))
    b_cfg = replace(cfg, seed=99)
    b = parse_csv(render_csv(run_scenario(b_cfg), b_cfg))
    assert np.array_equal(a["exact_cdf"], b["exact_cdf"])
    assert not np.array_equal(a["mc_estimate"], b["mc_estimate"])


def test_stdout_when_no_out(tmp_path, capsys):
    assert main(["pdf", "--config", str(write(tmp_path, PDF_DOC))]) == EXIT_OK
    assert "x,exact_pdf,lognormal_pdf" in capsys.readouterr().out


def test_exit_code_config(tmp_path, capsys):
    bad = write(tmp_path, PDF_DOC.replace("m_s = 10", "m_s = 0.5", 1))
    assert main(["pdf", "--config", str(bad)]) == EXIT_CONFIG
    err = capsys.readouterr().err.strip()
    assert "m_s" in err and len(err.splitlines()) == 1


def test_exit_code_io(tmp_path):
    assert main(["pdf", "--config", str(tmp_path / "missing.ini")]) == EXIT_IO
    cfg_path = write(tmp_path, PDF_DOC)
    assert main(["pdf", "--config", str(cfg_path), "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO


def test_exit_code_numerical(tmp_path, monkeypatch, capsys):
    def boom(cfg, jobs=1):
        raise NonConvergenceError("contour sum did not settle")

    monkeypatch.setattr(cli, "run_scenario", boom)
    assert main(["pdf", "--config", str(write(tmp_path, PDF_DOC))]) == EXIT_NUMERICAL
    assert "did not settle" in capsys.readouterr().err


def test_shipped_configs_parse():
    for path in sorted(CONFIGS.glob("*.ini")):
        parse_config(path.read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def fig02():
    cfg = parse_config((CONFIGS / "fig02_cdf.ini").read_text(encoding="utf-8"))
    return parse_csv(render_csv(run_scenario(cfg, jobs=4), cfg))


def test_fig02_cdf_monotone_and_matches_mc(fig02):
    for prefix in np.unique(np.stack([fig02["m"], fig02["m_s"]], axis=1), axis=0):
        sel = (fig02["m"] == prefix[0]) & (fig02["m_s"] == prefix[1])
        exact = fig02["exact_cdf"][sel]
        assert np.all(np.diff(exact) >= 0)
    mc, se = fig02["mc_estimate"], fig02["mc_stderr"]
    informative = se > 0
    assert np.all(np.abs(fig02["exact_cdf"] - mc)[informative] <= 3.5 * se[informative])


def test_fig07_pnsc_increasing():
    cfg = parse_config((CONFIGS / "fig07_pnsc_mds.ini").read_text(encoding="utf-8"))
    cfg = replace(cfg, mc_samples=0)
    t = parse_csv(render_csv(run_scenario(cfg), cfg))
    for m_s in np.unique(t["legit_m_s"]):
        p = t["pnsc"][t["legit_m_s"] == m_s]
        # nondecreasing; the top rows round to 1 at nine digits
        assert np.all(np.diff(p) >= 0) and p[1] > p[0]
        assert p[-1] > 0.99


def test_kstest_rows_consistent(tmp_path):
    out = tmp_path / "ks.csv"
    assert main(["kstest", "--config", str(CONFIGS / "ks_L1.ini"), "--out", str(out)]) == EXIT_OK
    t = parse_csv(out.read_text(encoding="utf-8"))
    assert np.allclose(t["critical"], 0.0136, atol=5e-5)
    acc = t["accepted"] == 1
    assert np.all(t["statistic"][acc] < 0.0136)
    assert np.array_equal(acc, t["statistic"] < t["critical"])


def test_alpha_override_tightens(tmp_path):
    doc = small_doc("kstest")
    cfg = parse_config(doc)
    loose = run_scenario(cfg)
    strict = run_scenario(replace(cfg, alpha=0.20))
    col = loose.columns.index("critical")
    assert all(s[col] < l[col] for s, l in zip(strict.rows, loose.rows))
