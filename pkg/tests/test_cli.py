import csv
import io
import math

import pytest

from projcones.cli import SCHEMAS, load_config, main, parse_config, run_scenario
from projcones.errors import ConfigError


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _read(path):
    meta, body = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].rstrip("\n").partition("=")
                meta[k] = v
            else:
                body.append(line)
    return meta, list(csv.DictReader(io.StringIO("".join(body))))


def test_parse_config_comments_and_spacing():
    raw = parse_config("# header\nscenario = twocones  # inline\n\np=1, 2 ,3\np = 0,0,1\n")
    assert raw == {"scenario": "twocones", "p": "0,0,1"}


def test_parse_config_names_bad_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("scenario=sublevel\njunk\n")


@pytest.mark.parametrize("text,field", [
    ("scenario=nope", "scenario"),
    ("deltas=2^-3", "scenario"),
    ("scenario=twocones\np=0,0,-0.5\nfoo=1", "foo"),
    ("scenario=twocones\np=0,0,-0.5\ntau=0.7", "tau"),
    ("scenario=twocones", "p"),
    ("scenario=twocones\np=1,2", "p"),
    ("scenario=sublevel", "xi"),
    ("scenario=sublevel\nrestricted=1\ncurve=planar", "curve"),
    ("scenario=threecones\np=0,0,1", "q"),
    ("scenario=threecones", "p"),
    ("scenario=pipeline\nsigma=0.9", "sigma"),
    ("scenario=pipeline\nfamily=pi_tilde\nsigma=0.4", "sigma"),
    ("scenario=pipeline\nfamily=rho", "family"),
    ("scenario=dimsweep\nbox_k=2..4", "box_k"),
    ("scenario=dimsweep\nthetas=0", "thetas"),
    ("scenario=dimsweep\nifs=koch", "ifs"),
    ("scenario=dimsweep\nfamily=sigma", "family"),
    ("scenario=threecones\nrandom_pairs=2\ntau3=0.4", "tau3"),
    ("scenario=threecones\nrandom_pairs=2\nc=0.3", "c"),
    ("scenario=twocones\np=0,0,-0.5\nheight_floor=1.5", "height_floor"),
    ("scenario=twocones\np=0,0,-0.5\noracle=maybe", "oracle"),
    ("scenario=dimsweep\ndepth=seven", "depth"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as ei:
        load_config(parse_config(text))
    assert ei.value.field == field


@pytest.mark.parametrize("val,ks", [
    ("2^-7..2^-10", (7, 8, 9, 10)),
    ("2^-7, 2^-9", (7, 9)),
    ("0.0078125,2^-8", (7, 8)),
    ("2^-5", (5,)),
])
def test_deltas_syntax(val, ks):
    cfg = load_config({"scenario": "twocones", "p": "0,0,-0.5", "deltas": val})
    assert cfg.deltas == ks
    assert cfg.delta_values == [2.0 ** -k for k in ks]


@pytest.mark.parametrize("val", ["2^-9,2^-7", "0.003", "1.5", "2^-7..2^-6", ""])
def test_bad_deltas(val):
    with pytest.raises(ConfigError) as ei:
        load_config({"scenario": "twocones", "p": "0,0,-0.5", "deltas": val})
    assert ei.value.field == "deltas"


def test_defaults_per_scenario():
    assert load_config({"scenario": "sublevel", "xi": "1,0,0"}).deltas == tuple(range(6, 15))
    assert load_config({"scenario": "dimsweep"}).family == "pi"
    assert load_config({"scenario": "pipeline"}).deltas == (5,)


def test_curve_check_output(tmp_path):
    out = tmp_path / "cc.csv"
    cfg = _write(tmp_path, "scenario=curve-check\nsamples=10000\n")
    assert main(["--config", cfg, "--out", str(out)]) == 0
    meta, rows = _read(out)
    assert meta["schema"] == "curve-check/v1"
    assert "version" in meta and meta["seed"] == "0"
    assert list(rows[0]) == list(SCHEMAS["curve-check"])
    assert len(rows) == 10000
    assert float(rows[0]["margin"]) == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-12)


def test_stdout_when_no_out(tmp_path, capsys):
    cfg = _write(tmp_path, "scenario=curve-check\nsamples=16\n")
    assert main(["--config", cfg]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "#schema=curve-check/v1"


def test_seed_flag_overrides(tmp_path):
    out = tmp_path / "cc.csv"
    cfg = _write(tmp_path, "scenario=curve-check\nsamples=8\nseed=3\n")
    assert main(["--config", cfg, "--seed", "11", "--out", str(out)]) == 0
    assert _read(out)[0]["seed"] == "11"


def test_dimsweep_majority_rule(tmp_path):
    out = tmp_path / "ds.csv"
    cfg = _write(tmp_path, "scenario=dimsweep\nifs=sierpinski\ndepth=7\nfamily=pi\nthetas=64\n")
    assert main(["--config", cfg, "--out", str(out)]) == 0
    meta, rows = _read(out)
    assert len(rows) == 64
    dims = [float(r["box_dim"]) for r in rows]
    assert sum(d >= 0.95 for d in dims) >= 0.9 * len(dims)


def test_exit_codes(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["--config", _write(tmp_path, "scenario=nope\n")]) == 2
    assert main([]) == 2
    bad_threads = _write(tmp_path, "scenario=curve-check\n", "t.cfg")
    assert main(["--config", bad_threads, "--threads", "0"]) == 2
    # axis apex is closer than delta^eps to the origin at the coarse scales
    modul = _write(tmp_path, "scenario=twocones\np=0,0,-0.5\n", "m.cfg")
    assert main(["--config", modul]) == 3
    err = capsys.readouterr().err
    assert "scenario twocones" in err


def test_threads_do_not_change_bytes(tmp_path):
    cfg = load_config(parse_config("scenario=sublevel\nfamily=rho\nxi=0.6,0.8,0\ndeltas=2^-6..2^-10\n"))
    assert run_scenario(cfg, threads=1).to_csv() == run_scenario(cfg, threads=4).to_csv()
