"""Command-line experiment runner.

One scenario per invocation, described by a flat ``key = value`` config
file. Results go to CSV with a ``#schema=<scenario>/v1`` comment line and
``#key=value`` metadata lines ahead of the column header. Worker threads
only change how work is scheduled; results are gathered in input order, so
the output is byte-identical for any thread count.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .conegeom import DEFAULT_SLAB_C, default_graph_cone, two_cones_cover
from .covers import PIGEONHOLE_C0, box_dimension
from .errors import ConfigError, ProjconesError, ScenarioError
from .fitting import LogLogFit, fit_loglog_slope
from .geom3 import (Family, ProjectionFamily, nondegeneracy_margin, planar_curve,
                    special_curve, sublevel_measure_detail)
from .measure import (IFSSpec, cantor_ifs, corner_ifs, four_corner_ifs, generate_ifs,
                      pushforward, sierpinski_ifs)
from .oracles import circular_cone_distance, halfline_patch_distance, lattice_oracle
from .pipeline import (ConeField, build_tube_system, extremal_difference, good_sets,
                       heavy_tuple_search, restricted_sublevel, tube_energy)
from .threecones import DEFAULT_R, three_cones_cover

__all__ = ["ScenarioConfig", "ResultTable", "SCHEMAS", "parse_config", "load_config",
           "run_scenario", "fit_loglog_slope", "main"]

log = logging.getLogger("projcones")

SCENARIOS = ("curve-check", "sublevel", "dimsweep", "twocones", "threecones", "pipeline")

SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "curve-check": ("theta", "det", "margin"),
    "sublevel": ("k", "delta", "length", "grid", "hits", "converged"),
    "dimsweep": ("theta", "box_dim", "r2"),
    "twocones": ("k", "delta", "case", "count", "cap_radius", "slab_width", "K_fit",
                 "oracle_points", "containment"),
    "threecones": ("pair", "k", "delta", "decision", "branch", "lines", "radius",
                   "certified_radius", "nonempty", "oracle_points", "containment"),
    "pipeline": ("quantity", "lhs", "rhs", "delta", "constant", "holds"),
}

IFS_BUILDERS: Dict[str, Callable[[], IFSSpec]] = {
    "sierpinski": sierpinski_ifs, "corner": corner_ifs,
    "four_corner": four_corner_ifs, "cantor": cantor_ifs,
}

CURVES = {"special": special_curve, "planar": planar_curve}


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    out: Optional[str] = None
    curve: str = "special"
    family: Optional[str] = None
    ifs: str = "sierpinski"
    depth: int = 7
    deltas: Tuple[int, ...] = ()          # dyadic exponents k, delta = 2^-k
    thetas: int = 64
    samples: int = 10_000
    theta_grid: int = 1024
    xi: Optional[Tuple[float, float, float]] = None
    restricted: bool = False
    K: float = 2.5
    box_k: Optional[Tuple[int, int]] = None
    p: Optional[Tuple[float, float, float]] = None
    q: Optional[Tuple[float, float, float]] = None
    random_pairs: int = 0
    oracle: bool = False
    eps: float = 0.03
    tau: float = 0.25
    tau3: float = 0.6
    c: float = 0.15
    sigma: float = 1.2
    s: float = 1.0
    R: float = DEFAULT_R
    slab_C: float = DEFAULT_SLAB_C
    height_floor: Optional[float] = None
    near_factor: float = 0.1
    sep: float = 0.1
    thresh: float = 0.02

    @property
    def delta_values(self) -> List[float]:
        return [2.0 ** -k for k in self.deltas]


_DEFAULT_DELTAS = {
    "curve-check": (), "sublevel": tuple(range(6, 15)), "dimsweep": (),
    "twocones": (7, 8, 9, 10), "threecones": (8, 10), "pipeline": (5,),
}

_DEFAULT_FAMILY = {"sublevel": "rho", "dimsweep": "pi", "pipeline": "pi"}


def parse_config(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; later keys win."""
    out: Dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key = value, got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            raise ConfigError(f"line {n}", f"bad key {key!r}")
        out[key] = val
    return out


def _dyadic_exponent(tok: str, key: str) -> int:
    tok = tok.replace(" ", "")
    m = re.fullmatch(r"2\^-(\d+)", tok)
    if m:
        return int(m.group(1))
    try:
        v = float(tok)
    except ValueError:
        raise ConfigError(key, f"cannot read {tok!r} as a dyadic scale") from None
    if not 0 < v < 1:
        raise ConfigError(key, f"{tok} is not in (0, 1)")
    k = -math.log2(v)
    if abs(k - round(k)) > 1e-12:
        raise ConfigError(key, f"{tok} is not a power of 2")
    return int(round(k))


def _parse_deltas(val: str, key: str = "deltas") -> Tuple[int, ...]:
    """``2^-7..2^-10`` or a comma list such as ``2^-7, 2^-9, 0.001953125``."""
    if ".." in val:
        a, b = val.split("..", 1)
        ka, kb = _dyadic_exponent(a, key), _dyadic_exponent(b, key)
        ks = tuple(range(ka, kb + 1))
    else:
        ks = tuple(_dyadic_exponent(t, key) for t in val.split(",") if t.strip())
    if not ks:
        raise ConfigError(key, "empty scale ladder")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError(key, "scales must be strictly decreasing")
    if ks[0] < 1:
        raise ConfigError(key, "scales must be at most 1/2")
    return ks


def _vec(val: str, key: str) -> Tuple[float, float, float]:
    parts = [t for t in re.split(r"[,\s]+", val.strip().strip("()[]")) if t]
    if len(parts) != 3:
        raise ConfigError(key, "expected three numbers")
    try:
        v = tuple(float(t) for t in parts)
    except ValueError:
        raise ConfigError(key, f"not numeric: {val!r}") from None
    if not all(math.isfinite(x) for x in v):
        raise ConfigError(key, "entries must be finite")
    return v  # type: ignore[return-value]


def _bool(val: str, key: str) -> bool:
    v = val.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {val!r}")


def _num(val: str, key: str, kind=float):
    try:
        x = kind(val)
    except ValueError:
        raise ConfigError(key, f"expected {kind.__name__}, got {val!r}") from None
    if kind is float and not math.isfinite(x):
        raise ConfigError(key, "must be finite")
    return x


_INT_KEYS = ("seed", "depth", "thetas", "samples", "theta_grid", "random_pairs")
_FLOAT_KEYS = ("K", "eps", "tau", "tau3", "c", "sigma", "s", "R", "slab_C",
               "height_floor", "near_factor", "sep", "thresh")
_KNOWN = set(_INT_KEYS) | set(_FLOAT_KEYS) | {
    "scenario", "out", "curve", "family", "ifs", "deltas", "xi", "restricted",
    "box_k", "p", "q", "oracle"}


def _open(lo: float, hi: float, x: float, key: str, closed_hi: bool = False):
    if not (lo < x < hi or (closed_hi and x == hi)):
        br = "]" if closed_hi else ")"
        raise ConfigError(key, f"{x} outside ({lo}, {hi}{br}")


def load_config(raw: Dict[str, str]) -> ScenarioConfig:
    """Type-convert and validate a parsed config; errors name the field."""
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    scen = raw.get("scenario")
    if scen is None:
        raise ConfigError("scenario", "missing")
    if scen not in SCENARIOS:
        raise ConfigError("scenario", f"{scen!r} not one of {', '.join(SCENARIOS)}")
    kw: Dict[str, object] = {"scenario": scen}
    for k in _INT_KEYS:
        if k in raw:
            kw[k] = _num(raw[k], k, int)
    for k in _FLOAT_KEYS:
        if k in raw:
            kw[k] = _num(raw[k], k)
    for k in ("xi", "p", "q"):
        if k in raw:
            kw[k] = _vec(raw[k], k)
    for k in ("restricted", "oracle"):
        if k in raw:
            kw[k] = _bool(raw[k], k)
    for k in ("out", "curve", "family", "ifs"):
        if k in raw:
            kw[k] = raw[k]
    kw["deltas"] = _parse_deltas(raw["deltas"]) if "deltas" in raw else _DEFAULT_DELTAS[scen]
    if "box_k" in raw:
        m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", raw["box_k"])
        if not m:
            raise ConfigError("box_k", "expected kmin..kmax")
        kw["box_k"] = (int(m.group(1)), int(m.group(2)))
    kw.setdefault("family", _DEFAULT_FAMILY.get(scen))
    cfg = ScenarioConfig(**kw)  # type: ignore[arg-type]
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.curve not in CURVES:
        raise ConfigError("curve", f"{cfg.curve!r} not one of {', '.join(CURVES)}")
    if cfg.ifs not in IFS_BUILDERS:
        raise ConfigError("ifs", f"{cfg.ifs!r} not one of {', '.join(IFS_BUILDERS)}")
    if cfg.family is not None and cfg.family not in [f.value for f in Family]:
        raise ConfigError("family", f"{cfg.family!r} not one of rho, pi, pi_tilde")
    if cfg.seed < 0:
        raise ConfigError("seed", "must be nonnegative")
    for k in ("depth", "thetas", "samples", "theta_grid"):
        if getattr(cfg, k) < 1:
            raise ConfigError(k, "must be positive")
    if cfg.random_pairs < 0:
        raise ConfigError("random_pairs", "must be nonnegative")
    _open(0.0, 0.5, cfg.tau, "tau")
    _open(0.5, 1.0, cfg.tau3, "tau3")
    _open(0.0, 0.25, cfg.c, "c", closed_hi=True)
    _open(0.0, 1.0, cfg.eps, "eps")
    _open(0.0, 1.0, cfg.sep, "sep")
    _open(0.0, 1.0, cfg.thresh, "thresh")
    for k in ("K", "R", "slab_C", "near_factor", "s"):
        if getattr(cfg, k) <= 0:
            raise ConfigError(k, "must be positive")
    if cfg.height_floor is not None and not 0 < cfg.height_floor < 1:
        raise ConfigError("height_floor", "must lie in (0, 1)")
    if cfg.box_k is not None and cfg.box_k[1] - cfg.box_k[0] < 4:
        raise ConfigError("box_k", "needs at least 4 octaves")
    scen = cfg.scenario
    if scen in ("sublevel", "twocones", "threecones", "pipeline") and not cfg.deltas:
        raise ConfigError("deltas", "scenario needs a scale ladder")
    if scen == "sublevel":
        if cfg.restricted and cfg.curve != "special":
            raise ConfigError("curve", "restricted sublevel runs on the special curve")
        if not cfg.restricted and cfg.xi is None:
            raise ConfigError("xi", "required unless restricted = true")
    if scen == "pipeline":
        if cfg.family not in ("pi", "pi_tilde"):
            raise ConfigError("family", "pipeline uses pi or pi_tilde")
        floor = 1.0 if cfg.family == "pi" else 0.5
        if cfg.sigma <= floor:
            raise ConfigError("sigma", f"must exceed {floor} for {cfg.family}")
    if scen == "twocones" and cfg.p is None:
        raise ConfigError("p", "required for twocones")
    if scen == "threecones" and (cfg.p is None) != (cfg.q is None):
        raise ConfigError("q" if cfg.q is None else "p", "p and q come together")
    if scen == "threecones" and cfg.p is None and cfg.random_pairs == 0:
        raise ConfigError("p", "give p and q or random_pairs > 0")


# ------------------------------------------------------------------ results

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


@dataclass
class ResultTable:
    scenario: str
    columns: Tuple[str, ...]
    rows: List[tuple]
    meta: Dict[str, object]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"#schema={self.scenario}/v1\n")
        for k, v in self.meta.items():
            buf.write(f"#{k}={_fmt(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _pmap(fn, items: Sequence, threads: int) -> list:
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _fit_meta(meta: dict, name: str, xs, ys) -> Optional[LogLogFit]:
    try:
        fit = fit_loglog_slope(xs, ys)
    except ProjconesError as e:
        meta[f"fit.{name}"] = f"unavailable ({e})"
        return None
    meta[f"fit.{name}.slope"] = fit.slope
    meta[f"fit.{name}.r2"] = fit.r2
    meta[f"fit.{name}.dropped"] = fit.dropped
    return fit


# ---------------------------------------------------------------- scenarios

def _curve(cfg: ScenarioConfig):
    return CURVES[cfg.curve]()


def _curve_check(cfg, threads, meta):
    cur = _curve(cfg)
    th = np.linspace(cur.J[0], cur.J[1], cfg.samples)
    g, g1, g2 = cur.evaluate(th)
    det = np.abs(np.einsum("ij,ij->i", g, np.cross(g1, g2)))
    margin = nondegeneracy_margin(cur, cfg.samples)
    meta["margin"] = margin
    return [(t, d, margin) for t, d in zip(th, det)]


def _sublevel(cfg, threads, meta):
    cur = _curve(cfg)
    deltas = cfg.delta_values
    if cfg.restricted:
        meta["restricted.K"] = cfg.K

        def one(d):
            xi, E = extremal_difference(d, cfg.tau, cfg.K)
            th = np.concatenate([np.linspace(a, b, 2048) for a, b in E])
            fld = ConeField(cur, th, d ** cfg.tau, axis="b")
            L = restricted_sublevel(xi, np.zeros(3), fld, d, cfg.tau, E=E)
            return L, None, None, True
    else:
        fam = ProjectionFamily(Family(cfg.family), cur)
        xi = np.asarray(cfg.xi, dtype=float)

        def one(d):
            r = sublevel_measure_detail(fam, xi, d, cfg.theta_grid)
            return r.length, r.grid, r.hits, r.converged
    res = _pmap(one, deltas, threads)
    _fit_meta(meta, "length", deltas, [r[0] for r in res])
    return [(k, d) + tuple(r) for k, d, r in zip(cfg.deltas, deltas, res)]


def _dimsweep(cfg, threads, meta):
    cur = _curve(cfg)
    fam = ProjectionFamily(Family(cfg.family), cur)
    cloud = generate_ifs(IFS_BUILDERS[cfg.ifs](), cfg.depth)
    box_k = cfg.box_k or ((3, 8) if fam.tag is Family.LINE else (2, 6))
    meta["similarity_dimension"] = cloud.meta["similarity_dimension"]
    meta["box_k"] = f"{box_k[0]}..{box_k[1]}"
    th = np.linspace(cur.J[0], cur.J[1], cfg.thetas, endpoint=False)

    def one(t):
        return box_dimension(pushforward(cloud, fam, float(t)), box_k)
    res = _pmap(one, list(th), threads)
    return [(t, d, r2) for t, (d, r2) in zip(th, res)]


def _twocones(cfg, threads, meta):
    cone = default_graph_cone()
    p = np.asarray(cfg.p, dtype=float)
    meta["height_floor"] = cfg.height_floor

    def one(d):
        r = two_cones_cover(cone.curve, cone.J, p, d, cfg.eps, cfg.tau, cone=cone,
                            slab_C=cfg.slab_C, height_floor=cfg.height_floor)
        n_pts, frac = None, None
        if cfg.oracle:
            pts = lattice_oracle([lambda x: halfline_patch_distance(x, cone.curve, cone.J),
                                  lambda x: halfline_patch_distance(x, cone.curve, cone.J,
                                                                    apex=p)], d)
            n_pts = len(pts)
            frac = float(r.all_balls.contains(pts).mean()) if n_pts else 1.0
        return (r.case, len(r.cover), r.meta["cap_radius"], r.meta["slab_width"],
                r.meta["K_fit"], n_pts, frac)
    res = _pmap(one, cfg.delta_values, threads)
    fit = _fit_meta(meta, "count", cfg.delta_values, [r[1] for r in res])
    if fit is not None:
        meta["count_exponent"] = -fit.slope
    return [(k, d) + r for k, d, r in zip(cfg.deltas, cfg.delta_values, res)]


def _random_point(rng) -> np.ndarray:
    while True:
        v = rng.uniform(-1.0, 1.0, 3)
        if np.linalg.norm(v) <= 1.0:
            return v


def _threecones(cfg, threads, meta):
    rng = np.random.default_rng(cfg.seed)
    dmax = cfg.delta_values[0]
    pairs = []
    if cfg.p is not None:
        pairs.append((np.asarray(cfg.p, float), np.asarray(cfg.q, float)))
    # admissible at the coarsest scale means admissible at every finer one
    while len(pairs) < (cfg.p is not None) + cfg.random_pairs:
        p, q = _random_point(rng), _random_point(rng)
        lim = dmax ** cfg.c
        if min(np.linalg.norm(p), np.linalg.norm(q), np.linalg.norm(p - q)) >= lim:
            pairs.append((p, q))
    for i, (p, q) in enumerate(pairs):
        meta[f"pair{i}.p"] = " ".join(repr(float(x)) for x in p)
        meta[f"pair{i}.q"] = " ".join(repr(float(x)) for x in q)
    jobs = [(i, k, 2.0 ** -k) for i in range(len(pairs)) for k in cfg.deltas]

    def one(job):
        i, k, d = job
        p, q = pairs[i]
        r = three_cones_cover(p, q, d, c=cfg.c, tau=cfg.tau3, R=cfg.R,
                              near_factor=cfg.near_factor)
        n_pts, frac = None, None
        if cfg.oracle:
            pts = lattice_oracle([circular_cone_distance,
                                  lambda x: circular_cone_distance(x, p),
                                  lambda x: circular_cone_distance(x, q)], d)
            n_pts = len(pts)
            frac = float(np.mean(r.contains(pts))) if n_pts else 1.0
        return (i, k, d, r.decision, r.branch, len(r.lines), r.radius,
                r.meta.get("certified_radius"), r.nonempty, n_pts, frac)
    return _pmap(one, jobs, threads)


def _pipeline(cfg, threads, meta):
    cur = _curve(cfg)
    fam = ProjectionFamily(Family(cfg.family), cur)
    cloud = generate_ifs(IFS_BUILDERS[cfg.ifs](), cfg.depth)
    d = cfg.delta_values[0]
    th = np.linspace(cur.J[0], cur.J[1], cfg.thetas, endpoint=False)
    system = build_tube_system(cloud, fam, th, d, cfg.sigma, workers=threads)
    en = tube_energy(cloud, system, workers=threads)
    rows = [("energy_theta_first_vs_pair_first", en.theta_first, en.pair_first, d, 1.0,
             abs(en.theta_first - en.pair_first) <= 1e-9)]
    rows += [(r.name, r.lhs, r.rhs, r.delta, r.constant, r.holds) for r in en.chain]
    meta["chain_constant"] = en.chain[-1].constant
    fld = ConeField(cur, th, d ** cfg.tau)
    gs = good_sets(cloud, fld, d, cfg.tau)
    dic = gs.dichotomy
    rows.append((dic.name, dic.lhs, dic.rhs, d, 1.0, dic.holds))
    for k, f in ((2, fld.with_side("plus")), (3, fld)):
        h = heavy_tuple_search(cloud, f, k, cfg.sep, cfg.thresh, seed=cfg.seed)
        rows.append((f"holder_k{k}", h.aggregate, h.holder_rhs, d, 1.0,
                     h.aggregate >= h.holder_rhs))
        rows.append((f"heavy_tuple_k{k}", h.mass, cfg.thresh, d, 1.0, h.indices is not None))
    return rows


_RUNNERS = {
    "curve-check": _curve_check, "sublevel": _sublevel, "dimsweep": _dimsweep,
    "twocones": _twocones, "threecones": _threecones, "pipeline": _pipeline,
}

_CONSTANT_KEYS = {
    "curve-check": (), "sublevel": ("tau",), "dimsweep": (),
    "twocones": ("eps", "tau", "slab_C"), "threecones": ("R", "c", "tau3", "near_factor"),
    "pipeline": ("sigma", "tau", "sep", "thresh"),
}


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> ResultTable:
    """Run one scenario and return its table; writes CSV when ``cfg.out`` is set."""
    if threads < 1:
        raise ConfigError("threads", "must be positive")
    meta: Dict[str, object] = {"version": __version__, "seed": cfg.seed,
                               "curve": cfg.curve}
    meta.update({"const.R": cfg.R, "const.c": cfg.c, "const.eps": cfg.eps,
                 "const.tau": cfg.tau, "const.c0": PIGEONHOLE_C0})
    for k in _CONSTANT_KEYS[cfg.scenario]:
        meta[f"param.{k}"] = getattr(cfg, k)
    if cfg.family is not None and not cfg.restricted:
        meta["family"] = cfg.family
    if cfg.scenario in ("dimsweep", "pipeline"):
        meta["ifs"] = cfg.ifs
        meta["depth"] = cfg.depth
    if cfg.deltas:
        meta["deltas"] = ",".join(f"2^-{k}" for k in cfg.deltas)
    log.info("running %s", cfg.scenario)
    try:
        rows = _RUNNERS[cfg.scenario](cfg, threads, meta)
    except ProjconesError as e:
        raise ScenarioError(cfg.scenario, e) from e
    table = ResultTable(cfg.scenario, SCHEMAS[cfg.scenario], rows, meta)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(table.to_csv())
    return table


# ---------------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="projcones", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="flat key = value scenario file")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        with open(args.config) as fh:
            raw = parse_config(fh.read())
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        if args.out is not None:
            raw["out"] = args.out
        cfg = load_config(raw)
        if args.threads < 1:
            raise ConfigError("--threads", "must be positive")
    except OSError as e:
        print(f"projcones: cannot read config: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"projcones: invalid config: {e}", file=sys.stderr)
        return 2
    try:
        table = run_scenario(cfg, threads=args.threads)
    except ProjconesError as e:
        print(f"projcones: {e}", file=sys.stderr)
        return 3
    if not cfg.out:
        sys.stdout.write(table.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
