"""Campaign runner: JSON config in, JSON/CSV reports out.

A campaign is one command (norm evaluation, JvN estimate, inequality
verification, summability verdict, alpha/beta asymptotics, summand search,
or a compression-iteration trace) plus a seed.  The numerical payload of a
result is a pure function of the config: reruns are byte-identical, and the
jobs knob only widens the thread pool over pre-seeded sample batches.

Exit codes: 0 all verdicts hold, 1 a verified inequality was violated,
2 invalid config, 3 numerical failure (non-Cauchy trace or an ambiguous
rank decision).
"""
from __future__ import annotations

import argparse
import csv
import importlib.resources
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, geomconst, isolab
from . import nakano as nk
from . import verify as vf
from .nakano import (
    BlockVector,
    FormulaExponents,
    NakanoSpec,
    nakano_norm,
    nakano_condition_terms,
    nakano_condition_verdict,
    spec_from_dict,
)
from .spaces import space_from_dict

ENV_OUT = "MODBANACH_OUT"

__all__ = ["ConfigError", "CampaignResult", "run_campaign", "emit_plot_data", "main"]


class ConfigError(ValueError):
    """Invalid campaign config; maps to exit code 2."""


def _schema() -> dict:
    text = importlib.resources.files("modbanach").joinpath("schema/campaign.schema.json").read_text()
    return json.loads(text)


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as e:
        path = "$" + "".join(f"[{p!r}]" for p in e.absolute_path)
        raise ConfigError(f"{path}: {e.message}") from None
    cmd = cfg["command"]
    if cmd not in cfg or not isinstance(cfg[cmd], dict):
        raise ConfigError(f"command {cmd!r} needs a {cmd!r} object with its parameters")


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON dumping."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _space(desc, where: str):
    try:
        return space_from_dict(desc)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _nakano_spec(desc, where: str) -> NakanoSpec:
    try:
        return spec_from_dict(desc)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _exponents(desc, where: str):
    try:
        return nk._exponents_from_dict(desc)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _block_vector(obj, where: str) -> BlockVector:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: block vector must map block indices to coordinate lists")
    try:
        return BlockVector(tuple((int(k), np.asarray(v, dtype=float)) for k, v in obj.items()))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _need(sub: dict, key: str, where: str):
    if key not in sub:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return sub[key]


@dataclass(frozen=True)
class CampaignResult:
    name: str
    config: dict
    payload: dict
    passed: bool
    violated: bool
    numerical_failure: bool
    wall_time: float
    version: str

    def to_json_obj(self, include_meta: bool = True) -> dict:
        obj = {
            "name": self.name,
            "version": self.version,
            "config": _plain(self.config),
            "summary": {
                "passed": self.passed,
                "violated": self.violated,
                "numerical_failure": self.numerical_failure,
            },
            "payload": _plain(self.payload),
        }
        if include_meta:
            obj["meta"] = {"wall_time_s": self.wall_time}
        return obj

    def payload_bytes(self) -> bytes:
        """Deterministic byte serialization of everything but the wall time."""
        return json.dumps(self.to_json_obj(include_meta=False), sort_keys=True).encode()


# ---------------------------------------------------------------------------
# command runners; each returns (payload, passed, violated, numerical_failure)


def _run_norm(sub: dict, seed: int, jobs: int):
    where = "norm"
    if ("space" in sub) == ("nakano" in sub):
        raise ConfigError(f"{where}: give exactly one of 'space' or 'nakano'")
    vectors = _need(sub, "vectors", where)
    if "space" in sub:
        space = _space(sub["space"], where + ".space")
        norms = [space.norm(np.asarray(v, dtype=float)) for v in vectors]
    else:
        spec = _nakano_spec(sub["nakano"], where + ".nakano")
        norms = [nakano_norm(spec, _block_vector(v, where + ".vectors")) for v in vectors]
    return {"norms": norms}, True, False, False


def _run_jvn(sub: dict, seed: int, jobs: int):
    where = "jvn"
    space = _space(_need(sub, "space", where), where + ".space")
    budget = int(sub.get("budget", 64))
    est = geomconst.jvn_lower_bound(space, budget=budget, seed=seed)
    upper = None
    if hasattr(space, "p") and math.isfinite(space.p):
        upper = geomconst.jvn_upper_bound_clarkson(space.p)
    payload = {
        "lower_bound": est.lower_bound,
        "upper_bound_clarkson": upper,
        "witness": {
            "x": vf._array_to_json(est.witness.x),
            "y": vf._array_to_json(est.witness.y),
            "value": est.witness.value,
        },
        "starts": est.starts,
        "evaluations": est.evaluations,
    }
    ok = 1.0 - 1e-9 <= est.lower_bound <= 2.0 + 1e-9
    if upper is not None:
        ok = ok and est.lower_bound <= upper + 1e-6
    return payload, ok, False, False


def _run_verify(sub: dict, seed: int, jobs: int):
    where = "verify"
    check = _need(sub, "check", where)
    tol = sub.get("tolerance")
    samples = int(sub.get("samples", 10000))
    kw = {"samples": samples, "seed": seed, "jobs": jobs}
    if tol is not None:
        kw["tolerance"] = float(tol)
    try:
        if check == "clarkson_lower":
            rep = vf.verify_clarkson_lower(_space(_need(sub, "space", where), where + ".space"), **kw)
        elif check == "clarkson_upper":
            rep = vf.verify_clarkson_upper(_space(_need(sub, "space", where), where + ".space"), **kw)
        elif check == "two_smooth":
            rep = vf.verify_2smooth(
                _space(_need(sub, "space", where), where + ".space"),
                c=sub.get("c"), **kw,
            )
        elif check == "parallelogram":
            rep = vf.verify_parallelogram(_space(_need(sub, "space", where), where + ".space"), **kw)
        elif check == "endpoint_2":
            rep = vf.verify_endpoint_2(_space(_need(sub, "space", where), where + ".space"), **kw)
        elif check == "schatten_inf":
            rep = vf.verify_schatten_inf(int(_need(sub, "d", where)), **kw)
        elif check == "beckner":
            rep = vf.verify_beckner(
                float(_need(sub, "p", where)),
                grid=int(sub.get("grid", 401)),
                extent=float(sub.get("extent", 2.0)),
                tolerance=float(tol) if tol is not None else 1e-12,
            )
        elif check == "lp_pair":
            space = _space(_need(sub, "space", where), where + ".space")
            rep = vf.verify_lp_pair(
                space,
                np.asarray(_need(sub, "x", where), dtype=float),
                np.asarray(_need(sub, "y", where), dtype=float),
                p=sub.get("p"),
                lambdas=sub.get("lambdas"),
                tolerance=float(tol) if tol is not None else 1e-10,
            )
        elif check == "far_block_limit":
            spec = _nakano_spec(_need(sub, "nakano", where), where + ".nakano")
            x = _block_vector(_need(sub, "x", where), where + ".x")
            schedule = [int(n) for n in _need(sub, "schedule", where)]
            gaps = vf.far_block_limit_gaps(spec, x, float(sub.get("t", 1.0)), schedule)
            slack = 1e-12
            holds = bool(np.all(np.diff(gaps) <= slack))
            payload = {
                "check": check,
                "schedule": schedule,
                "gaps": gaps.tolist(),
                "verdict": "holds" if holds else "violated",
                "max_violation": float(max(0.0, np.max(np.diff(gaps)))) if len(gaps) > 1 else 0.0,
            }
            return payload, holds, not holds, False
        else:
            raise ConfigError(f"{where}.check: unknown check {check!r}")
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None
    payload = rep.to_dict()
    return payload, not rep.violated, rep.violated, False


def _run_nakano(sub: dict, seed: int, jobs: int):
    where = "nakano"
    exponents = _exponents(_need(sub, "exponents", where), where + ".exponents")
    c_grid = [float(c) for c in _need(sub, "c_grid", where)]
    window = tuple(int(w) for w in sub.get("window", (1000, 1000000)))
    count = int(sub.get("count", 60))
    margin = float(sub.get("margin", 0.1))
    try:
        report = nakano_condition_verdict(exponents, c_grid, count=count, window=window, margin=margin)
        terms = nakano_condition_terms(exponents, c_grid[0], count=int(sub.get("terms_count", 64)))
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None
    payload = {
        "verdicts": [
            {"c": v.c, "slope": v.slope, "verdict": v.verdict} for v in report.verdicts
        ],
        "overall": report.overall,
        "window": list(report.window),
        "margin": report.margin,
        "series": {
            "c": terms.c,
            "n": terms.indices.tolist(),
            "term": terms.terms.tolist(),
            "log_slope": [float("nan")] + terms.log_slopes.tolist(),
        },
    }
    return payload, True, False, False


def _run_asymptotics(sub: dict, seed: int, jobs: int):
    where = "asymptotics"
    exponents = _exponents(_need(sub, "exponents", where), where + ".exponents")
    start = int(sub.get("start", 1))
    horizon = int(_need(sub, "horizon", where))
    if horizon < start:
        raise ConfigError(f"{where}: horizon must be >= start")
    ns = np.arange(start, horizon + 1)
    try:
        ps = exponents.values(ns)
        source = sub.get("jvn_values", "clarkson")
        if source == "clarkson":
            avals = np.array([geomconst.jvn_upper_bound_clarkson(p) for p in ps])
        else:
            avals = np.asarray(source, dtype=float)
        tail = None
        if isinstance(exponents, FormulaExponents) and source == "clarkson":
            tail = geomconst.clarkson_alpha_tail_bound(exponents, horizon)
        rep = geomconst.alpha_beta(ps, avals, tail_bound=tail)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None
    payload = {
        "n": ns.tolist(),
        "exponent": ps.tolist(),
        "alpha": rep.alpha.tolist(),
        "beta": rep.beta.tolist(),
        "tail_bound": rep.tail_bound,
    }
    return payload, True, False, False


def _run_summand(sub: dict, seed: int, jobs: int):
    where = "summand"
    space = _space(_need(sub, "space", where), where + ".space")
    budget = int(sub.get("budget", 16))
    result = isolab.find_one_dim_two_summand(space, budget=budget, seed=seed)
    payload = {
        "found": result.found,
        "residual": result.residual,
        "starts": result.starts,
        "candidate": None,
    }
    if result.candidate is not None:
        payload["candidate"] = {
            "xi": result.candidate.xi.tolist(),
            "phi": result.candidate.phi.tolist(),
        }
    grid = sub.get("grid")
    if grid is not None:
        if space.dim != 2:
            raise ConfigError(f"{where}.grid: the angle grid needs a two-dimensional space")
        payload["grid_floor"] = isolab.two_summand_grid_floor(
            space, n_xi=int(grid.get("n_xi", 720)), n_phi=int(grid.get("n_phi", 720)),
            seed=seed,
        )
    return payload, True, False, False


def _build_embedding(desc: dict, where: str) -> isolab.LinearMap:
    kind = _need(desc, "kind", where)
    h_dim = int(desc.get("h_dim", 4))
    if kind == "counterexample":
        e1 = _space(_need(desc, "e1", where), where + ".e1")
        return isolab.build_counterexample_embedding(e1, h_dim=h_dim)
    if kind == "inclusion":
        e0 = _space(_need(desc, "e0", where), where + ".e0")
        return isolab.build_inclusion_embedding(e0, h_dim=h_dim)
    raise ConfigError(f"{where}.kind: unknown embedding kind {kind!r}")


def _run_iterate(sub: dict, seed: int, jobs: int):
    where = "iterate"
    t = _build_embedding(_need(sub, "embedding", where), where + ".embedding")
    xspec = sub.get("x", "xi0")
    if xspec == "xi0":
        x = np.zeros(t.domain.dim)
        x[-1] = 1.0
    else:
        x = np.asarray(xspec, dtype=float)
        if x.shape != (t.domain.dim,):
            raise ConfigError(f"{where}.x: expected {t.domain.dim} coordinates")
    n_max = int(sub.get("n_max", 50))
    if n_max < 6:
        raise ConfigError(f"{where}.n_max: must be at least 6")
    trace = isolab.pt_iterate(t, x, n_max=n_max)
    iso = isolab.is_isometric_embedding(t, seed=seed)
    cauchy = abs(trace.norms[-1] - trace.norms[-6]) <= 1e-9
    numerical_failure = not cauchy
    try:
        inter_dim = isolab.range_intersection_dim(t)
    except isolab.AmbiguousRankError:
        inter_dim = None
        numerical_failure = True
    payload = {
        "isometric": iso.isometric,
        "max_deviation": iso.max_deviation,
        "cauchy": bool(cauchy),
        "intersection_dim": inter_dim,
        "trace": {
            "n": list(range(len(trace.norms))),
            "norm": trace.norms.tolist(),
            "residual": trace.residuals.tolist(),
            "defect": trace.defects.tolist(),
        },
    }
    max_defect = float(trace.defects.max()) if len(trace.defects) else 0.0
    passed = iso.isometric and cauchy and max_defect <= 1e-10
    return payload, passed, False, numerical_failure


_RUNNERS = {
    "norm": _run_norm,
    "jvn": _run_jvn,
    "verify": _run_verify,
    "nakano": _run_nakano,
    "asymptotics": _run_asymptotics,
    "summand": _run_summand,
    "iterate": _run_iterate,
}


def run_campaign(config: dict) -> CampaignResult:
    """Validate and execute one campaign config."""
    validate_config(config)
    cmd = config["command"]
    seed = int(config["seed"])
    jobs = int(config.get("jobs", 1))
    name = config.get("name", "campaign")
    t0 = time.perf_counter()
    payload, passed, violated, numfail = _RUNNERS[cmd](config[cmd], seed, jobs)
    wall = time.perf_counter() - t0
    return CampaignResult(
        name=name, config=config, payload=payload, passed=passed,
        violated=violated, numerical_failure=numfail, wall_time=wall,
        version=__version__,
    )


# ---------------------------------------------------------------------------
# output files


def _f17(x) -> str:
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _headline_metric(result: CampaignResult) -> float:
    p = result.payload
    cmd = result.config["command"]
    if cmd == "norm":
        return p["norms"][0] if p["norms"] else 0.0
    if cmd == "jvn":
        return p["lower_bound"]
    if cmd == "verify":
        return p.get("max_violation", 0.0)
    if cmd == "nakano":
        return p["verdicts"][0]["slope"] if p["verdicts"] else 0.0
    if cmd == "asymptotics":
        return p["beta"][0] if p["beta"] else 0.0
    if cmd == "summand":
        return p.get("grid_floor", p["residual"])
    if cmd == "iterate":
        d = p["trace"]["defect"]
        return max(d) if d else 0.0
    return 0.0


def write_summary_csv(result: CampaignResult, path: Path) -> None:
    """One-row campaign summary; floats carry 17 significant digits."""
    row = {
        "name": result.name,
        "command": result.config["command"],
        "passed": result.passed,
        "violated": result.violated,
        "numerical_failure": result.numerical_failure,
        "metric": _f17(float(_headline_metric(result))),
        "seed": result.config["seed"],
        "version": result.version,
    }
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(row.keys()))
        w.writeheader()
        w.writerow(row)


def emit_plot_data(result: CampaignResult, kind: str, path) -> None:
    """Write plot-ready CSV series extracted from a campaign result.

    Kinds: "trace" (n, norm, residual, defect), "asymptotics"
    (n, alpha, beta), "nakano_terms" (n, term, log_slope).
    """
    p = result.payload
    if kind == "trace":
        if "trace" not in p:
            raise ValueError("result has no iteration trace")
        tr = p["trace"]
        cols = ["n", "norm", "residual", "defect"]
        rows = [
            (n, tr["norm"][n], tr["residual"][n - 1], tr["defect"][n - 1])
            for n in range(1, len(tr["residual"]) + 1)
        ]
    elif kind == "asymptotics":
        if "alpha" not in p:
            raise ValueError("result has no alpha/beta series")
        cols = ["n", "alpha", "beta"]
        rows = list(zip(p["n"], p["alpha"], p["beta"]))
    elif kind == "nakano_terms":
        if "series" not in p:
            raise ValueError("result has no term series")
        s = p["series"]
        cols = ["n", "term", "log_slope"]
        rows = list(zip(s["n"], s["term"], s["log_slope"]))
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([_f17(float(v)) if isinstance(v, (int, float)) else v for v in row])


def _write_outputs(result: CampaignResult, out_dir: Path, fmt: str) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        jpath = out_dir / f"{result.name}.json"
        with open(jpath, "w", encoding="utf-8") as fh:
            json.dump(result.to_json_obj(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        written.append(jpath)
    if fmt in ("csv", "both"):
        cpath = out_dir / f"{result.name}.csv"
        write_summary_csv(result, cpath)
        written.append(cpath)
    plot_kind = result.config.get("plot")
    if plot_kind:
        ppath = out_dir / f"{result.name}_{plot_kind}.csv"
        emit_plot_data(result, plot_kind, ppath)
        written.append(ppath)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="modbanach",
        description="Run a modular-space verification campaign from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the campaign JSON config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads for sample batches")
    parser.add_argument("--out", default=None,
                        help=f"output directory (default: config, then ${ENV_OUT}, then cwd)")
    parser.add_argument("--format", choices=["json", "csv", "both"], default=None,
                        help="report format (default: config value or both)")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("config error: top-level JSON value must be an object", file=sys.stderr)
        return 2

    if args.seed is not None:
        config["seed"] = args.seed
    if args.jobs is not None:
        config["jobs"] = args.jobs
    if "name" not in config:
        config["name"] = Path(args.config).stem

    try:
        result = run_campaign(config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    out_dir = Path(args.out or config.get("out") or os.environ.get(ENV_OUT) or ".")
    fmt = args.format or config.get("format", "both")
    written = _write_outputs(result, out_dir, fmt)
    status = "ok"
    code = 0
    if result.numerical_failure:
        status, code = "numerical failure", 3
    elif result.violated:
        status, code = "violated", 1
    print(f"{result.name}: {status} ({', '.join(str(w) for w in written)})")
    return code


if __name__ == "__main__":
    sys.exit(main())
