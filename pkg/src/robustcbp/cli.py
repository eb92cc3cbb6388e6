"""Command-line interface.

Exit codes: 0 success, 1 reproduction mismatch, 2 configuration error,
3 data error, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import fixtures as fx
from .branching import (ControlLaw, FamilyTree, accumulate_stats, empirical_offspring,
                        simulate_cbp)
from .disparity import get_kind
from .dposterior import (asymptotic_summary, build_dposterior, edap, hpd_interval, mdap,
                         prior_from_spec, Prior1D)
from .errors import CBPError, ConfigError, DataError
from .families import family_by_name, TableFamily
from .multitype import (Dirichlet, TwoTypeStats, build_simplex_dposterior, criticality_prob,
                        criticality_standard_error, edap_simplex, edap_standard_error,
                        hpd_region, mdap_simplex, mle_twotype)
from .replication import ReplicationSetup, run_replicates
from .reproduce import TABLE_IDS, reproduce
from .robustness import (alpha_influence, breakdown_scan, contaminated_posterior_stability)

SIG = 6

# Dirichlet rows of the two-type sensitivity sweep.
DIRICHLET_GRID = (
    (1, 1, 1), (0.5, 0.5, 0.5), (1.9268, 2.4512, 0.6220),
    (1, 1, 8), (1, 2, 7), (1, 3, 6), (1, 4, 5), (1, 5, 4), (1, 6, 3), (1, 7, 2), (1, 8, 1),
    (2, 1, 7), (3, 1, 6), (4, 1, 5), (5, 1, 4), (6, 1, 3), (7, 1, 2), (8, 1, 1),
    (2, 7, 1), (3, 6, 1), (4, 5, 1), (5, 4, 1), (6, 3, 1), (7, 2, 1),
)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{SIG}g}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_rows(path: Path, header: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r.get(h)) for h in header])
    path.write_text(buf.getvalue())


def print_rows(header: list[str], rows: list[dict], out=None) -> None:
    out = out or sys.stdout
    table = [header] + [[fmt(r.get(h)) for h in header] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    for row in table:
        print("  ".join(c.rjust(wd) for c, wd in zip(row, widths)), file=out)


def _parse_list(text, cast=float):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    text = str(text).strip()
    if not text:
        return []
    if ":" in text and cast is int and "," not in text:
        a, b = (int(v) for v in text.split(":"))
        return list(range(a, b + 1))
    try:
        return [cast(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def _support_max(specs) -> dict:
    out = {}
    for s in specs or []:
        try:
            k, v = str(s).split("=")
            out[get_kind(k).tag] = int(v)
        except ValueError:
            raise ConfigError(f"bad --support-max {s!r}; expected KIND=K") from None
    return out


def _kinds(cfg, default=("HD", "NED", "KL")):
    ks = cfg.get("kind") or list(default)
    return [get_kind(k).tag for k in ks]


# ---------------------------------------------------------------- subcommands

def cmd_simulate(cfg, out: Path) -> int:
    family = family_by_name(cfg.get("family", "geometric"))
    theta = float(cfg.get("theta", 0.3))
    control = ControlLaw(cfg.get("control", "poisson"), float(cfg.get("control_param", 0.3)))
    alpha = float(cfg.get("alpha", 0.0))
    contamination = (alpha, int(cfg.get("point", 11))) if alpha else None
    tree = simulate_cbp(family, theta, control, int(cfg.get("z0", 1)),
                        int(cfg.get("generations", 45)), int(cfg.get("seed", 0)), contamination)
    stats = accumulate_stats(tree)
    doc = tree.to_dict()
    doc["extinct"] = tree.extinct
    doc["final_z"] = tree.final_size
    write_json(out / "tree.json", doc)
    print(f"generations={tree.n_generations} final_size={tree.final_size} "
          f"extinct={str(tree.extinct).lower()} delta={stats.delta}")
    return 0


def _load_input(cfg):
    if cfg.get("fixture"):
        return fx.load_fixture(cfg["fixture"])
    path = cfg.get("input")
    if not path:
        raise ConfigError("give --fixture or --input")
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from None
    if "generations" in data and isinstance(data["generations"], list):
        return FamilyTree.from_dict(data)
    try:
        return TwoTypeStats(**{k: data[k] for k in
                               ("y1_0", "y1_2", "psi", "delta", "y1_total", "n", "z0")})
    except KeyError as exc:
        raise DataError(f"input lacks field {exc}") from None


def _estimate_1d(tree: FamilyTree, cfg, out: Path) -> dict:
    if cfg.get("generation") is not None:
        tree = tree.truncate(int(cfg["generation"]))
    stats = accumulate_stats(tree)
    family = family_by_name("geometric")
    prior = prior_from_spec(cfg.get("prior", "beta:0.5,0.5"))
    grid = int(cfg.get("grid", 4001))
    smax = _support_max(cfg.get("support_max"))
    level = float(cfg.get("level", 0.95))
    q = empirical_offspring(stats) if stats.delta else np.array([1.0])
    report = {"delta": stats.delta, "y_total": stats.y_total, "generations": stats.generations,
              "y_of_k": stats.y_of_k.tolist(), "prior": [prior.kind, list(prior.params)],
              "results": {}}
    rows = []
    for tag in _kinds(cfg):
        sm = smax.get(tag)
        post = build_dposterior(tag, q, family, stats.delta, prior, grid, sm)
        e, m = edap(post), mdap(post)
        hpd = hpd_interval(post, level)
        res = {"edap": e, "mdap": m.theta, "mdap_multimodal": m.multimodal,
               "mdap_boundary": m.boundary, "hpd": hpd.intervals, "hpd_mass": hpd.mass,
               "support_max": sm,
               "mean_at_edap": float(family.mean(e)), "var_at_edap": float(family.variance(e)),
               "mean_at_mdap": float(family.mean(m.theta)),
               "var_at_mdap": float(family.variance(m.theta))}
        if stats.delta:
            s = asymptotic_summary(tag, q, family, stats.delta, sm)
            res.update(mde=s.mde, curvature=s.curvature, std_error=s.std_error)
        else:
            res.update(mde=None, curvature=None, std_error=None)
        report["results"][tag] = res
        (out / f"posterior_{tag.lower()}.csv").write_text(post.to_csv(SIG))
        rows.append(dict(kind=tag, **{k: v for k, v in res.items() if k != "hpd"},
                         hpd=" ".join(f"[{fmt(a)},{fmt(b)}]" for a, b in hpd.intervals)))
    header = ["kind", "edap", "mdap", "mde", "curvature", "std_error", "hpd",
              "mean_at_edap", "var_at_edap"]
    write_rows(out / "estimates.csv", header, rows)
    print_rows(header, rows)
    return report


def _estimate_2d(stats: TwoTypeStats, cfg, out: Path) -> dict:
    prior = Dirichlet(tuple(_parse_list(cfg.get("dirichlet", "0.5,0.5,0.5"))))
    draws = int(cfg.get("draws", 200_000))
    seed = int(cfg.get("seed", 0))
    level = float(cfg.get("level", 0.95))
    mle = mle_twotype(stats)
    report = {"stats": stats.__dict__, "mle": dict(zip(("p0", "p1", "p2", "gamma"), mle)),
              "prior": list(prior.alphas), "draws": draws, "seed": seed, "results": {}}
    rows = []
    for tag in _kinds(cfg):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            post = build_simplex_dposterior(tag, stats, prior, draws, seed)
            region = hpd_region(post, level)
        e = edap_simplex(post)
        se = edap_standard_error(post)
        m = mdap_simplex(tag, stats, prior)
        res = {"edap": e, "edap_se": se, "mdap": m.p, "mdap_multimodal": m.multimodal,
               "mdap_boundary": m.boundary, "criticality": criticality_prob(post),
               "criticality_se": criticality_standard_error(post),
               "ess": post.effective_sample_size, "converged": post.converged,
               "hpd_threshold": region.threshold, "hpd_mass": region.region_mass,
               "warnings": [str(w.message) for w in caught]}
        report["results"][tag] = res
        (out / f"region_{tag.lower()}.csv").write_text(region.to_csv(SIG))
        rows.append(dict(kind=tag, edap_p0=e[0], edap_p1=e[1], edap_p2=e[2], mdap_p0=m.p[0],
                         mdap_p1=m.p[1], mdap_p2=m.p[2], p_m_gt_1=res["criticality"],
                         ess=res["ess"]))
    header = ["kind", "edap_p0", "edap_p1", "edap_p2", "mdap_p0", "mdap_p1", "mdap_p2",
              "p_m_gt_1", "ess"]
    write_rows(out / "estimates.csv", header, rows)
    print("MLE p0, p1, p2, gamma: " + ", ".join(fmt(v) for v in mle))
    print_rows(header, rows)
    return report


def cmd_estimate(cfg, out: Path) -> int:
    data = _load_input(cfg)
    if isinstance(data, FamilyTree):
        report = _estimate_1d(data, cfg, out)
    else:
        report = _estimate_2d(data, cfg, out)
    write_json(out / "estimates.json", report)
    return 0


def cmd_robustness(cfg, out: Path) -> int:
    family = family_by_name("geometric")
    theta0 = float(cfg.get("theta0", 0.3))
    alpha = float(cfg.get("alpha", 0.15))
    Ls = _parse_list(cfg.get("L", "0:40"), int)
    delta = float(cfg.get("delta", 1e4))
    grid = int(cfg.get("grid", 4001))
    prior = prior_from_spec(cfg.get("prior", "beta:0.5,0.5"))
    estimators = [e.upper() for e in (cfg.get("estimator") or ["EDAP"])]
    kinds = _kinds(cfg)
    alphas = _parse_list(cfg.get("alphas", "0.05,0.15"))
    lmax = int(cfg.get("lmax", 40))

    inf_rows, err_rows = [], []
    sidecar = {"influence": {}, "breakdown": {}}
    for est in estimators:
        for tag in kinds:
            curve = alpha_influence(tag, est, family, theta0, alpha, Ls, delta, prior, grid)
            name = f"{est}_{tag}"
            sidecar["influence"][name] = {"L": curve.L, "if_alpha": curve.values,
                                          "clean": curve.clean_estimate, "errors": curve.errors}
            for L, v in zip(curve.L, curve.values):
                inf_rows.append({"L": int(L), "if_alpha": float(v), "estimator": name})
            for L, msg in curve.errors.items():
                err_rows.append({"L": L, "estimator": name, "error": msg})
            if alphas and lmax >= 0:
                scan = breakdown_scan(tag, est, family, theta0, alphas, lmax, delta, prior, grid)
                sidecar["breakdown"][name] = {"b_hat": scan.b_hat, "argmax_L": scan.argmax_L}
                (out / f"breakdown_{name.lower()}.csv").write_text(scan.to_csv(SIG))
    write_rows(out / "influence.csv", ["L", "if_alpha", "estimator"], inf_rows)
    write_rows(out / "errors.csv", ["L", "estimator", "error"], err_rows)
    if cfg.get("stability_alpha") is not None:
        a = float(cfg["stability_alpha"])
        stab = []
        for tag in kinds:
            d = contaminated_posterior_stability(tag, family, theta0, a, Ls, delta, prior, grid)
            stab += [{"L": L, "l1_distance": v, "kind": tag} for L, v in d.items()]
        write_rows(out / "stability.csv", ["L", "l1_distance", "kind"], stab)
        sidecar["stability"] = stab
    write_json(out / "robustness.json", sidecar)
    for name, b in sidecar["breakdown"].items():
        print(f"{name}: " + ", ".join(f"b({fmt(a)})={fmt(v)}" for a, v in b["b_hat"].items()))
    print(f"influence rows: {len(inf_rows)}; failures: {len(err_rows)}")
    return 0


def cmd_sensitivity(cfg, out: Path) -> int:
    fid = cfg.get("fixture") or "sim-geo45"
    data = fx.load_fixture(fid) if fid in fx.FIXTURE_IDS else _load_input(cfg)
    rows = []
    if isinstance(data, FamilyTree):
        stats = accumulate_stats(data)
        q = empirical_offspring(stats)
        family = family_by_name("geometric")
        smax = _support_max(cfg.get("support_max"))
        grid = int(cfg.get("grid", 4001))
        kinds = _kinds(cfg, ("HD", "NED"))
        pairs = cfg.get("priors")
        pairs = [tuple(float(v) for v in s.split(":")) for s in pairs.split(",")] if pairs \
            else [r[:2] for r in fx.TABLE6]
        for rho, beta in pairs:
            prior = Prior1D.beta(rho, beta)
            pm, pv = prior.moments()
            row = {"rho": rho, "beta": beta, "prior_mean": pm, "prior_var": pv}
            for tag in kinds:
                post = build_dposterior(tag, q, family, stats.delta, prior, grid, smax.get(tag))
                row[f"edap_{tag.lower()}"] = edap(post)
                row[f"mdap_{tag.lower()}"] = mdap(post).theta
            rows.append(row)
        header = ["rho", "beta", "prior_mean", "prior_var"] + \
            [f"{e}_{t.lower()}" for e in ("edap", "mdap") for t in kinds]
    else:
        draws = int(cfg.get("draws", 200_000))
        seed = int(cfg.get("seed", 0))
        kinds = _kinds(cfg)
        for alphas in DIRICHLET_GRID:
            prior = Dirichlet(alphas)
            row = dict(zip(("a1", "a2", "a3"), alphas))
            for tag in kinds:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    e = edap_simplex(build_simplex_dposterior(tag, data, prior, draws, seed))
                m = mdap_simplex(tag, data, prior).p
                for j in range(3):
                    row[f"edap_p{j}_{tag.lower()}"] = e[j]
                    row[f"mdap_p{j}_{tag.lower()}"] = m[j]
            rows.append(row)
        header = ["a1", "a2", "a3"] + [f"{e}_p{j}_{t.lower()}" for t in kinds
                                       for e in ("edap", "mdap") for j in range(3)]
    write_rows(out / "sensitivity.csv", header, rows)
    write_json(out / "sensitivity.json", rows)
    print_rows(header, rows)
    return 0


def cmd_reproduce(cfg, out: Path) -> int:
    tid = cfg.get("table_id")
    if tid not in TABLE_IDS:
        raise ConfigError(f"unknown table id {tid!r}; choose from {', '.join(TABLE_IDS)}")
    cells = reproduce(tid, seed=int(cfg.get("seed", 0)),
                      draws=int(cfg["draws"]) if cfg.get("draws") else None,
                      grid_size=int(cfg.get("grid", 4001)))
    rows = [dict(cell=c.name, computed=c.computed, reference=c.reference,
                 status="PASS" if c.passed else "FAIL") for c in cells]
    print_rows(["cell", "computed", "reference", "status"], rows)
    write_json(out / f"reproduce_{tid}.json", rows)
    ok = all(c.passed for c in cells)
    print(f"{tid}: {sum(c.passed for c in cells)}/{len(cells)} cells pass")
    return 0 if ok else 1


def cmd_replicate(cfg, out: Path) -> int:
    setup = ReplicationSetup(
        theta0=float(cfg.get("theta", 0.3)), rate=float(cfg.get("control_param", 0.3)),
        z0=int(cfg.get("z0", 1)), alpha=float(cfg.get("alpha", 0.15)),
        point=int(cfg.get("point", 11)),
        checkpoints=tuple(_parse_list(cfg.get("checkpoints", "15,30,45"), int)),
        kinds=tuple(_kinds(cfg, ("HD",))),
        prior=prior_from_spec(cfg.get("prior", "beta:0.5,0.5")),
        grid_size=int(cfg.get("grid", 4001)))
    survivors = cfg.get("survivors")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = run_replicates(setup, int(cfg.get("seed", 0)), int(cfg.get("replicates", 200)),
                             int(survivors) if survivors else None,
                             workers=int(cfg.get("workers", 1)))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    header = ["replicate", "n", "kind", "delta", "edap", "mdap", "mde", "abs_err_edap",
              "scaled_gap", "l1_phat"]
    write_rows(out / "replicates.csv", header, res.rows)
    agg = res.aggregate()
    agg_header = ["n", "kind", "replicates", "median_abs_err_edap", "median_scaled_gap",
                  "median_l1_phat"]
    write_rows(out / "aggregate.csv", agg_header, agg)
    write_json(out / "replicate.json", {"attempted": res.attempted, "survivors": res.survivors,
                                        "discard_rate": res.discard_rate, "aggregate": agg,
                                        "tau_m": setup.criticality_index(),
                                        "warnings": [str(w.message) for w in caught]})
    print(f"attempted={res.attempted} survivors={res.survivors} "
          f"discard_rate={fmt(res.discard_rate)}")
    print_rows(agg_header, agg)
    return 0


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "robustness": cmd_robustness,
            "sensitivity": cmd_sensitivity, "reproduce": cmd_reproduce,
            "replicate": cmd_replicate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory (default: current directory)")
    g.add_argument("--config", help="JSON file with option defaults")
    g.add_argument("--fixture", choices=fx.FIXTURE_IDS)
    g.add_argument("--kind", action="append", type=str.upper, choices=["KL", "HD", "NED"])
    g.add_argument("--grid", type=int, help="odd number of grid points")
    g.add_argument("--draws", type=int, help="Monte Carlo draws (two-type model)")

    p = argparse.ArgumentParser(prog="robustcbp", description=__doc__.splitlines()[0],
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate a family tree")
    s.add_argument("--family")
    s.add_argument("--theta", type=float)
    s.add_argument("--control", choices=["poisson", "binomial", "identity"])
    s.add_argument("--control-param", type=float)
    s.add_argument("--z0", type=int)
    s.add_argument("--generations", type=int)
    s.add_argument("--alpha", type=float, help="contamination weight")
    s.add_argument("--point", type=int, help="contamination point")

    s = sub.add_parser("estimate", parents=[common], help="EDAP, MDAP, HPD and MDE")
    s.add_argument("--input", help="tree JSON or two-type statistics JSON")
    s.add_argument("--prior", help="beta:a,b or uniform (one-parameter family)")
    s.add_argument("--dirichlet", help="a1,a2,a3 (two-type model)")
    s.add_argument("--generation", type=int, help="use the first n generations only")
    s.add_argument("--support-max", action="append", help="KIND=K: sum k<=K, no tail")
    s.add_argument("--level", type=float)

    s = sub.add_parser("robustness", parents=[common], help="influence and breakdown scans")
    s.add_argument("--theta0", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--L", help="list a,b,c or range a:b")
    s.add_argument("--delta", type=float)
    s.add_argument("--prior")
    s.add_argument("--estimator", action="append", type=str.upper,
                   choices=["EDAP", "MDAP", "MDE"])
    s.add_argument("--alphas", help="breakdown alpha list")
    s.add_argument("--lmax", type=int)
    s.add_argument("--stability-alpha", type=float)

    s = sub.add_parser("sensitivity", parents=[common], help="prior sensitivity table")
    s.add_argument("--input")
    s.add_argument("--priors", help="rho:beta,rho:beta,...")
    s.add_argument("--support-max", action="append")

    s = sub.add_parser("reproduce", parents=[common], help="compare with reference tables")
    s.add_argument("table_id", choices=TABLE_IDS)

    s = sub.add_parser("replicate", parents=[common], help="replicated simulation study")
    s.add_argument("--replicates", type=int)
    s.add_argument("--survivors", type=int, help="keep simulating until this many survive")
    s.add_argument("--checkpoints")
    s.add_argument("--theta", type=float)
    s.add_argument("--control-param", type=float)
    s.add_argument("--z0", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--point", type=int)
    s.add_argument("--prior")
    s.add_argument("--workers", type=int)
    return p


def _config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for k, v in vars(args).items():
        if v is not None and k != "config":
            cfg[k] = v
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        out = Path(cfg.get("out") or ".")
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from None
        return COMMANDS[args.command](cfg, out)
    except CBPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
