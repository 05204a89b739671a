"""Command-line front end.

Subcommands: validate, importance, cluster, short-delay, simulate, gen-demand.
Exit codes: 0 ok, 1 validation failure, 2 runtime error. All outputs are
deterministic for a fixed config and seed; the only non-reproducible field is
the timestamp inside the simulation summary JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import curves, failure, metrics
from .config import RunConfig, apply_overrides, load_config
from .demand import bin_trips, generate_synthetic_demand, load_profile, load_trips, write_trips
from .errors import (
    DelayAboveThresholdError,
    InvalidProfileError,
    ParseError,
    TransitVulnError,
    ValidationError,
)
from .network import load_network
from .routing import build_path_cache, load_cache, save_cache
from .vulnerability import Disruption, affected_pair_count, psi_short


def _fmt(value) -> str:
    """Full-precision, locale-independent cell formatting."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _load_graph(cfg: RunConfig):
    return load_network(
        cfg.stations,
        cfg.edges,
        cfg.transfers,
        default_transfer_min=cfg.default_transfer_min,
        allow_disconnected=cfg.allow_disconnected,
    )


def _load_demand(cfg: RunConfig, g):
    """(records, drop report or None) from either AFC data or a profile."""
    if cfg.afc is not None:
        return load_trips(cfg.afc)
    profile = load_profile(cfg.demand_profile)
    return generate_synthetic_demand(g, profile, cfg.seed), None


def _binned(cfg: RunConfig, g):
    records, _ = _load_demand(cfg, g)
    matrices, out_of_range = bin_trips(records, cfg.bins.bins())
    return matrices, out_of_range


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    problems = cfg.validate(need_network=True)
    g = None
    if not problems:
        try:
            g = _load_graph(cfg)
        except (ParseError, ValidationError) as exc:
            problems.append(str(exc))
    if g is not None:
        print(f"stations: {g.n_stations}")
        print(f"edges: {len(g.edges)}")
        transfer_stations = sum(1 for s in g.stations if s.is_transfer)
        print(f"transfer stations: {transfer_stations}")
        print(f"transfer arcs: {len(g.transfer_arcs)}")
        print(f"components: {g.component_count()}")
        if cfg.transfers is not None and transfer_stations:
            with open(cfg.transfers, encoding="utf-8") as fh:
                explicit = {
                    row.split(",")[0].strip()
                    for i, row in enumerate(fh)
                    if i > 0 and row.strip()
                }
            print(f"transfer stations with explicit times: {len(explicit)}/{transfer_stations}")
    if cfg.afc is not None and not problems:
        records, report = load_trips(cfg.afc)
        matrices, out_of_range = bin_trips(records, cfg.bins.bins())
        print(f"afc records read: {report.read}")
        print(f"afc records kept: {report.kept}")
        print(f"dropped same origin/destination: {report.dropped_same_od}")
        print(f"dropped bad timestamps: {report.dropped_bad_times}")
        print(f"dropped outside bins: {out_of_range}")
        print(f"bins: {len(matrices)}")
    if cfg.demand_profile is not None and not problems:
        try:
            profile = load_profile(cfg.demand_profile)
            print(f"demand profile: {profile.rule}, {sum(profile.totals)} trips over {len(profile.bins)} bins")
        except (ParseError, InvalidProfileError) as exc:
            problems.append(str(exc))
    for problem in problems:
        print(f"ERROR: {problem}", file=sys.stderr)
    return 1 if problems else 0


def _get_cache(cfg: RunConfig, g):
    """Build the path cache, or reuse a saved one when it matches the graph."""
    if cfg.cache_file and Path(cfg.cache_file).exists():
        try:
            cache = load_cache(cfg.cache_file, g)
        except (ValidationError, ParseError):
            cache = None  # stale or corrupt: rebuild below
        if cache is not None and (cache.k, cache.split_rule, cache.eps_time) == (
            cfg.k,
            cfg.split_rule,
            cfg.eps_time,
        ):
            return cache
    cache = build_path_cache(
        g,
        cfg.k,
        split_rule=cfg.split_rule,
        eps_time=cfg.eps_time,
        workers=cfg.resolved_workers(),
    )
    if cfg.cache_file:
        Path(cfg.cache_file).parent.mkdir(parents=True, exist_ok=True)
        save_cache(cache, cfg.cache_file)
    return cache


def _importance_pipeline(cfg: RunConfig, g):
    matrices, _ = _binned(cfg, g)
    return matrices, _get_cache(cfg, g)


def cmd_importance(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    matrices, cache = _importance_pipeline(cfg, g)
    topo = metrics.topo_metrics(g)
    out = Path(cfg.out_dir)

    metric_rows = []
    per_bin_metrics = []
    for od in matrices:
        rows = metrics.compute_bin_metrics(g, od, cache, topo)
        per_bin_metrics.append(rows)
        for m in rows:
            metric_rows.append(
                [
                    m.bin.label(),
                    m.station,
                    m.weighted_degree,
                    m.flow_betweenness,
                    m.demand_closeness,
                    m.topo_degree,
                    m.topo_betweenness,
                    m.importance,
                ]
            )
    _write_csv(
        out / "metrics.csv",
        [
            "bin_start",
            "station_id",
            "weighted_degree",
            "flow_betweenness",
            "demand_closeness",
            "topo_degree",
            "topo_betweenness",
            "importance",
        ],
        metric_rows,
    )

    series = [
        curves.ImportanceSeries(
            sid,
            tuple((od.bin, rows[i].importance) for od, rows in zip(matrices, per_bin_metrics)),
        )
        for i, sid in enumerate(g.station_ids)
    ]
    _write_csv(
        out / "importance_series.csv",
        ["station_id", "bin_start", "importance"],
        [[s.station, b.label(), v] for s in series for b, v in s.samples],
    )

    ranking_rows = []
    tops = curves.top_m_per_bin(series, cfg.top_m)
    zeta = {s.station: dict((b.label(), v) for b, v in s.samples) for s in series}
    for od, top in zip(matrices, tops):
        label = od.bin.label()
        for rank, sid in enumerate(top, start=1):
            ranking_rows.append([label, rank, sid, zeta[sid][label]])
    _write_csv(out / "ranking.csv", ["bin_start", "rank", "station_id", "importance"], ranking_rows)

    line_rows = []
    for od, rows in zip(matrices, per_bin_metrics):
        for line, agg in sorted(metrics.line_importance(rows, g).items()):
            line_rows.append(
                [
                    od.bin.label(),
                    line,
                    agg.mean_importance,
                    agg.mean_flow_betweenness,
                    agg.mean_closeness,
                    agg.total_weighted_degree,
                ]
            )
    _write_csv(
        out / "line_importance.csv",
        ["bin_start", "line", "mean_importance", "mean_flow_betweenness", "mean_closeness", "total_weighted_degree"],
        line_rows,
    )
    print(f"wrote metrics for {len(matrices)} bins to {out}")
    return 0


def cmd_cluster(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    matrices, cache = _importance_pipeline(cfg, g)
    series = curves.importance_series(g, matrices, cache)
    assignments = curves.cluster_curves(series, cfg.cluster_k, cfg.cluster_linkage)
    out = Path(cfg.out_dir)
    _write_csv(
        out / "clusters.csv",
        ["station_id", "cluster"],
        [[a.station, a.cluster] for a in assignments],
    )
    tree = curves.cluster_tree(series, cfg.cluster_linkage)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "dendrogram.json", "w", encoding="utf-8") as fh:
        json.dump(tree, fh, indent=2, sort_keys=True)
    means = curves.cluster_mean_curves(series, assignments)
    bin_labels = [b.label() for b, _ in series[0].samples]
    _write_csv(
        out / "cluster_means.csv",
        ["cluster", "bin_start", "mean_importance"],
        [
            [label, bin_labels[i], value]
            for label in sorted(means)
            for i, value in enumerate(means[label])
        ],
    )
    print(f"wrote {cfg.cluster_k}-cluster assignment for {len(series)} stations to {out}")
    return 0


def _parse_targets(spec: str, g, matrices, cache) -> list[int]:
    if spec.startswith("top:"):
        m = int(spec.split(":", 1)[1])
        series = curves.importance_series(g, matrices, cache)
        return curves.top_m_per_bin(series, m)[0]
    return [int(part) for part in spec.split(",") if part.strip()]


def cmd_short_delay(cfg: RunConfig, targets_spec: str, delays: list[float], bin_index: int) -> int:
    g = _load_graph(cfg)
    for delay in delays:
        if delay > cfg.tau_star:
            raise DelayAboveThresholdError(
                f"delay {delay} exceeds tau_star {cfg.tau_star}; short-delay only"
            )
    matrices, cache = _importance_pipeline(cfg, g)
    if not 0 <= bin_index < len(matrices):
        raise ValidationError(f"bin index {bin_index} out of range for {len(matrices)} bins")
    od = matrices[bin_index]
    targets = _parse_targets(targets_spec, g, matrices, cache)

    out = Path(cfg.out_dir)
    matrix_rows = []
    long_rows = []
    records = []
    for target in targets:
        row = [target]
        touched = affected_pair_count(g, od, cache, frozenset({target}))
        for delay in delays:
            value = psi_short(
                g, od, cache, Disruption(frozenset({target}), delay, od.bin), tau_star=cfg.tau_star
            )
            row.append(value)
            long_rows.append([target, delay, value])
            records.append(
                {
                    "scenario": f"target-{target}",
                    "bin": od.bin.label(),
                    "delay": delay,
                    "metric": "psi_short",
                    "value": value,
                    "n_stations": g.n_stations,
                    "affected_pairs": touched,
                }
            )
        matrix_rows.append(row)
    _write_csv(
        out / "psi_short_matrix.csv",
        ["target_station"] + [f"delay_{_fmt(d)}" for d in delays],
        matrix_rows,
    )
    _write_csv(out / "psi_short_long.csv", ["target_station", "delay_min", "psi_short"], long_rows)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "psi_short_records.json", "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
    print(f"wrote psi_short for {len(targets)} targets x {len(delays)} delays to {out}")
    return 0


def _run_plan(plan: dict, g, od, cache):
    kind = plan["kind"]
    if kind == "single-station":
        ranking = plan.get("ranking") or failure.rank_stations_by_importance(g, od, cache)
        m = int(plan.get("m", len(ranking)))
        return failure.single_station_attack(
            g, od, [int(s) for s in ranking], m, plan["k"], workers=plan["workers"]
        )
    if kind == "within-line-interval":
        return failure.within_line_interval_attack(
            g,
            od,
            cache,
            plan.get("line_order"),
            plan.get("direction", "from-top-station"),
            plan["k"],
            workers=plan["workers"],
        )
    if kind == "adjacent-interval":
        return failure.adjacent_interval_attack(
            g,
            od,
            cache,
            int(plan.get("width", 2)),
            plan.get("line_order"),
            plan["k"],
            workers=plan["workers"],
        )
    if kind == "cross-line-interval":
        pairs = plan.get("pair_ranking")
        if pairs is None:
            pairs = failure.rank_adjacent_pairs_by_importance(g, od, cache)
        return failure.cross_line_interval_attack(
            g, od, [tuple(int(s) for s in p) for p in pairs], plan["k"], workers=plan["workers"]
        )
    if kind == "line-removal":
        order = plan.get("line_order") or failure.rank_lines_by_importance(g, od, cache)
        return failure.line_removal_attack(g, od, order, plan["k"], workers=plan["workers"])
    raise ValidationError(f"unknown attack kind {kind!r}; expected one of {failure.ATTACK_KINDS}")


def cmd_simulate(cfg: RunConfig, campaign_path: str) -> int:
    try:
        with open(campaign_path, encoding="utf-8") as fh:
            campaign = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot open campaign: {exc}", path=campaign_path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path=campaign_path) from exc
    plans = campaign.get("plans")
    if not plans:
        raise ValidationError("campaign file has no plans")

    g = _load_graph(cfg)
    matrices, cache_full = _importance_pipeline(cfg, g)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary = {}
    records = []
    for i, plan in enumerate(plans):
        plan = dict(plan)
        plan_id = str(plan.get("id", f"plan{i}"))
        bin_index = int(plan.get("bin", 0))
        if not 0 <= bin_index < len(matrices):
            raise ValidationError(f"plan {plan_id}: bin {bin_index} out of range")
        plan.setdefault("kind", "single-station")
        plan["k"] = cfg.k
        plan["workers"] = cfg.resolved_workers()
        if "direction" not in plan:
            plan["direction"] = cfg.direction_mode
        od = matrices[bin_index]
        curve = _run_plan(plan, g, od, cache_full)

        _write_csv(
            out / f"curve_{plan_id}.csv",
            ["plan_id", "step", "removed_ids", "psi_long"],
            [
                [plan_id, step_idx, "|".join(str(s) for s in step.removed), step.value]
                for step_idx, step in enumerate(curve.steps)
            ],
        )
        for step in curve.steps:
            removed = set(step.removed)
            severed = sum(
                1 for (o, d), f in od.flows.items() if f > 0 and (o in removed or d in removed)
            )
            records.append(
                {
                    "scenario": plan_id,
                    "bin": od.bin.label(),
                    "delay": None,
                    "metric": "psi_long",
                    "value": step.value,
                    "n_stations": g.n_stations - len(removed),
                    "affected_pairs": severed,
                }
            )
        drop, at = curve.largest_drop()
        summary[plan_id] = {
            "kind": plan["kind"],
            "bin": bin_index,
            "steps": len(curve.steps),
            "baseline": curve.baseline,
            "final": curve.steps[-1].value,
            "largest_drop": drop,
            "largest_drop_step": at,
            "terminated_early": curve.terminated_early,
        }
        print(f"plan {plan_id}: {len(curve.steps)} steps, largest drop {drop:.6g} at step {at}")

    with open(out / "psi_long_records.json", "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(
            {"generated_at": datetime.now(timezone.utc).isoformat(), "plans": summary},
            fh,
            indent=2,
            sort_keys=True,
        )
    return 0


def cmd_gen_demand(cfg: RunConfig, out_path: str | None) -> int:
    if cfg.demand_profile is None:
        raise InvalidProfileError("gen-demand needs a demand profile in the config")
    g = _load_graph(cfg)
    profile = load_profile(cfg.demand_profile)
    records = generate_synthetic_demand(g, profile, cfg.seed)
    target = Path(out_path) if out_path else Path(cfg.out_dir) / "afc.csv"
    target.parent.mkdir(parents=True, exist_ok=True)
    n = write_trips(records, target)
    print(f"wrote {n} records to {target}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--stations")
    parser.add_argument("--edges")
    parser.add_argument("--transfers")
    parser.add_argument("--afc")
    parser.add_argument("--demand-profile", dest="demand_profile")
    parser.add_argument("--cache-file", dest="cache_file")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--k", type=int)
    parser.add_argument("--tau-star", dest="tau_star", type=float)
    parser.add_argument("--split-rule", dest="split_rule", choices=["inverse", "proportional-direct"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--top-m", dest="top_m", type=int)
    parser.add_argument("--cluster-k", dest="cluster_k", type=int)
    parser.add_argument("--allow-disconnected", dest="allow_disconnected", action="store_const", const=True)


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    override_names = (
        "stations",
        "edges",
        "transfers",
        "afc",
        "demand_profile",
        "cache_file",
        "out_dir",
        "k",
        "tau_star",
        "split_rule",
        "seed",
        "workers",
        "top_m",
        "cluster_k",
        "allow_disconnected",
    )
    overrides = {name: getattr(args, name, None) for name in override_names}
    return apply_overrides(cfg, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transitvuln",
        description="Demand-weighted station importance and failure vulnerability analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="dry-run the loaders and report problems")
    _add_common(p)

    p = sub.add_parser("importance", help="per-bin station metrics, series, and rankings")
    _add_common(p)

    p = sub.add_parser("cluster", help="cluster stations by importance-curve shape")
    _add_common(p)

    p = sub.add_parser("short-delay", help="psi_short matrix over targets and delays")
    _add_common(p)
    p.add_argument("--targets", default="top:15", help="comma-separated ids or top:<m>")
    p.add_argument(
        "--delays", default="5,10,20,40,60", help="comma-separated delays in minutes"
    )
    p.add_argument("--bin", dest="bin_index", type=int, default=0, help="demand bin index")

    p = sub.add_parser("simulate", help="run the attack campaigns in a JSON file")
    _add_common(p)
    p.add_argument("campaign", help="campaign JSON file")

    p = sub.add_parser("gen-demand", help="write synthetic AFC records from a profile")
    _add_common(p)
    p.add_argument("--out", dest="out_path", help="output CSV path (default <out_dir>/afc.csv)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "validate":
            return cmd_validate(cfg)
        problems = cfg.validate(
            need_network=True,
            need_demand=args.command in ("importance", "cluster", "short-delay", "simulate"),
        )
        if args.command == "gen-demand" and cfg.demand_profile is None:
            problems.append("gen-demand needs a demand profile")
        if problems:
            for problem in problems:
                print(f"ERROR: {problem}", file=sys.stderr)
            return 1
        if args.command == "importance":
            return cmd_importance(cfg)
        if args.command == "cluster":
            return cmd_cluster(cfg)
        if args.command == "short-delay":
            delays = [float(part) for part in args.delays.split(",") if part.strip()]
            return cmd_short_delay(cfg, args.targets, delays, args.bin_index)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.campaign)
        if args.command == "gen-demand":
            return cmd_gen_demand(cfg, args.out_path)
        parser.error(f"unhandled command {args.command}")
    except (ParseError, ValidationError, InvalidProfileError, DelayAboveThresholdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TransitVulnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
