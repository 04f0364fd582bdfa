"""End-to-end experiment pipeline, sweeps, and machine-readable reports.

One trial: split the edge pool, build the training subgraph, train the
link predictor, then run one or both calibration arms. The plain arm fits
quantile functions on train+val edge embeddings and calibrates on the
calibration subset; the sampling arm first resamples train/val/calib
edges toward the fitted power law. Both arms of a trial score the exact
same test edges with the same trained base model.

Trials are indexed by (split, repetition); every random stream is derived
from (master seed, indices, purpose tag), so reports are reproducible
from their own config echo.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig, config_echo
from .conformal import conformalize, evaluate
from .errors import DegenerateCalibrationError
from .graph import (
    Graph,
    degree_sequence,
    ensure_features,
    generate_powerlaw_graph,
    inject_cliques,
    load_edge_list,
    load_features,
    negative_sample,
    split_edges,
    training_subgraph,
)
from .model import edge_embeddings, encode_nodes, structural_features, train_link_predictor
from .powerlaw import adaptive_min_tail, fit_power_law
from .quantile import fit_quantile_functions
from .sampling import SamplerConfig, sample_edges
from .seeding import derive_seed


@dataclass(frozen=True)
class TrialRecord:
    arm: str
    split: int
    rep: int
    seed: int
    coverage: Optional[float] = None
    avg_length: Optional[float] = None
    q_hat: Optional[float] = None
    ks_before: Optional[float] = None
    ks_after: Optional[float] = None
    density_after: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ExperimentReport:
    config_echo: dict
    trials: Tuple[TrialRecord, ...]
    summary: dict

    def to_dict(self) -> dict:
        return {
            "config_echo": self.config_echo,
            "trials": [asdict(t) for t in self.trials],
            "summary": self.summary,
        }


@dataclass(frozen=True)
class LambdaSweepRow:
    lam: float
    density: Optional[float]
    ks: Optional[float]
    coverage: Optional[float]
    avg_length: Optional[float]
    n_trials: int
    n_degenerate: int


@dataclass(frozen=True)
class CliqueSweepRow:
    m: int
    n: int
    mean_ks: float
    mean_length: float
    mean_coverage: float


def load_graph(config: RunConfig) -> Graph:
    """Load the configured edge list or synthesize a power-law graph.

    Synthetic graphs get their features before any clique injection, so
    structural features describe the clean base graph and injected edges
    stay feature-independent (mirroring random cliques added to a real
    dataset).
    """
    if config.edge_list:
        with open(config.edge_list, encoding="utf-8") as fh:
            graph = load_edge_list(fh.read())
        if config.feature_file:
            with open(config.feature_file, encoding="utf-8") as fh:
                graph = graph.with_features(load_features(fh.read(), graph.num_nodes))
    else:
        graph = generate_powerlaw_graph(
            config.synth_nodes,
            config.synth_beta,
            config.synth_d_min,
            derive_seed(config.seed, "synth-graph"),
        )
        if config.feature_mode == "structural":
            graph = graph.with_features(
                structural_features(graph, config.feature_dim, derive_seed(config.seed, "features"))
            )
    if config.clique_n > 0:
        graph = inject_cliques(
            graph, config.clique_m, config.clique_n, derive_seed(config.seed, "inject-cliques")
        )
    return ensure_features(graph, config.feature_dim, derive_seed(config.seed, "features"))


def edge_pool(graph: Graph, config: RunConfig):
    """Positive edges plus an equal number of sampled non-edges (fixed once)."""
    positives = sorted(graph.edges)
    negatives = negative_sample(graph, len(positives), derive_seed(config.seed, "negatives"))
    return positives, negatives


def _graph_ks(graph: Graph) -> Optional[float]:
    degrees = degree_sequence(graph, drop_isolated=True)
    if degrees.size < 2 or np.unique(degrees).size < 2:
        return None
    return fit_power_law(degrees, min_tail=adaptive_min_tail(degrees.size)).ks


def _graph_density(num_nodes: int, num_edges: int) -> float:
    return num_edges / (num_nodes * (num_nodes - 1) / 2.0)


class _TrialBase:
    """Shared per-trial state: split, subgraph, trained model, embeddings."""

    def __init__(self, graph, positives, negatives, config: RunConfig, split_idx: int, rep_idx: int):
        self.config = config
        self.split_idx = split_idx
        self.rep_idx = rep_idx
        self.model_seed = derive_seed(config.seed, split_idx, rep_idx, "model")
        split = split_edges(
            positives, negatives, config.ratios, derive_seed(config.seed, split_idx, "split")
        )
        self.split = split
        self.subgraph = training_subgraph(graph, split)
        self.ks_before = _graph_ks(self.subgraph)
        self.params = train_link_predictor(
            self.subgraph, split.train, split.val, config.model, seed=self.model_seed
        )
        self.node_embeddings = encode_nodes(self.params, self.subgraph)

    def embed(self, edges):
        endpoints = np.asarray([(e.u, e.v) for e in edges], dtype=np.int64)
        labels = np.asarray([e.label for e in edges], dtype=np.float64)
        return edge_embeddings(self.node_embeddings, endpoints), labels

    def _calibrated_record(self, arm, train_val, calib, extra):
        z_fit, y_fit = self.embed(train_val)
        qmodel = fit_quantile_functions(
            z_fit,
            y_fit,
            self.config.alpha,
            self.config.quantile,
            seed=derive_seed(self.config.seed, self.split_idx, self.rep_idx, f"quantile-{arm}"),
        )
        z_calib, y_calib = self.embed(calib)
        z_test, y_test = self.embed(self.split.test)
        intervals, q_hat = conformalize(qmodel, z_calib, y_calib, z_test, self.config.alpha)
        report = evaluate(
            intervals, y_test, q_hat=q_hat, alpha=self.config.alpha, calib_size=len(calib)
        )
        return TrialRecord(
            arm=arm,
            split=self.split_idx,
            rep=self.rep_idx,
            seed=self.model_seed,
            coverage=report.empirical_coverage,
            avg_length=report.avg_interval_length,
            q_hat=q_hat,
            ks_before=self.ks_before,
            **extra,
        )

    def run_cqr(self) -> TrialRecord:
        return self._calibrated_record(
            "cqr", self.split.train + self.split.val, self.split.calib,
            {"ks_after": None, "density_after": None},
        )

    def run_sampled(self, lam: Optional[float] = None) -> TrialRecord:
        config = self.config
        sampler = SamplerConfig(
            lam=config.sampler_lambda if lam is None else lam,
            agg=config.sampler_agg,
            mode=config.sampler_mode,
            seed=derive_seed(config.seed, self.split_idx, self.rep_idx, "sampler"),
        )
        try:
            train_s, val_s, calib_s = sample_edges(
                self.split.train, self.split.val, self.split.calib, self.subgraph, sampler
            )
            if not train_s:
                raise DegenerateCalibrationError("sampling removed every training edge")
            sampled_graph = self.subgraph.with_edges(
                {(e.u, e.v) for e in train_s + val_s if e.label == 1}
            )
            record = self._calibrated_record(
                "sampled", train_s + val_s, calib_s,
                {
                    "ks_after": _graph_ks(sampled_graph),
                    "density_after": _graph_density(sampled_graph.num_nodes, sampled_graph.num_edges),
                },
            )
            return record
        except DegenerateCalibrationError as exc:
            return TrialRecord(
                arm="sampled",
                split=self.split_idx,
                rep=self.rep_idx,
                seed=self.model_seed,
                ks_before=self.ks_before,
                error=str(exc),
            )


def _arm_summary(records: Sequence[TrialRecord]) -> Optional[dict]:
    ok = [r for r in records if r.error is None]
    if not ok:
        return None
    coverages = np.array([r.coverage for r in ok])
    lengths = np.array([r.avg_length for r in ok])
    ddof = 1 if len(ok) > 1 else 0
    # infinite lengths (tiny calibration sets) propagate to the mean; their
    # spread is reported as nan
    with np.errstate(invalid="ignore"):
        return {
            "mean_coverage": float(coverages.mean()),
            "std_coverage": float(coverages.std(ddof=ddof)),
            "mean_length": float(lengths.mean()),
            "std_length": float(lengths.std(ddof=ddof)),
            "n_trials": len(ok),
            "n_degenerate": len(records) - len(ok),
        }


def _build_summary(trials: Sequence[TrialRecord]) -> dict:
    arms = {}
    for arm in ("cqr", "sampled"):
        stats = _arm_summary([t for t in trials if t.arm == arm])
        if stats is not None:
            arms[arm] = stats
    headline = arms.get("sampled") or arms.get("cqr") or {}
    improvement = None
    if "cqr" in arms and "sampled" in arms and arms["cqr"]["mean_length"] > 0:
        improvement = (
            (arms["cqr"]["mean_length"] - arms["sampled"]["mean_length"])
            / arms["cqr"]["mean_length"]
            * 100.0
        )
    summary = {
        "mean_coverage": headline.get("mean_coverage"),
        "std_coverage": headline.get("std_coverage"),
        "mean_length": headline.get("mean_length"),
        "std_length": headline.get("std_length"),
        "improvement_pct": improvement,
        "arms": arms,
    }
    return summary


def run_pipeline(config: RunConfig, graph: Optional[Graph] = None) -> ExperimentReport:
    """Run n_splits x n_reps trials of the full pipeline and aggregate.

    A trial that loses its calibration set to sampling is recorded with an
    error and skipped by the aggregates; the sweep is never aborted.
    """
    graph = load_graph(config) if graph is None else ensure_features(
        graph, config.feature_dim, derive_seed(config.seed, "features")
    )
    positives, negatives = edge_pool(graph, config)
    trials: List[TrialRecord] = []
    for split_idx in range(config.n_splits):
        for rep_idx in range(config.n_reps):
            base = _TrialBase(graph, positives, negatives, config, split_idx, rep_idx)
            trials.append(base.run_cqr())
            if config.run_sampled_arm:
                trials.append(base.run_sampled())
    return ExperimentReport(config_echo(config), tuple(trials), _build_summary(trials))


def sweep_lambda(config: RunConfig, lambdas: Sequence[float], graph: Optional[Graph] = None) -> List[LambdaSweepRow]:
    """One sampling-arm run per lambda, reusing each trial's base model.

    The base model does not depend on lambda, so it is trained once per
    trial and shared across the whole grid.
    """
    if not lambdas:
        raise ValueError("sweep_lambda needs at least one lambda value")
    graph = load_graph(config) if graph is None else ensure_features(
        graph, config.feature_dim, derive_seed(config.seed, "features")
    )
    positives, negatives = edge_pool(graph, config)
    per_lambda: dict = {lam: [] for lam in lambdas}
    for split_idx in range(config.n_splits):
        for rep_idx in range(config.n_reps):
            base = _TrialBase(graph, positives, negatives, config, split_idx, rep_idx)
            for lam in lambdas:
                per_lambda[lam].append(base.run_sampled(lam=lam))
    rows = []
    for lam in lambdas:
        records = per_lambda[lam]
        ok = [r for r in records if r.error is None]
        def _mean(attr):
            values = [getattr(r, attr) for r in ok if getattr(r, attr) is not None]
            return float(np.mean(values)) if values else None
        rows.append(
            LambdaSweepRow(
                lam=lam,
                density=_mean("density_after"),
                ks=_mean("ks_after"),
                coverage=_mean("coverage"),
                avg_length=_mean("avg_length"),
                n_trials=len(records),
                n_degenerate=len(records) - len(ok),
            )
        )
    return rows


def sweep_cliques(
    config: RunConfig,
    grid: Sequence[Tuple[int, int]],
    n_variants: int = 5,
    base_graph: Optional[Graph] = None,
) -> List[CliqueSweepRow]:
    """Clique-injection study: per (m, n), average KS and plain-arm length.

    Each grid point gets ``n_variants`` injected graphs; one plain-arm
    trial runs on each and the fitted KS of the full variant graph is
    recorded alongside the interval length. Variant seeds do not depend on
    the grid point, so variant i of every (m, n) shares its base graph,
    negative pool, split, and model streams: grid points differ only by
    the injected cliques.
    """
    if not grid:
        raise ValueError("sweep_cliques needs a non-empty grid")
    base_config = RunConfig(
        **{**_plain_kwargs(config), "clique_m": 0, "clique_n": 0, "n_splits": 1, "n_reps": 1}
    )
    base_graph = load_graph(base_config) if base_graph is None else ensure_features(
        base_graph, config.feature_dim, derive_seed(config.seed, "features")
    )
    rows = []
    for m, n in grid:
        ks_values, lengths, coverages = [], [], []
        for variant in range(n_variants):
            if n > 0:
                variant_graph = inject_cliques(
                    base_graph, m, n, derive_seed(config.seed, "clique-variant", variant)
                )
            else:
                variant_graph = base_graph
            variant_config = RunConfig(
                **{
                    **_plain_kwargs(config),
                    "seed": derive_seed(config.seed, "clique-run", variant),
                    "n_splits": 1,
                    "n_reps": 1,
                    "run_sampled_arm": False,
                }
            )
            positives, negatives = edge_pool(variant_graph, variant_config)
            base = _TrialBase(variant_graph, positives, negatives, variant_config, 0, 0)
            record = base.run_cqr()
            ks_values.append(_graph_ks(variant_graph))
            lengths.append(record.avg_length)
            coverages.append(record.coverage)
        rows.append(
            CliqueSweepRow(
                m=m,
                n=n,
                mean_ks=float(np.mean([k for k in ks_values if k is not None])),
                mean_length=float(np.mean(lengths)),
                mean_coverage=float(np.mean(coverages)),
            )
        )
    return rows


def _plain_kwargs(config: RunConfig) -> dict:
    return {
        "alpha": config.alpha,
        "ratios": config.ratios,
        "seed": config.seed,
        "n_splits": config.n_splits,
        "n_reps": config.n_reps,
        "edge_list": config.edge_list,
        "feature_file": config.feature_file,
        "feature_dim": config.feature_dim,
        "feature_mode": config.feature_mode,
        "synth_nodes": config.synth_nodes,
        "synth_beta": config.synth_beta,
        "synth_d_min": config.synth_d_min,
        "clique_m": config.clique_m,
        "clique_n": config.clique_n,
        "sampler_lambda": config.sampler_lambda,
        "sampler_mode": config.sampler_mode,
        "sampler_agg": config.sampler_agg,
        "run_sampled_arm": config.run_sampled_arm,
        "model": config.model,
        "quantile": config.quantile,
    }


def write_report(report, path) -> None:
    """Serialize a report (or any JSON-ready dict) with stable key order."""
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def write_csv(rows, path) -> None:
    """Flatten sweep rows to CSV: header row, comma separators, '.' decimals."""
    if not rows:
        raise ValueError("no rows to write")
    dicts = [asdict(r) if not isinstance(r, dict) else r for r in rows]
    header = list(dicts[0].keys())
    lines = [",".join(header)]
    for row in dicts:
        lines.append(",".join("" if row[k] is None else str(row[k]) for k in header))
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write csv to {path}: {exc}") from exc
