"""Stage orchestration: manifest in, CSV tables and a run manifest out."""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .analytics import (AssortativityCell, TypeProfile, assortativity_by_ring, cluster_profiles,
                        hashtag_activation_stats, tweet_type_profiles, type_counts)
from .dynamic import (DynamicsReport, build_snapshots, dynamics_report, parse_step, population_dynamics,
                      step_name)
from .ingest import DatasetManifest, IngestionError, profile_from_row, format_rfc3339, parse_timeline_file
from .labeling import (FileProvider, MergedProvider, evaluate_predictions, keyword_match, label_users,
                       load_keywords, parse_expr, read_truth)
from .model import CircleStructure, Tie, UserProfile
from .preprocess import (Engagement, Observability, Regularity, abandonment_check, activity_features,
                         classify_observability, classify_regularity, detect_frequency_outliers,
                         stationarity_profile, weekly_counts)
from .static import active_network, build_ties, extract_circles, population_summary
from .stats import mean_ci

log = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "manifest": None,
    "seed": 0,
    "jobs": 1,
    "preprocess": {
        "grace_days": 182.625,
        "regularity_bin_days": 3.0,
        "regularity_threshold": 0.5,
        "dbscan_eps": 0.5,
        "dbscan_min_pts": 4,
        "min_span_years": 1.0,
        "stationarity_weeks": 80,
    },
    "label": {"expr": "g|k", "invert_b": False, "providers": [], "truth": None, "keywords": None},
    "static": {
        "bandwidth": 0.05,
        "bandwidth_floor": 0.05,
        "transform": "log1p",
        "min_frequency": 1.0,
        "min_duration_years": 1.0,
    },
    "dynamic": {
        "window": "12m",
        "steps": ["12m", "1m"],
        "n_rings": 5,
        "min_span_years": 2.0,
        "min_frequency": 1.0,
        "require_tau_match": True,
    },
    "assortativity": {"labels": None, "max_ring": 6},
    "profiles": {"groups": None, "k_min": 2, "k_max": 6, "restarts": 50},
}

STAGES = ("ingest", "filter", "label", "extract", "dynamics", "hashtags", "assortativity",
          "profiles", "report")
REQUIRES = {
    "filter": ("ingest.csv", "ingest"),
    "label": ("ingest.csv", "ingest"),
    "extract": ("filter.csv", "filter"),
    "dynamics": ("circles.csv", "extract"),
    "hashtags": ("rings.csv", "extract"),
    "assortativity": ("rings.csv", "extract"),
    "profiles": ("ingest.csv", "ingest"),
    "report": ("circles.csv", "extract"),
}
PATH_KEYS = (("manifest",), ("label", "truth"), ("label", "keywords"),
             ("assortativity", "labels"), ("profiles", "groups"))


class DependencyError(RuntimeError):
    """An upstream stage has not produced its artifact yet."""


class DataError(ValueError):
    """Input files are malformed or inconsistent."""


# --- config -----------------------------------------------------------------

def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if key not in base:
            raise ValueError(f"unknown config key {where}{key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ValueError(f"config key {where}{key!r} must be an object")
            out[key] = _merge(base[key], value, f"{where}{key}.")
        else:
            out[key] = value
    return out


def load_config(path=None, overrides: Optional[dict] = None) -> dict:
    """Defaults, then the JSON file at ``path``, then ``overrides``.

    Relative paths in the file resolve against the file's directory.
    """
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        path = Path(path)
        raw = json.loads(path.read_text())
        cfg = _merge(cfg, raw)
        base = path.parent
        for keys in PATH_KEYS:
            _resolve(cfg, keys, base)
        cfg["label"]["providers"] = [str(base / p) for p in cfg["label"]["providers"]]
    if overrides:
        cfg = _merge(cfg, overrides)
    return cfg


def _resolve(cfg, keys, base):
    node = cfg
    for k in keys[:-1]:
        node = node[k]
    if node[keys[-1]]:
        node[keys[-1]] = str(base / node[keys[-1]])


# --- per-ego pass -----------------------------------------------------------

@dataclass
class EgoSummary:
    user_id: str
    n_records: int
    type_counts: tuple
    first_ts: str = ""
    last_ts: str = ""
    span_years: float = 0.0
    observability: Optional[str] = None
    engagement: Optional[str] = None
    insufficient_history: bool = False
    regularity: Optional[str] = None
    features: Optional[tuple] = None
    weekly: Optional[np.ndarray] = None
    total_alters: int = 0
    ties: tuple = ()
    structure: Optional[CircleStructure] = None
    dynamics: dict = field(default_factory=dict)


def summarize_ego(path, manifest: DatasetManifest, cfg: dict, steps: Sequence[str] = ()) -> EgoSummary:
    """Everything later stages need from one timeline, computed in one read."""
    t = parse_timeline_file(path, manifest, profiles={})
    recs = t.interactions
    counts = tuple(int(c) for c in type_counts(t))
    if not recs:
        return EgoSummary(t.user_id, 0, counts)
    pre = cfg["preprocess"]
    st = cfg["static"]
    dyn = cfg["dynamic"]
    s = EgoSummary(t.user_id, len(recs), counts, format_rfc3339(recs[0].timestamp),
                   format_rfc3339(recs[-1].timestamp), t.observed_span_years)
    s.observability = classify_observability(t).value
    check = abandonment_check(t, pre["grace_days"])
    s.engagement = check.engagement.value
    s.insufficient_history = check.insufficient_history
    if t.observed_span.total_seconds() > 0:
        s.regularity = classify_regularity(t, pre["regularity_bin_days"], pre["regularity_threshold"]).value
    else:
        s.regularity = Regularity.SPORADIC.value
    s.features = activity_features(t)
    if s.observability == Observability.FULLY_OBSERVED.value:
        s.weekly = weekly_counts(t)

    ties = build_ties(t)
    net = active_network(ties, t.download_time, st["min_frequency"], st["min_duration_years"], t.user_id)
    s.total_alters = len(ties)
    s.ties = net.ties
    s.structure = extract_circles(net, st["bandwidth"], transform=st["transform"],
                                  floor=st["bandwidth_floor"])
    n_rings = int(dyn["n_rings"])
    if steps and (not dyn["require_tau_match"] or s.structure.tau == n_rings):
        window = parse_step(dyn["window"])
        for name in steps:
            series = build_snapshots(t, window, parse_step(name), n_rings,
                                     min_span_years=dyn["min_span_years"],
                                     min_frequency=dyn["min_frequency"],
                                     transform=st["transform"])
            if series is not None and len(series.snapshots) >= 2:
                s.dynamics[name] = dynamics_report(series)
    return s


def _summarize_task(args):
    path, manifest, cfg, steps = args
    try:
        return summarize_ego(path, manifest, cfg, steps)
    except (IngestionError, ValueError) as exc:
        raise DataError(str(exc)) from exc


def summarize_all(manifest: DatasetManifest, cfg: dict, steps: Sequence[str] = ()) -> list[EgoSummary]:
    tasks = [(str(p), manifest, cfg, tuple(steps)) for p in manifest.timeline_paths]
    jobs = int(cfg.get("jobs") or 1)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_summarize_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        out = [_summarize_task(t) for t in tasks]
    seen = set()
    for s in out:
        if s.user_id in seen:
            raise DataError(f"ego {s.user_id!r} appears in several timeline files")
        seen.add(s.user_id)
    return sorted(out, key=lambda s: s.user_id)


# --- table helpers ----------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.12g}"
    if isinstance(v, (tuple, list)):
        return ";".join(fmt(x) for x in v)
    return str(v)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            n += 1
    return n


def read_table(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ("true", "1", "yes")


# --- the pipeline -----------------------------------------------------------

class Pipeline:
    """Runs stages against one output directory.

    Per-ego summaries are computed lazily at most once per instance, so
    ``run("all")`` reads every timeline a single time.
    """

    def __init__(self, cfg: dict, out, manifest_path=None):
        self.cfg = cfg
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.primary: dict[str, str] = {}
        self._summaries: Optional[list[EgoSummary]] = None
        self._steps: tuple = ()
        self._run = self._load_run_manifest()
        mpath = manifest_path or cfg.get("manifest") or self._run.get("manifest")
        self.manifest_path = str(mpath) if mpath else None

    # run manifest
    def _load_run_manifest(self) -> dict:
        p = self.out / "run_manifest.json"
        if p.exists():
            try:
                return json.loads(p.read_text())
            except json.JSONDecodeError:
                log.warning("ignoring unreadable %s", p)
        return {}

    def _save_run_manifest(self, stage: str, info: dict) -> None:
        import sklearn

        run = self._run
        run["manifest"] = self.manifest_path
        run["config"] = self.cfg
        run["seed"] = self.cfg["seed"]
        run["versions"] = {"egocircles": __version__, "python": platform.python_version(),
                           "numpy": np.__version__, "scikit-learn": sklearn.__version__}
        run.setdefault("stages", {})[stage] = info
        (self.out / "run_manifest.json").write_text(json.dumps(run, indent=2, sort_keys=True) + "\n")

    def _path(self, name: str) -> Path:
        return self.out / self.primary.get(name, name)

    def _require(self, stage: str) -> None:
        need = REQUIRES.get(stage)
        if need and not self._path(need[0]).exists():
            raise DependencyError(f"stage {stage!r} needs {need[0]} in {self.out}; "
                                  f"run the {need[1]!r} stage first")

    def _manifest(self) -> DatasetManifest:
        if not self.manifest_path:
            raise DataError("no dataset manifest given (use --manifest or the config 'manifest' key)")
        try:
            return DatasetManifest.load(self.manifest_path)
        except IngestionError as exc:
            raise DataError(str(exc)) from exc

    def summaries(self, steps: Sequence[str] = ()) -> list[EgoSummary]:
        steps = tuple(steps)
        if self._summaries is None or not set(steps) <= set(self._steps):
            want = tuple(dict.fromkeys((*self._steps, *steps)))
            self._summaries = summarize_all(self._manifest(), self.cfg, want)
            self._steps = want
        return self._summaries

    def run(self, stage: str, **kw) -> dict:
        if stage == "all":
            steps = tuple(self.cfg["dynamic"]["steps"])
            self.summaries(steps)
            result = {}
            for name in STAGES:
                result[name] = self.run(name)
            return result
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self._require(stage)
        info = getattr(self, f"stage_{stage}")(**kw)
        self._save_run_manifest(stage, info)
        return info

    # stages
    def stage_ingest(self) -> dict:
        rows = []
        for s in self.summaries():
            rows.append((s.user_id, s.n_records, *s.type_counts, s.first_ts, s.last_ts, s.span_years))
        n = write_table(self._path("ingest.csv"),
                        ("user_id", "n_records", "reply", "mention", "retweet", "indirect",
                         "first_ts", "last_ts", "span_years"), rows)
        return {"outputs": [self.primary.get("ingest.csv", "ingest.csv")], "egos": n,
                "interactions": sum(r[1] for r in rows)}

    def stage_filter(self) -> dict:
        pre = self.cfg["preprocess"]
        summaries = self.summaries()
        feats = {s.user_id: s.features for s in summaries if s.features is not None}
        outliers = set()
        if len(feats) >= 2:
            outliers = detect_frequency_outliers(feats, pre["dbscan_eps"], int(pre["dbscan_min_pts"]))
        ledger = {"input": len(summaries), "dropped_empty": 0, "dropped_abandoned": 0,
                  "dropped_sporadic": 0, "dropped_short_span": 0, "dropped_outlier": 0, "retained": 0}
        rows = []
        for s in summaries:
            outlier = s.user_id in outliers
            if s.n_records == 0:
                reason = "empty"
            elif s.engagement != Engagement.ACTIVE.value:
                reason = "abandoned"
            elif s.regularity != Regularity.REGULAR.value:
                reason = "sporadic"
            elif s.span_years < pre["min_span_years"]:
                reason = "short_span"
            elif outlier:
                reason = "outlier"
            else:
                reason = ""
            ledger[f"dropped_{reason}" if reason else "retained"] += 1
            rows.append((s.user_id, s.observability or "", s.engagement or "", s.regularity or "",
                         outlier, not reason, s.span_years, reason))
        write_table(self._path("filter.csv"),
                    ("user_id", "observability", "engagement", "regularity", "outlier", "retained",
                     "span_years", "drop_reason"), rows)
        assert ledger["input"] == sum(v for k, v in ledger.items() if k != "input")

        profile = stationarity_profile((s.weekly for s in summaries if s.weekly is not None),
                                       int(pre["stationarity_weeks"]))
        n_users = sum(1 for s in summaries if s.weekly is not None)
        write_table(self.out / "stationarity.csv", ("week", "mean_normalized", "n_users"),
                    ((i, v, n_users) for i, v in enumerate(profile)))
        self._run["filter_ledger"] = ledger
        return {"outputs": [self.primary.get("filter.csv", "filter.csv"), "stationarity.csv"],
                "ledger": ledger}

    def _retained(self) -> list[EgoSummary]:
        keep = {r["user_id"] for r in read_table(self._path("filter.csv")) if _parse_bool(r["retained"])}
        return [s for s in self.summaries() if s.user_id in keep]

    def stage_label(self, expr=None, providers=None, truth=None, invert_b=None) -> dict:
        lab = self.cfg["label"]
        expr = expr or lab["expr"]
        providers = providers if providers is not None else lab["providers"]
        truth = truth or lab["truth"]
        invert_b = lab["invert_b"] if invert_b is None else invert_b
        parse_expr(expr)  # malformed expressions are usage errors, raised before any I/O
        keywords = load_keywords(lab["keywords"]) if lab["keywords"] else load_keywords()
        ids = [r["user_id"] for r in read_table(self._path("ingest.csv"))]
        try:
            provider = MergedProvider([FileProvider(p) for p in providers]) if providers else None
            profiles = _load_profiles(self._manifest().profile_path, set(ids))
            verdicts = label_users(profiles, expr, provider, keywords, invert_b, ids)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc)) from exc
        write_table(self._path("verdicts.csv"), ("user_id", "k", "g", "is_bot", "journalist"),
                    ((v.user_id, v.k, v.g, v.is_bot, v.journalist) for v in verdicts))
        info = {"outputs": [self.primary.get("verdicts.csv", "verdicts.csv")], "expr": expr,
                "journalists": sum(v.journalist for v in verdicts)}
        if truth:
            try:
                actual = read_truth(truth)
                predicted = {v.user_id: v.journalist for v in verdicts if v.user_id in actual}
                report = evaluate_predictions(predicted, {u: actual[u] for u in predicted})
            except (OSError, ValueError) as exc:
                raise DataError(str(exc)) from exc
            payload = {"expr": expr, "invert_b": invert_b, **report.as_dict()}
            (self.out / "label_report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
            info["outputs"].append("label_report.json")
            info["evaluation"] = report.as_dict()
        return info

    def stage_extract(self) -> dict:
        retained = self._retained()
        circ_rows, ring_rows = [], []
        structures = []
        for s in retained:
            cs = s.structure
            structures.append(cs)
            circ_rows.append((s.user_id, cs.tau, cs.circle_sizes, cs.scaling_ratios, cs.active_size,
                              s.total_alters, cs.bandwidth, cs.degenerate))
            freqs = {x.alter_id: x.frequency for x in s.ties}
            for i, ring in enumerate(cs.ring_members):
                for a in sorted(ring):
                    ring_rows.append((s.user_id, i + 1, a, freqs[a]))
        write_table(self._path("circles.csv"),
                    ("ego_id", "tau", "sizes", "ratios", "active_size", "total_alters", "bandwidth",
                     "degenerate"), circ_rows)
        write_table(self.out / "rings.csv", ("ego_id", "ring", "alter_id", "frequency"), ring_rows)
        info = {"outputs": [self.primary.get("circles.csv", "circles.csv"), "rings.csv",
                            "circles_summary.csv"], "egos": len(circ_rows)}
        summary_rows = []
        nonempty = [c for c in structures if c.tau > 0]
        if nonempty:
            pop = population_summary(nonempty)
            for tau, cohort in pop.cohorts.items():
                for i in range(tau):
                    summary_rows.append((tau, cohort.n_egos, i + 1, cohort.size_mean[i], cohort.size_ci[i],
                                         cohort.ratio_mean[i - 1] if i else None,
                                         cohort.ratio_ci[i - 1] if i else None))
            info["population"] = {"egos": pop.n_egos, "tau_mode": pop.tau_mode, "tau_mean": pop.tau_mean,
                                  "tau_median": pop.tau_median,
                                  "tau_counts": {str(k): v for k, v in pop.tau_counts.items()},
                                  "active_size_mean": pop.active_size_mean,
                                  "active_size_ci": pop.active_size_ci}
        write_table(self.out / "circles_summary.csv",
                    ("tau", "n_egos", "circle", "size_mean", "size_ci", "ratio_mean", "ratio_ci"),
                    summary_rows)
        return info

    def _extracted_ids(self) -> set[str]:
        return {r["ego_id"] for r in read_table(self._path("circles.csv"))}

    def _structures(self) -> list[CircleStructure]:
        """Rebuild ring structures from rings.csv and circles.csv."""
        rings: dict[str, dict[int, set]] = {}
        for r in read_table(self.out / "rings.csv"):
            rings.setdefault(r["ego_id"], {}).setdefault(int(r["ring"]), set()).add(r["alter_id"])
        out = []
        for r in read_table(self._path("circles.csv")):
            tau = int(r["tau"])
            by = rings.get(r["ego_id"], {})
            out.append(CircleStructure.from_rings(r["ego_id"], [by.get(i, set()) for i in range(1, tau + 1)]))
        return out

    def stage_dynamics(self, steps=None, n_rings=None) -> dict:
        if n_rings is not None:
            self.cfg["dynamic"]["n_rings"] = int(n_rings)
            self._summaries = None
        steps = tuple(steps or self.cfg["dynamic"]["steps"])
        for name in steps:
            parse_step(name)
        ids = self._extracted_ids()
        reports: list[DynamicsReport] = []
        for s in self.summaries(steps):
            if s.user_id in ids:
                reports.extend(s.dynamics[n] for n in steps if n in s.dynamics)
        order = {n: i for i, n in enumerate(steps)}
        reports.sort(key=lambda r: (order[step_name(r.step)], r.ego_id))
        rows = []
        for r in reports:
            for i in range(r.n_rings):
                rows.append((r.ego_id, step_name(r.step), i + 1, r.jaccard[i], r.jump[i], r.windows_used))
        write_table(self._path("dynamics.csv"), ("ego_id", "step", "ring", "jaccard", "jump", "T"), rows)
        curves = population_dynamics(reports)
        write_table(self.out / "dynamics_summary.csv",
                    ("step", "ring", "n_egos", "jaccard_mean", "jaccard_ci", "jump_mean", "jump_ci"),
                    ((c.step, c.ring, c.n_egos, c.jaccard_mean, c.jaccard_ci, c.jump_mean, c.jump_ci)
                     for c in curves))
        return {"outputs": [self.primary.get("dynamics.csv", "dynamics.csv"), "dynamics_summary.csv"],
                "steps": list(steps), "egos": len({r.ego_id for r in reports})}

    def stage_hashtags(self) -> dict:
        structures = self._structures()
        ids = {c.ego_id for c in structures}
        ties = [x for s in self.summaries() if s.user_id in ids for x in s.ties]
        stats = hashtag_activation_stats(structures, ties)
        rows = [("all", stats.n_ties, stats.n_activated, stats.pct_activated) + (None,) * 9]
        for r in stats.rings:
            rows.append((r.ring, r.n_ties, r.n_activated, r.pct_activated, r.pct_ci,
                         r.hashtags_activated, r.hashtags_activated_ci, r.hashtags_other, r.hashtags_other_ci,
                         r.freq_activated, r.freq_activated_ci, r.freq_other, r.freq_other_ci))
        write_table(self._path("hashtags.csv"),
                    ("ring", "n_ties", "n_activated", "pct_activated", "pct_ci",
                     "hashtags_activated", "hashtags_activated_ci", "hashtags_other", "hashtags_other_ci",
                     "freq_activated", "freq_activated_ci", "freq_other", "freq_other_ci"), rows)
        return {"outputs": [self.primary.get("hashtags.csv", "hashtags.csv")],
                "pct_activated": stats.pct_activated}

    def stage_assortativity(self, labels=None, max_ring=None) -> dict:
        cfg = self.cfg["assortativity"]
        labels = labels or cfg["labels"]
        max_ring = int(max_ring or cfg["max_ring"])
        structures = self._structures()
        needed = {c.ego_id for c in structures} | {a for c in structures for r in c.ring_members for a in r}
        try:
            profiles = _load_profiles(self._manifest().profile_path, needed)
            if labels:
                alter_labels = read_truth(labels)
                source = str(labels)
            else:
                kw = load_keywords(self.cfg["label"]["keywords"]) if self.cfg["label"]["keywords"] else load_keywords()
                alter_labels = {u: keyword_match(p, kw) for u, p in profiles.items()}
                source = "keywords"
        except (OSError, ValueError) as exc:
            raise DataError(str(exc)) from exc
        cells = assortativity_by_ring(structures, profiles, alter_labels, max_ring)
        write_table(self._path("assortativity.csv"), ("ring", "category", "tau", "p_value", "n", "reported"),
                    ((c.ring, c.category, c.tau, c.p_value, c.n, c.reported) for c in cells))
        return {"outputs": [self.primary.get("assortativity.csv", "assortativity.csv")],
                "label_source": source, "cells": len(cells), "reported": sum(c.reported for c in cells)}

    def stage_profiles(self, groups=None) -> dict:
        cfg = self.cfg["profiles"]
        groups = groups or cfg["groups"]
        rows = read_table(self._path("ingest.csv"))
        counts = {r["user_id"]: [int(r[k]) for k in ("reply", "mention", "retweet", "indirect")] for r in rows}
        if groups:
            try:
                grouping = {r["user_id"]: r["group"] for r in read_table(Path(groups))}
            except (OSError, KeyError) as exc:
                raise DataError(f"cannot read groups file {groups}: {exc}") from exc
        else:
            grouping = {u: u for u in counts}
        profiles = tweet_type_profiles(counts, grouping)
        info = {"outputs": [self.primary.get("type_profiles.csv", "type_profiles.csv"), "profile_silhouette.csv"],
                "groups": len(profiles)}
        labels, coords, scores, chosen = {}, {}, {}, None
        if len(profiles) >= 3:
            res = cluster_profiles(profiles, range(int(cfg["k_min"]), int(cfg["k_max"]) + 1),
                                   seed=int(self.cfg["seed"]), restarts=int(cfg["restarts"]))
            labels = dict(zip(res.groups, res.labels))
            coords = dict(zip(res.groups, res.coords))
            scores, chosen = res.scores, res.k
            info.update({"k": res.k, "silhouette": res.silhouette, "degenerate": res.degenerate})
        write_table(self._path("type_profiles.csv"),
                    ("group", "reply", "mention", "retweet", "indirect", "n_tweets", "n_users",
                     "cluster", "pc1", "pc2"),
                    ((p.group, *p.percentages, p.n_tweets, p.n_users, labels.get(p.group),
                      *(coords.get(p.group) or (None, None))) for p in profiles))
        write_table(self.out / "profile_silhouette.csv", ("k", "silhouette", "chosen"),
                    ((k, v, k == chosen) for k, v in sorted(scores.items())))
        return info

    def stage_report(self) -> dict:
        from .plots import emit_plots

        written = emit_plots(self.out)
        return {"outputs": written}


def _load_profiles(path, ids: set) -> dict[str, UserProfile]:
    """Profiles of ``ids`` only, streamed from the profile table."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, 2):
            if row.get("user_id") in ids:
                try:
                    out[row["user_id"]] = profile_from_row(row)
                except (KeyError, ValueError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
    return out
