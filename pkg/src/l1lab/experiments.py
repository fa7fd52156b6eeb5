"""Seeded desk-scale experiments with machine-readable, recomputable verdicts.

Every run is a pure function of its :class:`ExperimentConfig`. Per-trial
randomness comes from ``derive_seed(config.seed, trial_index)``, so a given
config always produces the same records, and every verdict in the result
is a function of those records and the tolerances echoed in the config.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .decomp import SnowflakeParams, laakso_snowflake_lowerbound, snowflake_embed
from .errors import EventNotAchieved, InvalidParameter
from .graphs import (
    hamming_weight,
    laakso,
    random_pointset,
    shortest_path_metric,
    walsh_pointset,
)
from .lower_bounds import (
    LinearMap,
    certify_laakso_embedding,
    heuristic_best_linear,
    hypercube_concentration_check,
    stress_embedding,
    walsh_bound,
    walsh_certificate_residual,
)
from .metric import FiniteMetricSpace, PointSet, doubling_constant
from .realize import l1_realize
from .stable import acceptance_threshold, calibrated_C, derive_seed, embed_theorem1

DEFAULTS = {
    "thm1": {
        "params": {"n": 64, "d": 16, "trials": 50, "J": 10_000, "q": 0.5, "max_tries": 20,
                   "distribution": "gaussian"},
        "tolerances": {"mean_tries_max": 2.5, "mean_avg_expansion_max": 10.0},
    },
    "walsh": {
        "params": {"ks": [1, 2, 3, 4], "ps": [1.0, 1.5], "restarts": 20, "iterations": 400,
                   "residual_ks": [2, 3, 4], "residual_maps": 100},
        "tolerances": {"beat_tol": 1e-6, "attain_tol": 1e-3, "residual_max": 1e-12},
    },
    "laakso": {
        "params": {"levels": [1, 2], "p": 2.0, "realize_levels": [1], "stress_iterations": 500},
        "tolerances": {"doubling_max": 6, "cert_tol": 1e-9, "realize_max": 1 + 1e-6},
    },
    "snowflake": {
        "params": {"eps_grid": [0.5, 0.25, 0.125], "metric": "laakso", "max_level": 3,
                   "path_n": 64, "partitions": 16, "signs": 64},
        "tolerances": {"band_max": 3.0, "lower_bound_tol": 1e-9, "contraction_factor": 0.25},
    },
    "cube": {
        "params": {"ks": [10, 12], "alphas": [1.0, 2.0], "vertices": 4},
        "tolerances": {},
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise InvalidParameter(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            raise InvalidParameter("a seed is required")
        if self.format not in ("json", "csv"):
            raise InvalidParameter(f"unknown format {self.format!r}")
        base = DEFAULTS[self.experiment]
        unknown = set(self.params or {}) - set(base["params"])
        unknown |= set(self.tolerances or {}) - set(base["tolerances"])
        if unknown:
            raise InvalidParameter(f"unknown keys for {self.experiment}: {sorted(unknown)}")
        self.params = {**base["params"], **(self.params or {})}
        self.tolerances = {**base["tolerances"], **(self.tolerances or {})}

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        return cls(**{k: data[k] for k in ("experiment", "seed", "params", "tolerances",
                                            "out", "format") if k in data})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    aggregates: dict
    verdicts: dict

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "records": self.records,
                "aggregates": self.aggregates, "verdicts": self.verdicts,
                "passed": self.passed}


def _verdict(value, tolerance, passed) -> dict:
    return {"value": value, "tolerance": tolerance, "passed": bool(passed)}


def run_thm1(config: ExperimentConfig) -> ExperimentResult:
    P, tol = config.params, config.tolerances
    n = int(P["n"])
    if n < 4:
        raise InvalidParameter("thm1 needs n >= 4")
    C = calibrated_C(1.0, int(P["J"]))
    threshold = acceptance_threshold(n)
    records = []
    for t in range(int(P["trials"])):
        ps = random_pointset(n, int(P["d"]), 1.0, P["distribution"], derive_seed(config.seed, t, 0))
        try:
            res = embed_theorem1(ps, int(P["J"]), derive_seed(config.seed, t, 1),
                                 int(P["max_tries"]), float(P["q"]), C)
            success, tries, rep = True, res.tries_used, res.report
        except EventNotAchieved as exc:
            success, tries, rep = False, int(P["max_tries"]), exc.best.report
        records.append({"trial": t, "success": success, "tries_used": tries,
                        "colipschitz": rep.colipschitz,
                        "scaled_colipschitz": rep.colipschitz / threshold,
                        "lipschitz": rep.lipschitz, "avg_expansion": rep.avg_expansion})
    ok = [r for r in records if r["success"]]
    mean_tries = float(np.mean([r["tries_used"] for r in records]))
    mean_avg = float(np.mean([r["avg_expansion"] for r in ok])) if ok else math.inf
    min_scaled = min((r["scaled_colipschitz"] for r in ok), default=0.0)
    aggregates = {"C": C, "threshold": threshold, "success_rate": len(ok) / len(records),
                  "mean_tries": mean_tries, "mean_avg_expansion": mean_avg,
                  "min_scaled_colipschitz": min_scaled}
    verdicts = {
        "mean_tries": _verdict(mean_tries, tol["mean_tries_max"], mean_tries <= tol["mean_tries_max"]),
        "mean_avg_expansion": _verdict(mean_avg, tol["mean_avg_expansion_max"],
                                       mean_avg <= tol["mean_avg_expansion_max"]),
        "colipschitz_event": _verdict(min_scaled, 1.0, bool(ok) and min_scaled >= 1.0),
    }
    return ExperimentResult(config, records, aggregates, verdicts)


def run_walsh(config: ExperimentConfig) -> ExperimentResult:
    P, tol = config.params, config.tolerances
    if any(k > 6 for k in P["ks"]):
        raise InvalidParameter("walsh search limited to k <= 6")
    records = []
    for a, k in enumerate(P["ks"]):
        for b, p in enumerate(P["ps"]):
            A = walsh_pointset(int(k), float(p))
            L, rep = heuristic_best_linear(A, float(p), int(P["iterations"]), int(P["restarts"]),
                                           derive_seed(config.seed, 0, a, b))
            bound = walsh_bound(int(k), float(p))
            records.append({"kind": "search", "k": int(k), "p": float(p),
                            "distortion": rep.distortion, "bound": bound,
                            "gap": rep.distortion - bound,
                            "residual": walsh_certificate_residual(L, A)})
    for a, k in enumerate(P["residual_ks"]):
        A = walsh_pointset(int(k), 1.0)
        rng = np.random.default_rng(derive_seed(config.seed, 1, a))
        res = [walsh_certificate_residual(LinearMap(rng.standard_normal((A.d, A.d)), 1.0), A)
               for _ in range(int(P["residual_maps"]))]
        records.append({"kind": "residual", "k": int(k), "maps": len(res),
                        "max_residual": float(max(res))})
    search = [r for r in records if r["kind"] == "search"]
    min_gap = min(r["gap"] for r in search)
    attain = [r["gap"] for r in search if r["k"] == 1 and r["p"] == 1.0]
    max_res = max([r["max_residual"] for r in records if r["kind"] == "residual"]
                  + [r["residual"] for r in search])
    verdicts = {
        "never_beats_bound": _verdict(min_gap, tol["beat_tol"], min_gap >= -tol["beat_tol"]),
        "residual": _verdict(max_res, tol["residual_max"], max_res < tol["residual_max"]),
    }
    if attain:
        verdicts["attains_k1_p1"] = _verdict(attain[0], tol["attain_tol"],
                                             abs(attain[0]) <= tol["attain_tol"])
    aggregates = {"min_gap": min_gap, "max_residual": max_res}
    return ExperimentResult(config, records, aggregates, verdicts)


def run_laakso(config: ExperimentConfig) -> ExperimentResult:
    P, tol = config.params, config.tolerances
    p = float(P["p"])
    records = []
    for i in P["levels"]:
        i = int(i)
        if i > 3:
            raise InvalidParameter("exact doubling limited to level <= 3")
        G = laakso(i)
        M = shortest_path_metric(G)
        rec = {"level": i, "n": G.n_vertices}
        rec["doubling"] = doubling_constant(M, "exact") if M.n <= 64 else None
        rec["doubling_greedy"] = doubling_constant(M, "greedy")
        img = stress_embedding(M, iterations=int(P["stress_iterations"]),
                               seed=derive_seed(config.seed, i))
        cert = certify_laakso_embedding(G, PointSet(p, img.coords))
        rec.update({"cert_bound": cert.bound, "cert_achieved": cert.achieved,
                    "cert_passed": cert.passed})
        if i in [int(x) for x in P["realize_levels"]]:
            rec["l1_distortion"] = l1_realize(G, math.inf).distortion
        records.append(rec)
    exact = [r["doubling"] for r in records if r["doubling"] is not None]
    max_doubling = max(exact) if exact else None
    margin = min(r["cert_achieved"] - r["cert_bound"] for r in records)
    l1 = [r["l1_distortion"] for r in records if "l1_distortion" in r]
    verdicts = {
        "doubling": _verdict(max_doubling, tol["doubling_max"],
                             max_doubling is not None and max_doubling <= tol["doubling_max"]),
        "certificate": _verdict(margin, tol["cert_tol"], margin >= -tol["cert_tol"]),
    }
    if l1:
        verdicts["l1_realize"] = _verdict(max(l1), tol["realize_max"], max(l1) <= tol["realize_max"])
    aggregates = {"max_doubling": max_doubling, "min_certificate_margin": margin}
    return ExperimentResult(config, records, aggregates, verdicts)


def _path_metric(n: int) -> FiniteMetricSpace:
    x = np.arange(n, dtype=float)
    return FiniteMetricSpace(list(range(n)), np.abs(x[:, None] - x[None, :]))


def run_snowflake(config: ExperimentConfig) -> ExperimentResult:
    P, tol = config.params, config.tolerances
    grid = [float(e) for e in P["eps_grid"]]
    if any(not 0 < e < 1 for e in grid):
        raise InvalidParameter("eps grid must lie in (0, 1)")
    params = SnowflakeParams(int(P["partitions"]), int(P["signs"]))
    records = []
    for a, eps in enumerate(grid):
        if P["metric"] == "laakso":
            level = min(math.ceil(1 / eps), int(P["max_level"]))
            M = shortest_path_metric(laakso(level))
            lower = laakso_snowflake_lowerbound(level, eps)
        elif P["metric"] == "path":
            level = None
            M = _path_metric(int(P["path_n"]))
            lower = 1.0
        else:
            raise InvalidParameter(f"unknown metric {P['metric']!r}")
        res = snowflake_embed(M, eps, params, derive_seed(config.seed, a))
        rep = res.report
        records.append({"eps": eps, "level": level, "n": M.n, "distortion": rep.distortion,
                        "lipschitz": rep.lipschitz, "colipschitz": rep.colipschitz,
                        "lower_bound": lower, "delta_hat": res.delta_hat, "c_fit": res.c_fit,
                        "scaled_distortion": rep.distortion * math.sqrt(eps),
                        "truncation_error": res.truncation_error,
                        "envelope_violations": len(res.envelope_violations)})
    scaled = [r["scaled_distortion"] for r in records]
    band = max(scaled) / min(scaled)
    lb_margin = min(r["distortion"] - r["lower_bound"] for r in records)
    contraction = min(r["colipschitz"] / (tol["contraction_factor"] * r["delta_hat"])
                      for r in records)
    violations = sum(r["envelope_violations"] for r in records)
    verdicts = {
        "lower_bound": _verdict(lb_margin, tol["lower_bound_tol"], lb_margin >= -tol["lower_bound_tol"]),
        "scaling_band": _verdict(band, tol["band_max"], band <= tol["band_max"]),
        "contraction": _verdict(contraction, 1.0, contraction >= 1.0),
        "envelope": _verdict(violations, 0, violations == 0),
    }
    aggregates = {"band": band, "scaled_distortion": scaled}
    return ExperimentResult(config, records, aggregates, verdicts)


def run_cube(config: ExperimentConfig) -> ExperimentResult:
    P = config.params
    records = []
    for a, k in enumerate(P["ks"]):
        k = int(k)
        if k > 14:
            raise InvalidParameter("cube dimension limited to 14")
        idx = np.arange(2 ** k, dtype=np.uint32)
        rng = np.random.default_rng(derive_seed(config.seed, a))
        centers = [0] + [int(c) for c in rng.integers(0, 2 ** k, int(P["vertices"]) - 1)]
        for c in centers:
            f = hamming_weight(idx ^ np.uint32(c)).astype(float)
            for alpha in P["alphas"]:
                cert = hypercube_concentration_check(f, float(alpha))
                records.append({"k": k, "vertex": c, "alpha": float(alpha),
                                "tail": cert.achieved, "bound": cert.bound,
                                "passed": cert.passed})
    verdicts = {"concentration": _verdict(sum(not r["passed"] for r in records), 0,
                                          all(r["passed"] for r in records))}
    aggregates = {"max_tail_over_bound": max(r["tail"] / r["bound"] for r in records)}
    return ExperimentResult(config, records, aggregates, verdicts)


RUNNERS = {"thm1": run_thm1, "walsh": run_walsh, "laakso": run_laakso,
           "snowflake": run_snowflake, "cube": run_cube}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[config.experiment](config)
