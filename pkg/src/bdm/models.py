"""Catalog of worked analyses with their reference values.

Each entry binds data (raw observations or sufficient statistics), a
posterior, a hypothesis and the evidence measures to compute, together with
the reference values and tolerance bands the computation must land in.
Model builders (posterior + hypothesis + null curves by name) are shared with
the command-line front end.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discrepancy import Threshold, partition_bdm, scalar_bdm
from .fbst import NullCurve, ReferenceFunction, e_value_mc, e_value_scalar
from .numerics import DEFAULT_QUADRATURE, DomainError, Interval, QuadratureSpec, RngStream, maximize_1d
from .posteriors import (
    JointPosterior,
    PartitioningHypothesis,
    ScalarPosterior,
    beta_posterior,
    comparison_hypothesis,
    coordinate_hypothesis,
    exp_jeffreys_posterior,
    gamma_posterior,
    ig_mean_posterior,
    ig_posterior,
    normal_approx_posterior,
    normal_gamma_posterior,
    partition_probabilities,
    poisson_jeffreys_posterior,
    section_hypothesis,
    two_population,
)

__all__ = [
    "AnalysisReport",
    "CatalogEntry",
    "DataError",
    "EngineConfig",
    "Expected",
    "UnknownEntryError",
    "catalog",
    "catalog_manifest",
    "entry_problem",
    "gamma_mle",
    "get_entry",
    "joint_hypothesis",
    "joint_model",
    "list_entries",
    "run_entry",
    "scalar_model",
    "stats_from_data",
    "two_population_model",
    "validate_stats",
]


# ------------------------------------------------------------------- data

EX3_DATA = (0.8, 1.1, 1.2, 1.4, 1.8, 2.0, 4.0, 5.0, 8.0)
EX3_PRINTED_MLE = (1.921, 0.7572)

JUG_BRIDGE = (1.01, 1.11, 1.13, 1.15, 1.16, 1.17, 1.17, 1.20, 1.52, 1.54, 1.54, 1.57, 1.64,
              1.73, 1.79, 2.09, 2.09, 2.57, 2.75, 2.93, 3.19, 3.54, 3.57, 5.11, 5.62)

BYZANTINE_CORE = (1294, 1279, 1274, 1264, 1263, 1254, 1251, 1251, 1248, 1240, 1232, 1220, 1218, 1210)
BYZANTINE_PERIPHERY = (1284, 1272, 1256, 1254, 1242, 1274, 1264, 1256, 1250)

# two Gamma samples known only through (n, mean, geometric mean)
EX7_STATS = ({"n": 9, "mean": 2.811, "geo_mean": 2.116}, {"n": 12, "mean": 1.973, "geo_mean": 1.327})

BIRTHS = {"males": 7640, "females": 7288}
BIRTH_HYPOTHESES = {
    "ex2-bernoulli": ("J. Bernoulli", 1 / 2, 0.996),
    "ex2-arbuthnot": ("J. Arbuthnot", 13 / 25, 0.955),
    "ex2-sussmilch": ("J. P. Suessmilch", 1050 / 2050, 0.079),
    "ex2-laplace": ("P. S. Laplace", 23 / 45, 0.132),
}


def sample_stats(x) -> dict:
    """n, mean, geometric and harmonic means and the variance MLE of a sample."""
    x = np.asarray(x, dtype=float)
    out = {"n": int(x.size), "mean": float(x.mean()), "s2": float(x.var())}
    if np.all(x > 0):
        out["geo_mean"] = float(np.exp(np.log(x).mean()))
        out["harm_mean"] = float(1.0 / np.mean(1.0 / x))
    return out


def gamma_mle(n: int, mean: float, geo_mean: float) -> tuple[float, float]:
    """Maximum-likelihood (shape, rate) of a Gamma sample from its sufficient statistics.

    The profile log-likelihood in the shape, with rate = shape / mean, is
    maximized over ln(shape).
    """
    c = math.log(geo_mean / mean)

    def profile(v):
        a = math.exp(v)
        return n * (a * math.log(a) - math.lgamma(a) + a * c - a)

    v, _ = maximize_1d(profile, (-10.0, 10.0), tol=1e-12)
    a = math.exp(v)
    return a, a / mean


# ------------------------------------------------------- model builders

def gamma_hypothesis(kind: str, value: float) -> PartitioningHypothesis:
    """Hypotheses on (alpha, beta) of a Gamma model: shape, mean alpha/beta or variance alpha/beta^2."""
    if kind == "alpha":
        return coordinate_hypothesis(0, value, f"alpha = {value:g}")
    if kind == "mean":
        return section_hypothesis(lambda th: th[..., 0] / th[..., 1], value,
                                  lambda a: (a / value, np.inf), "a", f"mean = {value:g}")
    if kind == "variance":
        return section_hypothesis(lambda th: th[..., 0] / th[..., 1] ** 2, value,
                                  lambda a: (np.sqrt(a / value), np.inf), "a",
                                  f"variance = {value:g}")
    raise DomainError(f"unknown Gamma hypothesis {kind!r}")


def gamma_null_curve(kind: str, value: float) -> NullCurve:
    br = Interval(1e-3, 1e3)
    if kind == "alpha":
        return NullCurve(lambda t: np.stack(np.broadcast_arrays(value, t), axis=-1), br,
                         name="beta free")
    if kind == "mean":
        return NullCurve(lambda t: np.stack([t, t / value], axis=-1), br, name="beta = alpha/mean")
    if kind == "variance":
        return NullCurve(lambda t: np.stack([t, np.sqrt(t / value)], axis=-1), br,
                         name="beta = sqrt(alpha/variance)")
    raise DomainError(f"unknown Gamma hypothesis {kind!r}")


def cv_hypothesis(value: float) -> PartitioningHypothesis:
    """Coefficient of variation 1/(|mu| sqrt(phi)) of a Normal model; Theta_b is {cv > value}."""
    def phi(th):
        with np.errstate(divide="ignore"):
            return 1.0 / (np.abs(th[..., 0]) * np.sqrt(th[..., 1]))

    def section(p):
        c = 1.0 / (value * np.sqrt(p))
        return -c, c
    return section_hypothesis(phi, value, section, "b", f"cv = {value:g}")


def cv_null_curves(value: float) -> list[NullCurve]:
    """Both branches (mu > 0, mu < 0) of phi = 1/(cv^2 mu^2)."""
    k = 1.0 / (value * value)
    br = Interval(1e-3, 1e4)
    return [NullCurve(lambda t: np.stack([t, k / (t * t)], axis=-1), br, name="mu > 0"),
            NullCurve(lambda t: np.stack([-t, k / (t * t)], axis=-1), br, name="mu < 0")]


def skewness_hypothesis(value: float) -> PartitioningHypothesis:
    """Skewness 3 sqrt(mu/nu) of an Inverse-Gaussian model; Theta_b is {skewness > value}."""
    c = 9.0 / (value * value)
    return section_hypothesis(lambda th: 3.0 * np.sqrt(th[..., 0] / th[..., 1]), value,
                              lambda m: (0.0, c * m), "b", f"skewness = {value:g}")


def skewness_null_curve(value: float) -> NullCurve:
    c = 9.0 / (value * value)
    return NullCurve(lambda t: np.stack([t, c * t], axis=-1), Interval(1e-3, 1e3),
                     name="nu = 9 mu / skewness^2")


# -------------------------------------------------------------- catalog

@dataclass(frozen=True)
class Expected:
    """A reference value with its acceptance band [lo, hi] and where it comes from."""

    quantity: str
    value: float
    lo: float
    hi: float
    citation: str

    @classmethod
    def tol(cls, quantity, value, tol, citation):
        return cls(quantity, value, value - tol, value + tol, citation)

    @classmethod
    def band(cls, quantity, value, lo, hi, citation):
        return cls(quantity, value, lo, hi, citation)

    def check(self, computed: float) -> bool:
        return self.lo <= computed <= self.hi

    def as_dict(self) -> dict:
        return {"quantity": self.quantity, "value": self.value, "lo": self.lo, "hi": self.hi,
                "citation": self.citation}


@dataclass(frozen=True)
class EngineConfig:
    """Numerical settings shared by every entry."""

    draws: int = 50_000
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    omega: float = 0.95
    evalues: bool = True

    def as_dict(self) -> dict:
        return {"draws": self.draws, "rel_tol": self.quadrature.rel_tol,
                "abs_tol": self.quadrature.abs_tol, "max_depth": self.quadrature.max_depth,
                "omega": self.omega}


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    model: str
    description: str
    data: dict
    hypothesis: str
    h: float
    expected: tuple[Expected, ...]
    runner: Callable = field(repr=False, compare=False)

    @property
    def n_obs(self) -> int:
        if "x" in self.data:
            return len(self.data["x"])
        if "samples" in self.data:
            return sum(len(s) for s in self.data["samples"])
        return int(self.data.get("n", 0))

    def summary(self) -> dict:
        return {"id": self.id, "model": self.model, "description": self.description,
                "hypothesis": self.hypothesis, "n": self.n_obs,
                "citations": sorted({e.citation for e in self.expected})}


@dataclass
class AnalysisReport:
    """Result of one catalog entry: computed quantities, checks and decision."""

    id: str
    quantities: dict
    checks: list
    decision: str
    omega: float
    config: dict
    info: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def as_dict(self, include_timings: bool = False) -> dict:
        d = {"id": self.id, "quantities": self.quantities, "checks": self.checks,
             "decision": self.decision, "omega": self.omega, "config": self.config,
             "info": self.info}
        if include_timings:
            d["timings"] = self.timings
        return d


class UnknownEntryError(KeyError):
    pass


def _evalue_pair(post, h, config):
    return {f"ev_{r.kind}": e_value_scalar(post, r, h).ev_bar
            for r in (ReferenceFunction.flat(), ReferenceFunction.prior())}


def _evalue_pair_mc(post, curves, config, rng):
    out = {}
    for k, r in enumerate((ReferenceFunction.flat(), ReferenceFunction.prior())):
        res = e_value_mc(post, curves, r, config.draws, rng.child(k))
        out[f"ev_{r.kind}"] = res.ev_bar
        out[f"ev_{r.kind}_se"] = res.mc_std_err
    return out


def _scalar_quantities(post: ScalarPosterior, h: float, config, with_evalues=True):
    res = scalar_bdm(post, h)
    q = {"delta": res.delta, "median": res.median, "cdf_at_h": res.cdf_at_h,
         "pvalue": 1.0 - res.delta}
    if with_evalues and config.evalues:
        q.update(_evalue_pair(post, h, config))
    return q


def _partition_quantities(post: JointPosterior, hyp, config):
    pp = partition_probabilities(post, hyp, "quadrature", spec=config.quadrature)
    res = partition_bdm(pp)
    return {"delta": res.delta, "p_a": pp.p_a, "p_b": pp.p_b, "p_external": pp.external}


def _exp_runner(n, mean):
    def run(config, rng, h):
        return _scalar_quantities(exp_jeffreys_posterior(n, n * mean), h, config), {}
    return run


def _births_runner(config, rng, h):
    m, f = BIRTHS["males"], BIRTHS["females"]
    n = m + f
    post = normal_approx_posterior(m / n, n)
    q = {"delta": scalar_bdm(post, h).delta}
    exact = beta_posterior(m, f, 1.0, 1.0)
    rounded = normal_approx_posterior(0.512, n)
    info = {"theta_hat": m / n, "delta_beta_posterior": scalar_bdm(exact, h).delta,
            "delta_rounded_theta_hat": scalar_bdm(rounded, h).delta}
    return q, info


def _gamma_runner(kind):
    def run(config, rng, h):
        s = sample_stats(EX3_DATA)
        post = gamma_posterior(s["n"], s["mean"], s["geo_mean"])
        q = _partition_quantities(post, gamma_hypothesis(kind, h), config)
        if config.evalues:
            q.update(_evalue_pair_mc(post, gamma_null_curve(kind, h), config, rng))
        a, b = gamma_mle(s["n"], s["mean"], s["geo_mean"])
        info = {"mean": s["mean"], "geo_mean": s["geo_mean"], "mle_alpha": a, "mle_beta": b,
                "printed_mle_alpha": EX3_PRINTED_MLE[0], "printed_mle_beta": EX3_PRINTED_MLE[1]}
        return q, info
    return run


def _cv_runner(n):
    def run(config, rng, h):
        post = normal_gamma_posterior(17.0, n, 1.6)
        q = _partition_quantities(post, cv_hypothesis(h), config)
        if config.evalues:
            q.update(_evalue_pair_mc(post, cv_null_curves(h), config, rng))
        return q, {}
    return run


def _ig_skew_runner(config, rng, h):
    s = sample_stats(JUG_BRIDGE)
    post = ig_posterior(s["n"], s["mean"], s["harm_mean"])
    q = _partition_quantities(post, skewness_hypothesis(h), config)
    if config.evalues:
        q.update(_evalue_pair_mc(post, skewness_null_curve(h), config, rng))
    return q, {"mean": s["mean"], "harm_mean": s["harm_mean"]}


def byzantine_posterior():
    a, b = sample_stats(BYZANTINE_CORE), sample_stats(BYZANTINE_PERIPHERY)
    return two_population(normal_gamma_posterior(a["mean"], a["n"], a["s2"]),
                          normal_gamma_posterior(b["mean"], b["n"], b["s2"]))


def _byzantine_runner(coords):
    def run(config, rng, h):
        post = byzantine_posterior()
        q = _partition_quantities(post, comparison_hypothesis(*coords), config)
        a, b = sample_stats(BYZANTINE_CORE), sample_stats(BYZANTINE_PERIPHERY)
        info = {"mean_core": a["mean"], "mean_periphery": b["mean"],
                "sd_core": math.sqrt(a["s2"]), "sd_periphery": math.sqrt(b["s2"])}
        return q, info
    return run


def two_gamma_posterior():
    return two_population(*(gamma_posterior(s["n"], s["mean"], s["geo_mean"]) for s in EX7_STATS))


def _two_gamma_runner(config, rng, h):
    q = _partition_quantities(two_gamma_posterior(), comparison_hypothesis(0, 2), config)
    return q, {}


def _gi_runner(config, rng, h):
    return _scalar_quantities(ig_mean_posterior(8, 4.2, 5.0), h, config), {}


def _build_catalog() -> dict[str, CatalogEntry]:
    E, B = Expected.tol, Expected.band
    entries = []
    ex1 = [(6, "", "[A]", 0.832, 1.27, 0.168, (0.909, 0.866), (0.646, 0.847), 0.886),
           (12, "-n12", "[B]", 0.960, 1.23, 0.04, (0.978, 0.968), (0.899, 0.957), 0.968),
           (24, "-n24", "[C]", 0.997, 1.22, 0.003, (0.999, 0.998), (0.991, 0.997), 0.997)]
    for n, suffix, case, delta, median, pval, ev_hi, ev_lo, delta_lo in ex1:
        data = {"n": n, "mean": 1.2}
        entries.append(CatalogEntry(
            f"ex1-exponential{suffix}", "exp",
            f"Exponential mean, Jeffreys prior, n={n}, mean 1.2, H: theta = 2.4", data,
            "theta = 2.4", 2.4,
            (E("delta", delta, 0.005, f"example1{case}"),
             E("median", median, 0.01, f"example1{case}"),
             E("pvalue", pval, 0.005, f"example1{case}"),
             E("ev_flat", ev_hi[0], 0.01, "table2"),
             E("ev_prior", ev_hi[1], 0.01, "table2")),
            _exp_runner(n, 1.2)))
        entries.append(CatalogEntry(
            f"ex1-exponential{suffix}-low", "exp",
            f"Exponential mean, Jeffreys prior, n={n}, mean 1.2, H: theta = 0.7", data,
            "theta = 0.7", 0.7,
            (E("delta", delta_lo, 0.005, "table2"),
             E("ev_flat", ev_lo[0], 0.01, "table2"),
             E("ev_prior", ev_lo[1], 0.01, "table2")),
            _exp_runner(n, 1.2)))

    for eid, (who, h, delta) in BIRTH_HYPOTHESES.items():
        entries.append(CatalogEntry(
            eid, "bernoulli-normal",
            f"Birth masculinity rate, Normal approximation, H: theta = {h:.6g} ({who})",
            dict(BIRTHS), f"theta = {h:.6g}", h,
            (E("delta", delta, 0.005, "example2"),),
            _births_runner))

    s3 = sample_stats(EX3_DATA)
    ex3 = [("ex3-gamma-shape", "alpha", 2.5, "shape alpha = 2.5",
            (E("p_external", 0.215, 0.01, "example3[A]"),
             B("delta", 0.570, 0.560, 0.580, "example3[A]"),
             E("ev_flat", 0.557, 0.02, "table4"), E("ev_prior", 0.186, 0.02, "table4"))),
           ("ex3-gamma-mean", "mean", 6.0, "mean alpha/beta = 6",
            (E("p_external", 0.012, 0.005, "example3[B]"),
             B("delta", 0.976, 0.971, 0.981, "example3[B]"),
             E("ev_flat", 0.984, 0.02, "table4"), E("ev_prior", 0.963, 0.02, "table4"))),
           ("ex3-gamma-variance", "variance", 2.0, "variance alpha/beta^2 = 2",
            (E("p_external", 0.078, 0.005, "example3[C]"),
             B("delta", 0.846, 0.842, 0.848, "example3[C]"),
             E("ev_flat", 0.784, 0.02, "table4"), E("ev_prior", 0.562, 0.02, "table4")))]
    for eid, kind, h, hyp, exp in ex3:
        entries.append(CatalogEntry(eid, "gamma", f"Gamma sample (n=9), H: {hyp}",
                                    {"x": list(EX3_DATA), **{k: s3[k] for k in ("n", "mean", "geo_mean")}},
                                    hyp, h, exp, _gamma_runner(kind)))

    for eid, n, p, dtol, flat, prior, ptol, ftol, prtol in (
            ("ex4-normal-cv", 10, 0.215, 0.02, 0.364, 0.999, 0.01, 0.02, 0.03),
            ("ex4-normal-cv-n40", 40, 0.014, 0.01, 0.924, 1.0, 0.005, 0.02, 0.03)):
        delta = 0.570 if n == 10 else 0.972
        entries.append(CatalogEntry(
            eid, "normal-cv", f"Normal sample (n={n}, mean 17, s2 1.6), H: coefficient of variation = 0.1",
            {"n": n, "mean": 17.0, "s2": 1.6}, "cv = 0.1", 0.1,
            (E("p_external", p, ptol, "example4"), E("delta", delta, dtol, "example4"),
             E("ev_flat", flat, ftol, "table5"), E("ev_prior", prior, prtol, "table5")),
            _cv_runner(n)))

    s5 = sample_stats(JUG_BRIDGE)
    entries.append(CatalogEntry(
        "ex5-ig-skewness", "ig-skewness",
        "Inverse-Gaussian precipitation sample (n=25), H: skewness = 2",
        {"x": list(JUG_BRIDGE), "n": s5["n"], "mean": s5["mean"], "harm_mean": s5["harm_mean"]},
        "skewness = 2", 2.0,
        (E("p_external", 0.078, 0.01, "example5"), E("delta", 0.844, 0.02, "example5"),
         E("ev_flat", 0.650, 0.02, "table6"), E("ev_prior", 0.691, 0.02, "table6")),
        _ig_skew_runner))

    byz = {"samples": [list(BYZANTINE_CORE), list(BYZANTINE_PERIPHERY)]}
    entries.append(CatalogEntry(
        "ex6-byzantine-means", "two-normal-means",
        "Radiocarbon ages of core (14) and periphery (9), H: equal means", byz,
        "mu1 = mu2", 0.0,
        (E("p_external", 0.089, 0.005, "example6[A]"),
         B("delta", 0.823, 0.818, 0.826, "example6[A]")),
        _byzantine_runner((0, 2))))
    entries.append(CatalogEntry(
        "ex6-byzantine-precisions", "two-normal-precisions",
        "Radiocarbon ages of core (14) and periphery (9), H: equal precisions", byz,
        "phi1 = phi2", 0.0,
        (E("p_external", 0.046, 0.005, "example6[B]"), E("delta", 0.908, 0.01, "example6[B]")),
        _byzantine_runner((1, 3))))
    entries.append(CatalogEntry(
        "ex7-gamma-shapes", "two-gamma-shapes",
        "Two Gamma samples (n=9, n=12) from sufficient statistics, H: equal shapes",
        {"stats": [dict(s) for s in EX7_STATS]}, "alpha1 = alpha2", 0.0,
        (E("p_external", 0.311, 0.01, "example7"), E("delta", 0.378, 0.02, "example7")),
        _two_gamma_runner))

    gi = {"n": 8, "mean": 4.2, "nu0": 5.0}
    entries.append(CatalogEntry(
        "gi-ig-mean-a", "ig-mean", "Inverse-Gaussian mean, known shape 5 (n=8, mean 4.2), H: mu = 2.5",
        gi, "mu = 2.5", 2.5,
        (E("median", 4.483, 0.01, "gi-example"), E("delta", 0.975, 0.005, "table3"),
         E("ev_flat", 0.803, 0.01, "table3"), E("ev_prior", 0.848, 0.01, "table3")),
        _gi_runner))
    entries.append(CatalogEntry(
        "gi-ig-mean-b", "ig-mean", "Inverse-Gaussian mean, known shape 5 (n=8, mean 4.2), H: mu = 12",
        gi, "mu = 12", 12.0,
        (E("median", 4.483, 0.01, "gi-example"), E("delta", 0.907, 0.005, "table3"),
         B("ev_flat", 1.0, 0.995, 1.0, "table3"), B("ev_prior", 1.0, 0.995, 1.0, "table3")),
        _gi_runner))
    return {e.id: e for e in entries}


_CATALOG: dict[str, CatalogEntry] | None = None


def catalog() -> dict[str, CatalogEntry]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return _CATALOG


def get_entry(entry_id: str) -> CatalogEntry:
    try:
        return catalog()[entry_id]
    except KeyError:
        raise UnknownEntryError(f"unknown catalog id {entry_id!r}") from None


def list_entries(filter: str | None = None) -> list[dict]:
    """One summary per entry; ``filter`` keeps entries whose id or model contains it."""
    out = []
    for e in catalog().values():
        if filter and filter not in e.id and filter not in e.model:
            continue
        out.append(e.summary())
    return out


def catalog_manifest(filter: str | None = None) -> dict:
    entries = []
    for e in catalog().values():
        if filter and filter not in e.id and filter not in e.model:
            continue
        d = e.summary()
        d["data"] = e.data
        d["h"] = e.h
        d["expected"] = [x.as_dict() for x in e.expected]
        entries.append(d)
    return {"entries": entries}


def run_entry(entry_id: str, config: EngineConfig = EngineConfig(), rng: RngStream | None = None,
              h: float | None = None) -> AnalysisReport:
    """Run one catalog entry and compare with its reference values.

    ``h`` overrides the hypothesized value; the reference checks are then
    dropped unless another entry of the same model has that value.
    """
    entry = get_entry(entry_id)
    rng = rng if rng is not None else RngStream(0, _entry_stream(entry_id))
    expected = entry.expected
    if h is not None and h != entry.h:
        expected = ()
        for other in catalog().values():
            if other.model == entry.model and other.h == h and other.data == entry.data:
                expected = other.expected
                break
    h_val = entry.h if h is None else float(h)
    t0 = time.perf_counter()
    quantities, info = entry.runner(config, rng, h_val)
    elapsed = time.perf_counter() - t0
    checks = []
    for x in expected:
        if x.quantity not in quantities:
            continue
        v = quantities[x.quantity]
        checks.append({"quantity": x.quantity, "computed": v, "expected": x.value,
                       "lo": x.lo, "hi": x.hi, "citation": x.citation, "pass": x.check(v)})
    decision = "reject" if quantities["delta"] > Threshold(config.omega).omega else "not-reject"
    return AnalysisReport(entry.id, quantities, checks, decision, config.omega,
                          config.as_dict(), info, {"seconds": elapsed})


_GAMMA_KINDS = {"shape": "alpha", "mean": "mean", "variance": "variance"}


def entry_problem(entry_id: str) -> tuple[ScalarPosterior | JointPosterior, PartitioningHypothesis]:
    """The posterior and partitioning hypothesis behind an entry's delta."""
    e = get_entry(entry_id)
    d, h = e.data, e.h
    if e.model == "exp":
        return exp_jeffreys_posterior(d["n"], d["n"] * d["mean"]), coordinate_hypothesis(0, h)
    if e.model == "bernoulli-normal":
        n = d["males"] + d["females"]
        return normal_approx_posterior(d["males"] / n, n), coordinate_hypothesis(0, h)
    if e.model == "ig-mean":
        return ig_mean_posterior(d["n"], d["mean"], d["nu0"]), coordinate_hypothesis(0, h)
    if e.model == "gamma":
        kind = _GAMMA_KINDS[e.id.rsplit("-", 1)[1]]
        return gamma_posterior(d["n"], d["mean"], d["geo_mean"]), gamma_hypothesis(kind, h)
    if e.model == "normal-cv":
        return normal_gamma_posterior(d["mean"], d["n"], d["s2"]), cv_hypothesis(h)
    if e.model == "ig-skewness":
        return ig_posterior(d["n"], d["mean"], d["harm_mean"]), skewness_hypothesis(h)
    if e.model == "two-normal-means":
        return byzantine_posterior(), comparison_hypothesis(0, 2)
    if e.model == "two-normal-precisions":
        return byzantine_posterior(), comparison_hypothesis(1, 3)
    if e.model == "two-gamma-shapes":
        return two_gamma_posterior(), comparison_hypothesis(0, 2)
    raise DomainError(f"no posterior builder for model {e.model!r}")


def _entry_stream(entry_id: str) -> int:
    return list(catalog()).index(entry_id)


# ---------------------------------------------- user-facing model builders

class DataError(DomainError):
    """Observations or statistics that the chosen model cannot use."""


SCALAR_MODELS = ("exp", "poisson", "bernoulli", "bernoulli-normal", "ig-mean")
JOINT_MODELS = ("gamma", "normal", "ig")
TWO_POPULATION_MODELS = {"two-normal-means": ("normal", "mean-diff"),
                         "two-normal-precisions": ("normal", "precision-diff"),
                         "two-gamma-shapes": ("gamma", "shape-diff")}
MODELS = SCALAR_MODELS + JOINT_MODELS + tuple(TWO_POPULATION_MODELS)

PHI_NAMES = {"gamma": ("alpha", "mean", "variance"), "normal": ("cv", "mean"),
             "ig": ("skewness", "mean")}
_REQUIRED = {"exp": ("n", "mean"), "poisson": ("n", "mean"), "bernoulli": ("n",),
             "bernoulli-normal": ("n",), "ig-mean": ("n", "mean"),
             "gamma": ("n", "mean", "geo_mean"), "normal": ("n", "mean", "s2"),
             "ig": ("n", "mean", "harm_mean")}


def stats_from_data(model: str, x) -> dict:
    """Sufficient statistics of raw observations, validated for ``model``."""
    base = TWO_POPULATION_MODELS.get(model, (model,))[0]
    x = np.asarray(x, dtype=float)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise DataError("observations must be a non-empty list of finite numbers")
    if base in ("exp", "gamma", "ig", "ig-mean") and np.any(x <= 0):
        raise DataError(f"model {model!r} needs strictly positive observations")
    if base == "poisson" and (np.any(x < 0) or np.any(x != np.round(x))):
        raise DataError("Poisson observations must be non-negative integers")
    if base.startswith("bernoulli"):
        if not np.all((x == 0) | (x == 1)):
            raise DataError("Bernoulli observations must be 0 or 1")
        return {"n": int(x.size), "successes": int(x.sum())}
    return sample_stats(x)


def validate_stats(model: str, stats: dict) -> dict:
    """Check that ``stats`` has what ``model`` needs and is internally consistent."""
    base = TWO_POPULATION_MODELS.get(model, (model,))[0]
    missing = [k for k in _REQUIRED[base] if k not in stats]
    if base.startswith("bernoulli") and "successes" not in stats and "mean" not in stats:
        missing.append("successes")
    if missing:
        raise DataError(f"model {model!r} needs statistics {', '.join(missing)}")
    out = dict(stats)
    n = out["n"]
    if not (float(n).is_integer() and n >= 1):
        raise DataError(f"n must be a positive integer, got {n!r}")
    out["n"] = int(n)
    if base in ("gamma", "normal") and out["n"] < 2:
        raise DataError(f"model {model!r} needs n >= 2")
    for k, v in out.items():
        if not math.isfinite(float(v)):
            raise DataError(f"statistic {k} is not finite")
    if base.startswith("bernoulli"):
        s = out.get("successes", out.get("mean", 0) * out["n"])
        if abs(s - round(s)) > 1e-9 or not (0 <= round(s) <= out["n"]):
            raise DataError("successes must be an integer between 0 and n")
        out["successes"] = int(round(s))
        return out
    if base == "poisson":
        if out["mean"] < 0:
            raise DataError("a Poisson mean must be >= 0")
        return out
    if base == "normal":
        if out["s2"] <= 0:
            raise DataError("s2 must be > 0")
        return out
    if out["mean"] <= 0:
        raise DataError("the mean must be > 0")
    if "geo_mean" in out and not (0 < out["geo_mean"] <= out["mean"]):
        raise DataError("need arithmetic mean >= geometric mean > 0")
    if "harm_mean" in out and not (0 < out["harm_mean"] <= out["mean"]):
        raise DataError("need arithmetic mean >= harmonic mean > 0")
    if "geo_mean" in out and "harm_mean" in out and out["harm_mean"] > out["geo_mean"]:
        raise DataError("need geometric mean >= harmonic mean")
    return out


def scalar_model(model: str, stats: dict, nu0: float | None = None) -> ScalarPosterior:
    n, m = stats["n"], stats.get("mean")
    if model == "exp":
        return exp_jeffreys_posterior(n, n * m)
    if model == "poisson":
        return poisson_jeffreys_posterior(n, n * m)
    if model == "bernoulli":
        s = stats["successes"]
        return beta_posterior(s, n - s, 1.0, 1.0)
    if model == "bernoulli-normal":
        s = stats["successes"]
        if s in (0, n):
            raise DataError("the Normal approximation needs 0 < successes < n")
        return normal_approx_posterior(s / n, n)
    if model == "ig-mean":
        if nu0 is None or not nu0 > 0:
            raise DataError("model 'ig-mean' needs a known shape nu0 > 0")
        return ig_mean_posterior(n, m, nu0)
    raise DomainError(f"{model!r} is not a scalar model")


def joint_model(model: str, stats: dict) -> JointPosterior:
    if model == "gamma":
        return gamma_posterior(stats["n"], stats["mean"], stats["geo_mean"])
    if model == "normal":
        return normal_gamma_posterior(stats["mean"], stats["n"], stats["s2"])
    if model == "ig":
        return ig_posterior(stats["n"], stats["mean"], stats["harm_mean"])
    raise DomainError(f"{model!r} is not a single-population joint model")


def joint_hypothesis(model: str, name: str, value: float):
    """(hypothesis, null curves) for ``name = value`` on a joint model."""
    if name not in PHI_NAMES[model]:
        raise DomainError(f"model {model!r} supports {', '.join(PHI_NAMES[model])}, not {name!r}")
    if model == "gamma":
        return gamma_hypothesis(name, value), [gamma_null_curve(name, value)]
    if model == "normal" and name == "cv":
        if value <= 0:
            raise DomainError("a coefficient of variation must be > 0")
        return cv_hypothesis(value), cv_null_curves(value)
    if model == "ig" and name == "skewness":
        if value <= 0:
            raise DomainError("skewness must be > 0")
        return skewness_hypothesis(value), [skewness_null_curve(value)]
    # the mean of a Normal or Inverse-Gaussian model is the first coordinate
    lo = 1e-3 if model == "normal" else 1e-6
    curve = NullCurve(lambda t: np.stack(np.broadcast_arrays(value, t), axis=-1),
                      Interval(lo, 1e6), name="second coordinate free")
    return coordinate_hypothesis(0, value, f"mean = {value:g}"), [curve]


def two_population_model(model: str, first: dict, second: dict, diff: float = 0.0):
    """(posterior, hypothesis) comparing one parameter across two populations.

    ``diff`` is the hypothesized difference first - second.
    """
    base, kind = TWO_POPULATION_MODELS[model]
    post = two_population(joint_model(base, first), joint_model(base, second))
    i, j = (0, 2) if kind in ("mean-diff", "shape-diff") else (1, 3)
    if diff == 0.0:
        return post, comparison_hypothesis(i, j, f"{kind} = 0")
    return post, PartitioningHypothesis(lambda th: th[..., i] - th[..., j], float(diff),
                                        f"{kind} = {diff:g}")
