"""Finite-sample seminorms, growth-envelope fits, and comparison bounds.

Compacta are finite samples: every sup below is a max over the sampled
points, and the acceptance statements downstream are phrased at the sample
level.  Envelope fits are log-space least squares followed by a
multiplicative slack that converts the fit into a covering bound over the
sampled range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import decompose_jet

__all__ = ["CompactSample", "WeightSequence", "jet_norm_profile",
           "p_infinity", "p_omega", "local_seminorm", "growth_fit",
           "norm_compare", "topology_equivalence_check", "fit_envelope"]


@dataclass
class CompactSample:
    """A finite stand-in for a compact subset of the chart."""

    points: list
    label: str = "K"

    def __post_init__(self):
        if not self.points:
            raise ValueError("a compact sample needs at least one point")


@dataclass
class WeightSequence:
    """Strictly positive weights a_0..a_{m_max}."""

    values: list
    tag: str = "custom"

    def __post_init__(self):
        if any(a <= 0 for a in self.values):
            raise ValueError("weights must be strictly positive")

    @classmethod
    def geometric(cls, rho, m_max):
        return cls([rho ** j for j in range(m_max + 1)], tag=f"geom({rho})")

    @classmethod
    def harmonic(cls, m_max):
        return cls([1.0 / (j + 1) for j in range(m_max + 1)], tag="harmonic")

    def prefix_products(self):
        out = []
        acc = 1.0
        for a in self.values:
            acc *= a
            out.append(acc)
        return out


def jet_norm_profile(provider, K, m_max):
    """Per-point, per-order jet norms: rows[i][m] = ||j_m xi(x_i)||."""
    rows = []
    for x in K.points:
        geo, T = provider(x)
        jet = decompose_jet(T, geo, m_max)
        sq = np.cumsum([a.norm() ** 2 for a in jet.components])
        rows.append(np.sqrt(sq))
    return np.asarray(rows)


def p_infinity(provider, K, m):
    """sup over the sample of the order-m jet norm."""
    return float(jet_norm_profile(provider, K, m)[:, m].max())


def p_omega(provider, K, weights, m_max):
    """sup over the sample and all orders <= m_max of the weighted jet norm."""
    prof = jet_norm_profile(provider, K, m_max)
    w = weights.prefix_products()[: m_max + 1]
    return float((prof * np.asarray(w)).max())


def local_component_profile(provider, K, m_max):
    """rows[i][j] = max over |I| = j of the normalized component derivatives
    |d^I xi^a| / I! at x_i (the chart-level datum behind local seminorms)."""
    rows = []
    for x in K.points:
        geo, T = provider(x)
        ctx = geo.chart.ctx
        vals = np.zeros(m_max + 1)
        for i, I in enumerate(ctx.indices):
            if I.order > min(m_max, T.degree):
                break
            vals[I.order] = max(vals[I.order], float(np.abs(T.data[i]).max()))
        rows.append(vals)
    return np.asarray(rows)


def local_seminorm(provider, K, weights, m_max):
    """The multi-index seminorm with a_0..a_m / I! weights, |I| <= m."""
    prof = local_component_profile(provider, K, m_max)
    run = np.maximum.accumulate(prof, axis=1)   # sup over |I| <= m
    w = weights.prefix_products()[: m_max + 1]
    return float((run * np.asarray(w)).max())


@dataclass
class GrowthFit:
    C: float
    r: float
    max_order: int
    max_violation: float
    trivial: bool = False


def growth_fit(provider, K, m_max, slack=1.5):
    """Analyticity certificate: constants with p_inf(m) <= C r^{-m}.

    Least-squares in log space over the sampled orders, then the constant is
    inflated by `slack`; the reported violation is measured against the
    inflated bound (so <= 0 certifies the sampled range).
    """
    prof = jet_norm_profile(provider, K, m_max)
    p_inf = prof.max(axis=0)
    mask = p_inf > 1e-14
    ms = np.arange(m_max + 1)[mask]
    if len(ms) < 2:
        return GrowthFit(C=float(p_inf.max(initial=0.0)), r=1.0,
                         max_order=m_max, max_violation=0.0, trivial=True)
    y = np.log(p_inf[mask])
    A = np.stack([np.ones_like(ms, dtype=float), -ms.astype(float)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    logC, logr = coef
    logC += max(float((y - A @ coef).max()), 0.0)
    C = math.exp(logC) * slack
    r = math.exp(logr)
    viol = float(np.max(np.log(p_inf[mask]) - (math.log(C) - ms * logr)))
    # a polynomial section has finitely many nonzero orders and its profile
    # flattens; certify it trivially when the tail is constant
    tail = p_inf[max(m_max - 3, 0):]
    trivial = bool(np.allclose(tail, p_inf[-1], rtol=1e-12))
    return GrowthFit(C=C, r=r, max_order=m_max, max_violation=viol,
                     trivial=trivial)


def fit_envelope(ms, ratios, slack):
    """Fit log(ratio) <= log C + m log(1/sigma) and certify it.

    The slope comes from a log-space least-squares line; the intercept is
    then lifted to the largest residual, which turns the central fit into a
    covering bound over the sampled range (low outliers are harmless for an
    upper envelope and must not drag the certificate down).  The slack
    multiplies the certified constant and the reported coverage is checked
    against the slack-inflated bound.
    """
    ms = np.asarray(ms, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    mask = ratios > 1e-300
    if not mask.any():
        return 1.0, 1.0, 1.0
    y = np.log(ratios[mask])
    A = np.stack([np.ones(mask.sum()), ms[mask]], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    logC, a = coef
    logC += max(float((y - A @ coef).max()), 0.0)
    C = math.exp(logC)
    sigma = math.exp(-a)
    bound = np.log(C * slack) + a * ms[mask]
    coverage = float(np.mean(y <= bound + 1e-12))
    return C, sigma, coverage


def norm_compare(provider_a, provider_b, K, m_max, slack=1.5):
    """Two-sided C sigma^{-m} comparison of jet-norm families.

    `provider_a`/`provider_b` map a point to (geometry, field) built from the
    two (metric, connection) pairs; the same underlying section must be fed
    to both.
    """
    prof_a = jet_norm_profile(provider_a, K, m_max)
    prof_b = jet_norm_profile(provider_b, K, m_max)
    ms, fwd, bwd = [], [], []
    for i in range(prof_a.shape[0]):
        for m in range(m_max + 1):
            na, nb = prof_a[i, m], prof_b[i, m]
            if na < 1e-14 and nb < 1e-14:
                continue
            ms.append(m)
            fwd.append(na / max(nb, 1e-300))
            bwd.append(nb / max(na, 1e-300))
    C1, s1, cov1 = fit_envelope(ms, fwd, slack)
    C2, s2, cov2 = fit_envelope(ms, bwd, slack)
    return {"forward": {"C": C1, "sigma": s1, "coverage": cov1},
            "backward": {"C": C2, "sigma": s2, "coverage": cov2}}


def topology_equivalence_check(provider, K, weight_family, m_max, slack=1.5):
    """Local vs intrinsic seminorms generate the same topology, in the
    finite-order quantitative form: for each weight sequence, a rescaled
    sequence (b_0 = C a_0, b_j = a_j / sigma) dominates the other side.
    """
    prof_local = local_component_profile(provider, K, m_max)
    run_local = np.maximum.accumulate(prof_local, axis=1)
    prof_jet = jet_norm_profile(provider, K, m_max)
    ms, fwd, bwd = [], [], []
    for i in range(prof_jet.shape[0]):
        for m in range(m_max + 1):
            lo, jn = run_local[i, m], prof_jet[i, m]
            if lo < 1e-14 and jn < 1e-14:
                continue
            ms.append(m)
            fwd.append(lo / max(jn, 1e-300))
            bwd.append(jn / max(lo, 1e-300))
    C1, s1, cov1 = fit_envelope(ms, fwd, slack)
    C2, s2, cov2 = fit_envelope(ms, bwd, slack)
    report = {"local_le_intrinsic": {"C": C1, "sigma": s1, "coverage": cov1},
              "intrinsic_le_local": {"C": C2, "sigma": s2, "coverage": cov2},
              "weights": []}
    for a in weight_family:
        w = np.asarray(a.prefix_products()[: m_max + 1])
        p_loc = float((run_local * w).max())
        p_int = float((prof_jet * w).max())
        # witness sequences per the rescaling construction
        b1 = WeightSequence([a.values[0] * C1]
                            + [v / s1 for v in a.values[1:]], tag="b1")
        w1 = np.asarray(b1.prefix_products()[: m_max + 1])
        p_int_b1 = float((prof_jet * w1).max())
        b2 = WeightSequence([a.values[0] * C2]
                            + [v / s2 for v in a.values[1:]], tag="b2")
        w2 = np.asarray(b2.prefix_products()[: m_max + 1])
        p_loc_b2 = float((run_local * w2).max())
        report["weights"].append({
            "tag": a.tag,
            "local": p_loc, "intrinsic": p_int,
            "local_le": p_loc <= p_int_b1 * (1 + 1e-9),
            "intrinsic_le": p_int <= p_loc_b2 * (1 + 1e-9),
        })
    return report


def continuity_bound_check(op, samples, slack=1.5):
    """Quantitative kernels of the continuity statements, as margins.

    `samples` is a list of dicts of jet norms (and orders) appropriate to
    the operation; the returned report carries one margin per sample
    (nonpositive = the bound holds) or, for the lift operations, fitted
    envelope witnesses with coverage.
    """
    if op == "add":
        margins = [s["sum"] - (s["a"] + s["b"]) for s in samples]
    elif op == "compose_vb":
        margins = [s["composite"]
                   - (3.0 ** (s["m"] + 1)) * s["left"] * s["right"]
                   for s in samples]
    elif op == "jet":
        margins = [s["nested"]
                   - (s["m"] + s["k"]) ** s["k"] * (s["m"] + 1) * s["flat"]
                   for s in samples]
    elif op == "pullback":
        margins = [s["pulled"] - s["C"] ** s["m"] * s["target"]
                   for s in samples]
    elif op in ("differential", "nabla"):
        margins = [s["deriv"] - (s["m"] + 1) * s["higher"] for s in samples]
    elif op == "lie":
        margins = [s["value"] - (3.0 ** (s["m"] + 1)) * (s["m"] + 1)
                   * s["obj_higher"] * s["field"] for s in samples]
    elif op == "bracket":
        margins = [s["value"] - (3.0 ** (s["m"] + 1)) * (s["m"] + 1)
                   * (s["jy1"] * s["jx"] + s["jx1"] * s["jy"])
                   for s in samples]
    elif op in ("lifts", "tangent_lift"):
        report = {"op": op, "directions": []}
        ok = True
        for block in samples:
            C, sigma, cov = fit_envelope(block["ms"], block["ratios"], slack)
            report["directions"].append(
                {"C": C, "sigma": sigma, "coverage": cov})
            ok = ok and cov >= 1.0 - 1e-12
        report["passed"] = ok
        return report
    else:
        raise ValueError(f"unknown continuity operation {op!r}")
    return {"op": op, "margins": margins,
            "max_margin": max(margins) if margins else 0.0}
