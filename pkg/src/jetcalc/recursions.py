"""Coefficient recursions relating iterated derivatives across lifts.

Every family here answers the same question: given the iterated covariant
derivatives of an object downstairs, what are the iterated derivatives of
its lift (or of the same object under a different connection, or of its
pull-back along a map)?  The answer is a triangular family of vector-bundle
maps indexed by (m, s), built by one recursion step shared across families:

    T[m+1] picks up  (i) the covariant derivative of T[m],
                     (ii) an identity shift T[m][s-1] (x) id,
                     (iii) signed substitutions of a structure tensor at
                           every input (forward) or output (inverse) slot,
                     (iv) coupling terms for the evaluation families.

Map tensors are stored as [OUT block][IN-dual block]: OUT = the main lift's
auxiliary slots followed by m covariant slots, IN-dual = the flipped slots
of the argument objects.  The forward tables expand total-space derivatives
in terms of lifted base derivatives; the inverse tables go back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import FIB, PTN, TAN, FieldTensor, Geometry, identity_field
from .tensor_core import COV, CONTRA

__all__ = ["FamilySpec", "CoefficientTable", "build_coefficients",
           "verify_expansion", "verify_inverse_pair", "growth_profile",
           "bundle_family", "conn_family", "pullback_family",
           "BUNDLE_FAMILY_KINDS"]

BUNDLE_FAMILY_KINDS = ("P", "V", "H", "Vstar", "L", "D", "C")

#: argument auxiliary slots per bundle family component
_BUNDLE_AUX = {
    "P": [()],
    "V": [((TAN, CONTRA),)],
    "H": [((TAN, CONTRA),)],
    "Vstar": [((TAN, COV),)],
    "L": [((TAN, CONTRA), (TAN, COV))],
    # evaluation families: main component plus the vertical-lift component
    "D": [(), ((TAN, COV),)],
    "C": [((TAN, CONTRA),), ((TAN, CONTRA), (TAN, COV))],
}

#: how the base derivatives of the test object lift, per component
_BUNDLE_KINDS = {
    "P": [["base"]],
    "V": [["vert", "base"]],
    "H": [["hor", "base"]],
    "Vstar": [["theta", "base"]],
    "L": [["vert", "theta", "base"]],
    "D": [["eval", "base"], ["theta", "base"]],
    "C": [["vert", "eval", "base"], ["vert", "theta", "base"]],
}


@dataclass
class FamilySpec:
    name: str
    geo: Geometry                  # differentiates coefficients and lifts
    aux: list                      # per component: tuple of (space, variance)
    in_rule: dict                  # (space, variance) -> (sign, structure)
    out_rule: dict
    lift: object                   # lift(comp, obj, s) -> FieldTensor
    couplings: list = field(default_factory=list)       # (src, dst, pass_pos)
    inv_couplings: list = field(default_factory=list)   # (src, dst, moves)
    coupled_pure: object = None    # FamilySpec of the pure lift family
    shift_tensor: object = None    # defaults to the tangent identity
    arg_space: str = TAN           # space of the argument covariant slots

    def n_aux_out(self):
        return len(self.aux[0])

    def stream_lifted(self, comp, obj, s):
        return self.lift(comp, obj, s)

    def stream_total(self, comp, obj, s):
        return self.geo.iterated(self.lift(comp, obj, 0), s)


class CoefficientTable:
    """Entries (m, component, s) -> map FieldTensor."""

    def __init__(self, spec, m_max, entries, direction):
        self.spec = spec
        self.m_max = m_max
        self.entries = entries
        self.direction = direction

    def get(self, m, comp, s):
        return self.entries.get((m, comp, s))

    def items(self):
        return self.entries.items()


def _identity_map(spec):
    """The order-zero map: identity on the main lift space."""
    chart = spec.geo.chart
    cap = chart.cap
    aux = spec.aux[0]
    if not aux:
        out = FieldTensor.zeros(chart, (), (), cap)
        out.data[0] = 1.0
        return out
    out = None
    for (space, variance) in aux:
        dim = spec.geo.dims[space]
        eye = identity_field(chart, space, dim, cap,
                             up_first=(variance == CONTRA))
        out = eye if out is None else out.product(eye)
    # arrange [all OUT aux][all IN-dual aux]
    n = len(aux)
    perm = []
    for i in range(n):
        perm.append(2 * i)
    for i in range(n):
        perm.append(2 * i + 1)
    return out.permuted(perm)


def _shift_term(spec, A, n_out):
    ins = spec.shift_tensor
    if ins is None:
        dim = spec.geo.dims[TAN]
        ins = identity_field(spec.geo.chart, TAN, dim, A.degree,
                             up_first=False)
    t = A.product(ins)
    t = t.move_slot(A.order, n_out)     # the new OUT covariant slot
    return t


def _couple_in(spec, A, n_out, pass_pos):
    dim = spec.geo.dims[TAN]
    eye = identity_field(spec.geo.chart, TAN, dim, A.degree, up_first=False)
    t = A.product(eye)
    t = t.move_slot(A.order, n_out)                  # id down -> OUT end
    t = t.move_slot(t.order - 1, n_out + 1 + pass_pos)  # id up into IN-dual
    return t


def _embed_out_table(P, n_aux_pure, m, moves):
    """Move auxiliary OUT slots of a pure-family map to the end of the
    covariant block (the subbundle embeddings of the evaluation families)."""
    out = P
    removed = 0
    for a in sorted(moves):
        pos = a - removed
        out = out.move_slot(pos, n_aux_pure - removed + m - 1)
        removed += 1
    return out


def build_coefficients(spec, m_max, direction="forward", keep_degree=0):
    """Build the coefficient table by the family's recursion.

    `direction` is "forward" (total-space derivatives from lifted base
    derivatives) or "inverse".  Entries at level m are eagerly truncated to
    the degree still needed, which keeps high orders cheap.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(direction)
    inverse = direction == "inverse"
    pure_tables = None
    if inverse and spec.coupled_pure is not None:
        pure_tables = build_coefficients(spec.coupled_pure, m_max, "inverse",
                                         keep_degree=keep_degree + 1)
    entries = {(0, 0, 0): _identity_map(spec)}
    n_aux_main = spec.n_aux_out()
    for m in range(m_max):
        level = [(c, s) for (mm, c, s) in entries if mm == m]
        new = {}

        def acc(c, s, term):
            key = (m + 1, c, s)
            if key in new:
                new[key] = new[key] + term
            else:
                new[key] = term

        for (c, s) in sorted(level):
            A = entries[(m, c, s)]
            n_out = n_aux_main + m
            dA = spec.geo.cov(A)
            acc(c, s, dA.move_slot(dA.order - 1, n_out))
            acc(c, s + 1, _shift_term(spec, A, n_out))
            if inverse:
                out_layout = list(spec.aux[0]) + [(spec.arg_space, COV)] * m
                for p, (space, variance) in enumerate(out_layout):
                    rule = spec.out_rule.get((space, variance))
                    if rule is None:
                        continue
                    sign, S = rule
                    t = A.substitute(p, S)
                    t = t.move_slot(t.order - 1, n_out)
                    acc(c, s, t * sign)
            else:
                in_layout = list(spec.aux[c]) + [(spec.arg_space, COV)] * s
                for p, (space, variance) in enumerate(in_layout):
                    rule = spec.in_rule.get((space, variance))
                    if rule is None:
                        continue
                    sign, S = rule
                    t = A.substitute(n_out + p, S)
                    t = t.move_slot(t.order - 1, n_out)
                    acc(c, s, t * sign)
        if not inverse:
            for (src, dst, pass_pos) in spec.couplings:
                for s in range(m + 1):
                    if (m, src, s) in entries:
                        acc(dst, s, _couple_in(spec, entries[(m, src, s)],
                                               n_aux_main + m, pass_pos))
        else:
            for (src, dst, moves) in spec.inv_couplings:
                for s in range(m + 1):
                    P = pure_tables.get(m, src, s) if pure_tables else None
                    if P is not None:
                        n_aux_pure = len(spec.coupled_pure.aux[0])
                        emb = _embed_out_table(P, n_aux_pure, m, moves)
                        acc(dst, s, emb * -1.0)
        need = max(m_max - (m + 1), 0) + keep_degree
        for key, val in new.items():
            entries[key] = val.truncated(need)
    return CoefficientTable(spec, m_max, entries, direction)


def _residual(lhs, rhs, geo):
    diff = lhs - rhs
    return geo.norm(diff) / max(geo.norm(lhs), 1e-12)


def verify_expansion(spec, table, obj, m):
    """|| direct total-space derivative - coefficient sum || (relative)."""
    lhs = spec.stream_total(0, obj, m)
    rhs = None
    for c in range(len(spec.aux)):
        for s in range(m + 1):
            A = table.get(m, c, s)
            if A is None:
                continue
            arg = spec.stream_lifted(c, obj, s)
            term = A.apply_map(spec.n_aux_out() + m, arg)
            rhs = term if rhs is None else rhs + term
    return _residual(lhs, rhs, spec.geo)


def verify_inverse_pair(spec, table_inv, obj, m):
    """Reconstruct the lifted base derivative from total-space data."""
    target = spec.stream_lifted(0, obj, m)
    recon = None
    for c in range(len(spec.aux)):
        for s in range(m + 1):
            B = table_inv.get(m, c, s)
            if B is None:
                continue
            arg = spec.stream_total(c, obj, s)
            term = B.apply_map(spec.n_aux_out() + m, arg)
            recon = term if recon is None else recon + term
    return _residual(target, recon, spec.geo)


def growth_profile(table, geo=None, slack=2.0, tol=1e-13):
    """Entry norms plus a fitted factorial-weighted envelope.

    Fits log||A^m_s|| ~ log C - m log sigma - (m-s) log rho + log (m-s)! by
    least squares and reports the fraction of nonzero entries covered by the
    slack-inflated bound.  A degenerate (all-zero off-diagonal) profile is
    reported as such.
    """
    geo = geo or table.spec.geo
    rows = []
    for (m, c, s), A in sorted(table.items()):
        n_out = table.spec.n_aux_out() + m
        rows.append((m, s, c, geo.norm(A)))
    offdiag = [r for r in rows if r[0] != r[1] and r[3] > tol]
    if not offdiag:
        return {"rows": rows, "degenerate": True, "coverage": 1.0,
                "C": 0.0, "sigma": 1.0, "rho": 1.0, "slack": slack}
    X, y = [], []
    for (m, s, c, val) in rows:
        if val <= tol:
            continue
        X.append([1.0, float(m), float(m - s)])
        y.append(math.log(val) - math.lgamma(m - s + 1))
    X = np.asarray(X)
    y = np.asarray(y)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    logC, a, b = coef            # a = log 1/sigma, b = log 1/rho
    # the template is an upper envelope: lift the intercept by the largest
    # central-fit residual so the fitted bound covers the sampled range
    resid = y - (X @ coef)
    spread = float(np.exp(resid.max() - resid.min()))
    logC += max(float(resid.max()), 0.0)
    covered = 0
    total = 0
    for (m, s, c, val) in rows:
        if val <= tol:
            continue
        bound = math.exp(logC + a * m + b * (m - s)
                         + math.lgamma(m - s + 1)) * slack
        total += 1
        covered += int(val <= bound)
    return {"rows": rows, "degenerate": False,
            "coverage": covered / max(total, 1),
            "C": math.exp(logC), "sigma": math.exp(-a), "rho": math.exp(-b),
            "central_spread": spread, "slack": slack}


# --------------------------------------------------------------------------
# concrete families
# --------------------------------------------------------------------------

class _BundleLift:
    def __init__(self, ts, kind):
        self.ts = ts
        self.kind = kind

    def __call__(self, comp, obj, s):
        ds = self.ts.bundle.iterated(obj, s)
        kinds = list(_BUNDLE_KINDS[self.kind][comp])
        aux_kinds = kinds[:-1]
        return self.ts.lift_mixed(ds, aux_kinds + ["base"] * s)


def bundle_family(kind, ts):
    """A lift family over a total-space geometry."""
    if kind not in BUNDLE_FAMILY_KINDS:
        raise ValueError(f"unknown bundle family {kind}")
    B = ts.b_tensor()
    in_rule = {(TAN, COV): (-1.0, B), (TAN, CONTRA): (+1.0, B)}
    out_rule = {(TAN, COV): (+1.0, B), (TAN, CONTRA): (-1.0, B)}
    coupled = None
    couplings = []
    inv_couplings = []
    if kind == "D":
        coupled = bundle_family("Vstar", ts)
        couplings = [(0, 1, 0)]
        inv_couplings = [(0, 1, [0])]
    if kind == "C":
        coupled = bundle_family("L", ts)
        couplings = [(0, 1, 1)]
        inv_couplings = [(0, 1, [1])]
    return FamilySpec(
        name=kind, geo=ts, aux=[list(a) for a in _BUNDLE_AUX[kind]],
        in_rule=in_rule, out_rule=out_rule,
        lift=_BundleLift(ts, kind), couplings=couplings,
        inv_couplings=inv_couplings, coupled_pure=coupled)


class _ConnLift:
    def __init__(self, bun):
        self.bun = bun

    def __call__(self, comp, obj, s):
        return self.bun.iterated(obj, s)


def conn_family(bun, bun_bar):
    """Connection-change family on the base: compares two (affine, linear)
    connection pairs on the same bundle."""
    from .fields import connection_difference
    s_m = connection_difference(bun_bar.conns[TAN], bun.conns[TAN])
    s_e = connection_difference(bun_bar.conns[FIB], bun.conns[FIB])
    # a changed connection corrects up slots with +S and down slots with -S,
    # the same signed-substitution pattern as the lift families
    in_rule = {(TAN, COV): (-1.0, s_m), (FIB, CONTRA): (+1.0, s_e)}
    out_rule = {(TAN, COV): (+1.0, s_m), (FIB, CONTRA): (-1.0, s_e)}
    return FamilySpec(
        name="CONN", geo=bun_bar, aux=[[(FIB, CONTRA)]],
        in_rule=in_rule, out_rule=out_rule, lift=_ConnLift(bun))


class _PullbackLift:
    def __init__(self, pb):
        self.pb = pb

    def __call__(self, comp, obj, s):
        # obj is a scalar FieldTensor on the target chart
        tgt = self.pb.mapdata.target
        ds = tgt.iterated(obj, s)
        return self.pb.mapdata.pullback_field(ds)


def pullback_family(pbgeo):
    return FamilySpec(
        name="PB", geo=pbgeo, aux=[[]], in_rule={}, out_rule={},
        lift=_PullbackLift(pbgeo), shift_tensor=pbgeo.conversion(),
        arg_space=PTN)


def pullback_inverse_residual(pbgeo, table_fwd, obj, m):
    """Triangular reconstruction of the pulled-back derivative list.

    Solves the forward expansion for the pulled-back data using a metric
    right-inverse of the tangent map; exact only when the map is a
    submersion (otherwise the system genuinely loses information).
    """
    md = pbgeo.mapdata
    dphi = md.dphi             # [PTN up, TAN down]
    from .fields import matrix_inverse_field
    g_inv = matrix_inverse_field(md.domain.g)
    a = dphi.contract_pair(1, g_inv, 0)       # a^{al} = dPhi^a_j g^{jl}
    gram = a.contract_pair(1, dphi, 1)        # [PTN up, PTN up]
    # invert the series matrix; the inversion is slot-blind, so retag
    gram_cov = FieldTensor(gram.chart, [(PTN, COV), (PTN, COV)],
                           gram.data, gram.degree)
    inv_up = matrix_inverse_field(gram_cov)
    inv = FieldTensor(gram.chart, [(PTN, COV), (PTN, COV)],
                      inv_up.data, inv_up.degree)
    w = a.contract_pair(0, inv, 0)            # [TAN up, PTN down]
    spec = table_fwd.spec
    q_hat = []
    num = den = 0.0
    for mm in range(m + 1):
        lhs = spec.stream_total(0, obj, mm)
        for s in range(mm):
            A = table_fwd.get(mm, 0, s)
            lhs = lhs - A.apply_map(mm, q_hat[s])
        q = lhs
        for pos in range(mm):
            q = q.contract_pair(pos, w, 0).move_slot(q.order - 1, pos)
        q_hat.append(q)
        truth = spec.stream_lifted(0, obj, mm)
        num += pbgeo.norm(truth - q) ** 2
        den += pbgeo.norm(truth) ** 2
    return math.sqrt(num) / max(math.sqrt(den), 1e-12)
