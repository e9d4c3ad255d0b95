"""Truncated multivariate power-series arithmetic at a base point.

Everything downstream (covariant derivatives, curvature-free identities,
seminorms) gets its derivatives from this module, so the arithmetic here is
exact on truncations: no finite differencing is involved except in the
independent cross-check `finite_difference_check`.

Coefficients are stored normalized, i.e. the entry for the multi-index I is
(d^I f / I!) at the base point, which keeps magnitudes tame at high order.
Multi-indices are enumerated in graded-lexicographic order; index 0 is the
constant term.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MultiIndex",
    "TaylorContext",
    "TaylorScalar",
    "AnalyticExpr",
    "parse_expr",
    "expand",
    "derive",
    "partial",
    "eval_expr",
    "finite_difference_check",
]


class MultiIndex(tuple):
    """An n-tuple of nonnegative integer exponents."""

    @property
    def exponents(self):
        return tuple(self)

    @property
    def order(self):
        return sum(self)

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other))


def _graded_lex(nvars, cap):
    out = []
    for total in range(cap + 1):
        for comb in itertools.combinations_with_replacement(range(nvars), total):
            idx = [0] * nvars
            for v in comb:
                idx[v] += 1
            out.append(MultiIndex(idx))
    # combinations_with_replacement is not lex-sorted as exponent tuples; fix it
    out.sort(key=lambda I: (I.order, tuple(I)))
    return out


def n_coeffs(nvars, degree):
    """Number of multi-indices with |I| <= degree."""
    return math.comb(nvars + degree, degree)


@lru_cache(maxsize=None)
def _context_tables(nvars, cap):
    indices = _graded_lex(nvars, cap)
    lookup = {I: i for i, I in enumerate(indices)}
    orders = np.array([I.order for I in indices], dtype=np.int64)
    pi, pj, pk = [], [], []
    for i, I in enumerate(indices):
        for j, J in enumerate(indices):
            if I.order + J.order > cap:
                continue
            pi.append(i)
            pj.append(j)
            pk.append(lookup[I + J])
    pairs = (np.array(pi), np.array(pj), np.array(pk))
    # derivative table per variable: out[dst] = factor * a[src]
    dmaps = []
    for v in range(nvars):
        src, dst, fac = [], [], []
        for i, I in enumerate(indices):
            if I[v] == 0:
                continue
            J = list(I)
            J[v] -= 1
            # normalized storage: d/dx_v maps coeff(I) -> I_v * coeff at I - e_v
            src.append(i)
            dst.append(lookup[MultiIndex(J)])
            fac.append(float(I[v]))
        dmaps.append((np.array(src), np.array(dst), np.array(fac)))
    return indices, lookup, orders, pairs, dmaps


class TaylorContext:
    """Shared tables for series with a fixed variable count and degree cap."""

    def __init__(self, nvars, cap):
        self.nvars = int(nvars)
        self.cap = int(cap)
        (self.indices, self.lookup, self.orders, self._pairs,
         self._dmaps) = _context_tables(self.nvars, self.cap)
        self._pair_cache = {}

    def __repr__(self):
        return f"TaylorContext(nvars={self.nvars}, cap={self.cap})"

    def size(self, degree):
        return n_coeffs(self.nvars, min(degree, self.cap))

    def pair_arrays(self, da, db, dout):
        """(i, j, k) triples with |I|<=da, |J|<=db, |I+J|<=dout."""
        key = (da, db, dout)
        hit = self._pair_cache.get(key)
        if hit is not None:
            return hit
        pi, pj, pk = self._pairs
        mask = ((self.orders[pi] <= da) & (self.orders[pj] <= db)
                & (self.orders[pk] <= dout))
        arrs = (pi[mask], pj[mask], pk[mask])
        self._pair_cache[key] = arrs
        return arrs

    # --- raw coefficient-array kernel, coefficient axis first -------------

    def mul(self, a, da, b, db, dout=None):
        """Coefficient product of scalar series arrays (no tensor axes)."""
        dout = min(da, db) if dout is None else dout
        out = np.zeros(self.size(dout))
        pi, pj, pk = self.pair_arrays(da, db, dout)
        np.add.at(out, pk, a[pi] * b[pj])
        return out

    def contract(self, a, da, b, db, axes_a, axes_b, dout=None):
        """Tensor contraction with series-valued entries.

        `a` has shape (size(da), *dims_a), similarly `b`; `axes_a`/`axes_b`
        index the tensor axes (0-based, excluding the coefficient axis).
        Result shape: (size(dout), *free_a, *free_b).
        """
        dout = min(da, db) if dout is None else min(dout, min(da, db))
        pi, pj, pk = self.pair_arrays(da, db, dout)
        axa = [x + 1 for x in axes_a]
        axb = [x + 1 for x in axes_b]
        free_a = [x for x in range(1, a.ndim) if x not in axa]
        free_b = [x for x in range(1, b.ndim) if x not in axb]
        shape = ((self.size(dout),)
                 + tuple(a.shape[x] for x in free_a)
                 + tuple(b.shape[x] for x in free_b))
        out = np.zeros(shape)
        axes0 = ([x - 1 for x in axa], [x - 1 for x in axb])
        for i, j, k in zip(pi, pj, pk):
            if axes0[0]:
                out[k] += np.tensordot(a[i], b[j], axes=axes0)
            else:
                out[k] += np.multiply.outer(a[i], b[j])
        return out

    def derive(self, a, da, var):
        """d/dx_var of a coefficient array; degree drops by one."""
        if da < 1:
            raise ValueError("cannot differentiate a degree-0 truncation")
        dd = da - 1
        out = np.zeros((self.size(dd),) + a.shape[1:])
        src, dst, fac = self._dmaps[var]
        keep = self.orders[dst] <= dd
        src, dst, fac = src[keep], dst[keep], fac[keep]
        np.add.at(out, dst, fac.reshape((-1,) + (1,) * (a.ndim - 1)) * a[src])
        return out

    def truncate(self, a, dto):
        return a[: self.size(dto)]

    def promote(self, a, dfrom, dto):
        """Zero-pad a degree-`dfrom` array so it indexes like degree `dto`."""
        if dto <= dfrom:
            return self.truncate(a, dto)
        out = np.zeros((self.size(dto),) + a.shape[1:])
        out[: self.size(dfrom)] = a
        return out


@dataclass
class TaylorScalar:
    """A truncated series: coeffs[i] is d^I f / I! at the base point."""

    ctx: TaylorContext
    degree: int
    coeffs: np.ndarray

    @classmethod
    def constant(cls, ctx, value, degree=None):
        degree = ctx.cap if degree is None else degree
        c = np.zeros(ctx.size(degree))
        c[0] = value
        return cls(ctx, degree, c)

    @classmethod
    def variable(cls, ctx, var, base_value, degree=None):
        degree = ctx.cap if degree is None else degree
        c = np.zeros(ctx.size(degree))
        c[0] = base_value
        if degree >= 1:
            c[ctx.lookup[MultiIndex(tuple(int(v == var) for v in range(ctx.nvars)))]] = 1.0
        return cls(ctx, degree, c)

    @property
    def value(self):
        return float(self.coeffs[0])

    def _align(self, other):
        if not isinstance(other, TaylorScalar):
            other = TaylorScalar.constant(self.ctx, float(other), self.degree)
        d = min(self.degree, other.degree)
        return (self.ctx.truncate(self.coeffs, d),
                self.ctx.truncate(other.coeffs, d), d)

    def __add__(self, other):
        a, b, d = self._align(other)
        return TaylorScalar(self.ctx, d, a + b)

    __radd__ = __add__

    def __neg__(self):
        return TaylorScalar(self.ctx, self.degree, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TaylorScalar) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, other):
        if not isinstance(other, TaylorScalar):
            return TaylorScalar(self.ctx, self.degree, self.coeffs * float(other))
        d = min(self.degree, other.degree)
        return TaylorScalar(self.ctx, d, self.ctx.mul(self.coeffs, self.degree,
                                                      other.coeffs, other.degree, d))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TaylorScalar):
            return self * (1.0 / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, k):
        if k != int(k) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = TaylorScalar.constant(self.ctx, 1.0, self.degree)
        for _ in range(int(k)):
            out = out * self
        return out

    def reciprocal(self):
        """Series reciprocal via Newton iteration on the truncation."""
        c0 = self.value
        if c0 == 0.0:
            raise ZeroDivisionError("series reciprocal at a zero constant term")
        x = TaylorScalar.constant(self.ctx, 1.0 / c0, self.degree)
        # each step doubles the correct order
        steps = max(1, math.ceil(math.log2(self.degree + 1))) if self.degree else 1
        for _ in range(steps):
            x = x * (2.0 - self * x)
        return x

    def nilpotent_part(self):
        c = self.coeffs.copy()
        c[0] = 0.0
        return TaylorScalar(self.ctx, self.degree, c)

    def _poly_in_nilpotent(self, series_coeffs):
        """sum_r series_coeffs[r] * h^r, h the zero-constant part of self."""
        h = self.nilpotent_part()
        out = TaylorScalar.constant(self.ctx, series_coeffs[0], self.degree)
        hp = TaylorScalar.constant(self.ctx, 1.0, self.degree)
        for r in range(1, self.degree + 1):
            hp = hp * h
            out = out + hp * series_coeffs[r]
        return out

    def exp(self):
        e0 = math.exp(self.value)
        return self._poly_in_nilpotent([e0 / math.factorial(r)
                                        for r in range(self.degree + 1)])

    def sin(self):
        s0, c0 = math.sin(self.value), math.cos(self.value)
        # sin(a + h) = sin a cos h + cos a sin h
        coeffs = []
        for r in range(self.degree + 1):
            if r % 4 == 0:
                coeffs.append(s0 / math.factorial(r))
            elif r % 4 == 1:
                coeffs.append(c0 / math.factorial(r))
            elif r % 4 == 2:
                coeffs.append(-s0 / math.factorial(r))
            else:
                coeffs.append(-c0 / math.factorial(r))
        return self._poly_in_nilpotent(coeffs)

    def cos(self):
        s0, c0 = math.cos(self.value), -math.sin(self.value)
        coeffs = []
        for r in range(self.degree + 1):
            if r % 4 == 0:
                coeffs.append(s0 / math.factorial(r))
            elif r % 4 == 1:
                coeffs.append(c0 / math.factorial(r))
            elif r % 4 == 2:
                coeffs.append(-s0 / math.factorial(r))
            else:
                coeffs.append(-c0 / math.factorial(r))
        return self._poly_in_nilpotent(coeffs)

    def compose_args(self, args):
        """Evaluate this series at TaylorScalar arguments.

        `args` must be one series per variable, all on a common context, with
        values equal to this series' expansion point offsets handled by the
        caller (the substituted arguments carry their own constant terms; the
        composition uses args[v] - args[v].value as the increment).
        """
        ctx_out = args[0].ctx
        deg_out = min(a.degree for a in args)
        incr = [a.nilpotent_part() for a in args]
        out = TaylorScalar.constant(ctx_out, 0.0, deg_out)
        powers = [[TaylorScalar.constant(ctx_out, 1.0, deg_out)] for _ in incr]
        for v, h in enumerate(incr):
            for _ in range(self.degree):
                powers[v].append(powers[v][-1] * h)
        for i, I in enumerate(self.ctx.indices):
            if I.order > self.degree:
                break
            c = self.coeffs[i]
            if c == 0.0:
                continue
            term = TaylorScalar.constant(ctx_out, c, deg_out)
            for v, e in enumerate(I):
                if e:
                    term = term * powers[v][e]
            out = out + term
        return out


# --------------------------------------------------------------------------
# analytic expressions: a small prefix-notation grammar
# --------------------------------------------------------------------------

#: expression tree node: float | ("x", i) | (op, child...) with op one of
#: "+", "-", "*", "/", "^", "exp", "sin", "cos"
AnalyticExpr = object

_UNARY = {"exp", "sin", "cos"}
_NARY = {"+", "*", "-", "/"}


def _tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_expr(text):
    """Parse prefix notation like ``(+ (* 2 x1) (sin x2))`` into a tree."""
    tokens = _tokenize(text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise ValueError("dangling '('")
            op = tokens[pos]
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(parse())
            if pos >= len(tokens):
                raise ValueError("missing ')'")
            pos += 1
            if op in _UNARY and len(args) != 1:
                raise ValueError(f"{op} takes one argument")
            if op == "^":
                if len(args) != 2 or not isinstance(args[1], float) \
                        or args[1] != int(args[1]):
                    raise ValueError("^ takes an expression and an integer")
            if op not in _UNARY and op not in _NARY and op != "^":
                raise ValueError(f"unknown operator {op!r}")
            return (op, *args)
        if tok == ")":
            raise ValueError("unexpected ')'")
        if tok.startswith("x") and tok[1:].isdigit():
            return ("x", int(tok[1:]) - 1)
        try:
            return float(tok)
        except ValueError as exc:
            raise ValueError(f"bad token {tok!r}") from exc

    tree = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens in expression")
    return tree


def _fold(op, vals):
    if op == "+":
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out
    if op == "*":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for v in vals[1:]:
            out = out - v
        return out
    if op == "/":
        out = vals[0]
        for v in vals[1:]:
            out = out / v
        return out
    raise ValueError(op)


def expand(expr, base, degree, ctx=None):
    """Taylor-expand an expression tree at `base` through `degree`."""
    if isinstance(expr, str):
        expr = parse_expr(expr)
    base = np.asarray(base, dtype=float)
    ctx = ctx or TaylorContext(len(base), degree)

    def ev(node):
        if isinstance(node, float):
            return TaylorScalar.constant(ctx, node, degree)
        if node[0] == "x":
            return TaylorScalar.variable(ctx, node[1], base[node[1]], degree)
        op = node[0]
        if op == "exp":
            return ev(node[1]).exp()
        if op == "sin":
            return ev(node[1]).sin()
        if op == "cos":
            return ev(node[1]).cos()
        if op == "^":
            return ev(node[1]) ** int(node[2])
        return _fold(op, [ev(a) for a in node[1:]])

    return ev(expr)


def eval_expr(expr, point):
    """Numerically evaluate an expression tree at a float point."""
    if isinstance(expr, str):
        expr = parse_expr(expr)
    point = np.asarray(point, dtype=float)

    def ev(node):
        if isinstance(node, float):
            return node
        if node[0] == "x":
            return float(point[node[1]])
        op = node[0]
        if op == "exp":
            return math.exp(ev(node[1]))
        if op == "sin":
            return math.sin(ev(node[1]))
        if op == "cos":
            return math.cos(ev(node[1]))
        if op == "^":
            return ev(node[1]) ** int(node[2])
        return _fold(op, [ev(a) for a in node[1:]])

    return ev(expr)


def derive(t, var):
    """Partial derivative of a TaylorScalar with respect to one variable."""
    return TaylorScalar(t.ctx, t.degree - 1, t.ctx.derive(t.coeffs, t.degree, var))


def partial(t, I):
    """The exact partial derivative d^I f at the base point (times nothing)."""
    I = MultiIndex(I)
    if I.order > t.degree:
        raise ValueError(f"|I|={I.order} exceeds truncation degree {t.degree}")
    fac = 1.0
    for e in I:
        fac *= math.factorial(e)
    return fac * float(t.coeffs[t.ctx.lookup[I]])


def _fd_plain(expr, base, I, step):
    """Plain central-difference estimate of d^I f at `base`."""
    base = np.asarray(base, dtype=float)

    def rec(vars_left, point_shifts):
        if not vars_left:
            return eval_expr(expr, base + point_shifts)
        v = vars_left[0]
        rest = vars_left[1:]
        e = np.zeros_like(base)
        e[v] = step
        return (rec(rest, point_shifts + e) - rec(rest, point_shifts - e)) / (2 * step)

    vars_expanded = []
    for v, k in enumerate(I):
        vars_expanded.extend([v] * k)
    return rec(vars_expanded, np.zeros_like(base))


def finite_difference_check(expr, base, I, step=1e-3):
    """|Richardson-extrapolated FD estimate - Taylor partial|, an oracle gap.

    Central differences are O(step^2); one Richardson step removes that term,
    which is enough for |I| <= 4 on smooth data.
    """
    I = MultiIndex(I)
    t = expand(expr, base, max(I.order, 1) + 1)
    exact = partial(t, I)
    f1 = _fd_plain(expr, base, I, step)
    f2 = _fd_plain(expr, base, I, step / 2.0)
    richardson = (4.0 * f2 - f1) / 3.0
    return abs(richardson - exact)
