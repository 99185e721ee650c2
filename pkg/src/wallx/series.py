"""Truncated generating series and the identity checkers.

All identities are stated degree-by-degree in a formal variable t (wall
quotients) or in q with Laurent t (reference products).  Coefficients are
exact RatFuns; equality checks either go through the symbolic kernel or the
seeded modular-evaluation backend.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .geom import (
    FixedPoint,
    chi_X,
    chi_pair,
    contribution,
    fiber_minus,
    fiber_plus,
    js_fixed_points,
    sqrt_class,
    example_term_l1_k2,
    compositions,
    i0_contribution,
)
from .kclass import KClass, euler_class
from .ratfun import (
    EvalBackend,
    EvalDegenerate,
    LinearForm,
    RatFun,
    binomial_rf,
    rf_equal,
    rf_sum,
    sample_points,
)


class NonUnitDivisor(ZeroDivisionError):
    pass


class CapExceeded(ValueError):
    pass


def pmap(fn, items, threads=1):
    """Order-preserving map, optionally over a thread pool.

    Results are assembled in input order, so the output is independent of
    the thread count (all work items are pure).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# truncated series


@dataclass
class TruncSeries:
    """Laurent-truncated series in one variable with RatFun coefficients."""

    coeffs: dict
    lo: int
    hi: int

    def __post_init__(self):
        self.coeffs = {
            d: c for d, c in self.coeffs.items()
            if self.lo <= d <= self.hi and not c.is_zero()
        }

    @staticmethod
    def one(order, lo=0):
        return TruncSeries({0: RatFun.const(1)}, lo, order)

    def coeff(self, d):
        return self.coeffs.get(d, RatFun.zero())

    def __add__(self, other):
        assert (self.lo, self.hi) == (other.lo, other.hi)
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out[d] + c if d in out else c
        return TruncSeries(out, self.lo, self.hi)

    def __neg__(self):
        return TruncSeries({d: -c for d, c in self.coeffs.items()},
                           self.lo, self.hi)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        assert (self.lo, self.hi) == (other.lo, other.hi)
        buckets = {}
        for da, ca in self.coeffs.items():
            for db, cb in other.coeffs.items():
                d = da + db
                if self.lo <= d <= self.hi:
                    buckets.setdefault(d, []).append(ca * cb)
        return TruncSeries(
            {d: rf_sum(terms) for d, terms in buckets.items()},
            self.lo, self.hi,
        )

    def __truediv__(self, other):
        """Division by a series with unit constant term (lo must be 0)."""
        assert (self.lo, self.hi) == (other.lo, other.hi)
        if self.lo != 0:
            raise NonUnitDivisor("Laurent window division not supported")
        b0 = other.coeff(0)
        if b0.is_zero():
            raise NonUnitDivisor("divisor has no unit constant term")
        inv0 = b0.inverse()
        out = {}
        for d in range(0, self.hi + 1):
            acc = [self.coeff(d)]
            for j in range(1, d + 1):
                bj = other.coeff(j)
                if not bj.is_zero() and not out.get(d - j, RatFun.zero()).is_zero():
                    acc.append(-(bj * out[d - j]))
            out[d] = rf_sum(acc) * inv0
        return TruncSeries(out, self.lo, self.hi)

    def equal(self, other, backend="symbolic"):
        assert (self.lo, self.hi) == (other.lo, other.hi)
        for d in range(self.lo, self.hi + 1):
            if not rf_equal(self.coeff(d), other.coeff(d), backend).equal:
                return False
        return True


def series_arith(a, b, op):
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def binom_series(x, sign, order):
    """(1 - t^{+-1})^x truncated: sum_d (-1)^d binom(x, d) t^{+-d}."""
    step = 1 if sign == "t" else -1
    coeffs = {}
    for d in range(order + 1):
        c = binomial_rf(x, d)
        coeffs[step * d] = c if d % 2 == 0 else -c
    lo = 0 if step == 1 else -order
    hi = order if step == 1 else 0
    return TruncSeries(coeffs, lo, hi)


# ---------------------------------------------------------------------------
# q/t reference products


@dataclass
class QTSeries:
    """Series in q (order q_order) with Laurent t in [t_lo, t_hi]."""

    coeffs: dict  # (n, j) -> RatFun
    q_order: int
    t_lo: int
    t_hi: int

    def __post_init__(self):
        self.coeffs = {k: c for k, c in self.coeffs.items() if not c.is_zero()}

    @staticmethod
    def one(q_order, t_lo=0, t_hi=0):
        return QTSeries({(0, 0): RatFun.const(1)}, q_order, t_lo, t_hi)

    def coeff(self, n, j):
        return self.coeffs.get((n, j), RatFun.zero())

    def __mul__(self, other):
        out = {}
        for (na, ja), ca in self.coeffs.items():
            for (nb, jb), cb in other.coeffs.items():
                n, j = na + nb, ja + jb
                if n <= self.q_order and self.t_lo <= j <= self.t_hi:
                    prev = out.get((n, j))
                    term = ca * cb
                    out[(n, j)] = term if prev is None else prev + term
        return QTSeries(out, self.q_order, self.t_lo, self.t_hi)


def _qt_binom_factor(x, k, tstep, q_order, t_lo, t_hi):
    """(1 - q^k t^tstep)^x truncated, as a QTSeries factor."""
    coeffs = {}
    for j in range(q_order // k + 1):
        if not (t_lo <= tstep * j <= t_hi):
            continue
        c = binomial_rf(x, j)
        coeffs[(k * j, tstep * j)] = c if j % 2 == 0 else -c
    return QTSeries(coeffs, q_order, t_lo, t_hi)


def product_series(kind, q_order, t_order=None):
    """Named reference products expanded to the given q-order.

    PT: prod_k (1 - q^k t)^{k m / lam3}
    MacMahon: M(q)^{2 m / lam3} = prod_k (1 - q^k)^{-2 k m / lam3}
    NC: MacMahon * prod (1 - q^k t)^{k m/lam3} * prod (1 - q^k t^-1)^{k m/lam3}
    """
    if t_order is None:
        t_order = q_order
    m_over_l3 = RatFun.var("m") / RatFun.var("lam3")
    if kind == "PT":
        out = QTSeries.one(q_order, 0, t_order)
        for k in range(1, q_order + 1):
            out = out * _qt_binom_factor(k * m_over_l3, k, 1,
                                         q_order, 0, t_order)
        return out
    if kind == "MacMahon":
        out = QTSeries.one(q_order)
        for k in range(1, q_order + 1):
            out = out * _qt_binom_factor(-2 * k * m_over_l3, k, 0,
                                         q_order, 0, 0)
        return out
    if kind == "NC":
        out = QTSeries.one(q_order, -t_order, t_order)
        for k in range(1, q_order + 1):
            out = out * _qt_binom_factor(-2 * k * m_over_l3, k, 0,
                                         q_order, -t_order, t_order)
            out = out * _qt_binom_factor(k * m_over_l3, k, 1,
                                         q_order, -t_order, t_order)
            out = out * _qt_binom_factor(k * m_over_l3, k, -1,
                                         q_order, -t_order, t_order)
        return out
    raise ValueError(f"unknown product kind {kind!r}")


def primary_series(chamber, gammaE, q_order, t_order=None):
    """Closed reference series per stability chamber, rational coefficients.

    I: exp(g q t); II_III: exp(g q t - g q t^-1); IV: exp(-g q t^-1);
    other: 1, with g the insertion pairing against the exceptional surface.
    """
    if t_order is None:
        t_order = q_order
    g = Fraction(gammaE)
    coeffs = {}
    if chamber == "I":
        for n in range(q_order + 1):
            if n <= t_order:
                coeffs[(n, n)] = RatFun.const(g**n / math.factorial(n))
    elif chamber == "II_III":
        for n in range(q_order + 1):
            for a in range(n + 1):
                b = n - a
                j = a - b
                if -t_order <= j <= t_order:
                    val = (g**a * (-g) ** b
                           / (math.factorial(a) * math.factorial(b)))
                    prev = coeffs.get((n, j), RatFun.zero())
                    coeffs[(n, j)] = prev + RatFun.const(val)
    elif chamber == "IV":
        for n in range(q_order + 1):
            if n <= t_order:
                coeffs[(n, -n)] = RatFun.const((-g) ** n / math.factorial(n))
    elif chamber == "other":
        coeffs[(0, 0)] = RatFun.const(1)
    else:
        raise ValueError(f"unknown chamber {chamber!r}")
    return QTSeries(coeffs, q_order, -t_order, t_order)


# ---------------------------------------------------------------------------
# reports


@dataclass
class DegreeRecord:
    d: int
    lhs: str
    rhs: str
    verdict: str
    backend: str
    points: list | None = None
    detail: list | None = None


@dataclass
class CheckReport:
    command: str
    params: dict
    seed: int | None
    degrees: list
    passed: bool
    sz_bound: float | None = None
    elapsed_ms: float | None = None

    def to_doc(self, include_timing=False):
        doc = {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "degrees": [
                {k: v for k, v in vars(rec).items() if v is not None}
                for rec in self.degrees
            ],
            "pass": self.passed,
        }
        if self.sz_bound is not None:
            doc["sz_bound"] = self.sz_bound
        if include_timing and self.elapsed_ms is not None:
            doc["elapsed_ms"] = self.elapsed_ms
        return doc

    def to_json(self, include_timing=False):
        return json.dumps(self.to_doc(include_timing), indent=2,
                          sort_keys=False) + "\n"


def _backend_name(backend):
    return backend if isinstance(backend, str) else backend.describe()


def _seed_of(backend):
    return backend.seed if isinstance(backend, EvalBackend) else None


# ---------------------------------------------------------------------------
# wall-crossing quotient


def _signed_contribution(fp, sign_override=None):
    c = contribution(fp)
    if sign_override and fp.label in sign_override:
        c = c if sign_override[fp.label] == 1 else -c
    return c


def _fiber_terms(k, i0, t_max, sign_override=None, threads=1):
    """Per-degree contribution lists for both sides of the wall."""
    num, den = {}, {}
    for d in range(t_max + 1):
        plus = fiber_plus(k, i0, d)
        num[d] = pmap(lambda fp: _signed_contribution(fp, sign_override),
                      plus, threads)
        minus = fiber_minus(k, i0, d)
        den[d] = pmap(lambda fp: _signed_contribution(fp, sign_override),
                      minus, threads)
    return num, den


def wallcross_quotient(k, i0, t_max, sign_override=None, threads=1):
    """[sum_d t^d sum_plus contrib] / [sum_d t^d sum_minus contrib]."""
    num, den = _fiber_terms(k, i0, t_max, sign_override, threads)
    nseries = TruncSeries({d: rf_sum(v) for d, v in num.items()}, 0, t_max)
    dseries = TruncSeries({d: rf_sum(v) for d, v in den.items()}, 0, t_max)
    return nseries / dseries


def _eval_quotient_at(num, den, point, t_max):
    """Residues of the quotient series coefficients at one sample point."""
    p = point.prime
    nvals = {d: sum(t.eval_mod(point.assign, p) for t in num[d]) % p
             for d in range(t_max + 1)}
    dvals = {d: sum(t.eval_mod(point.assign, p) for t in den[d]) % p
             for d in range(t_max + 1)}
    if dvals[0] == 0:
        raise EvalDegenerate("denominator constant term vanished")
    inv0 = pow(dvals[0], p - 2, p)
    q = {}
    for d in range(t_max + 1):
        acc = nvals[d]
        for j in range(1, d + 1):
            acc = (acc - dvals[j] * q[d - j]) % p
        q[d] = acc * inv0 % p
    return q


def check_wallcross(k, i0, t_max, backend="symbolic",
                    sign_override=None, threads=1):
    """Compare the wall quotient against (1-t)^{k m / lam3} by degree."""
    t0 = time.monotonic()
    x = k * RatFun.var("m") / RatFun.var("lam3")
    rhs_coeffs = {
        d: (binomial_rf(x, d) if d % 2 == 0 else -binomial_rf(x, d))
        for d in range(t_max + 1)
    }
    degrees = []
    sz = None
    if backend == "symbolic":
        quotient = wallcross_quotient(k, i0, t_max, sign_override, threads)
        for d in range(t_max + 1):
            lhs = quotient.coeff(d)
            rhs = rhs_coeffs[d]
            ok = rf_sum([lhs, -rhs]).is_zero()
            degrees.append(DegreeRecord(
                d=d, lhs=str(lhs), rhs=str(rhs),
                verdict="equal" if ok else "unequal",
                backend="symbolic",
            ))
    else:
        num, den = _fiber_terms(k, i0, t_max, sign_override, threads)
        maxdeg = max(
            max((t.degree_bound() for v in num.values() for t in v), default=0),
            max((t.degree_bound() for v in den.values() for t in v), default=0),
        ) + max(r.degree_bound() for r in rhs_coeffs.values())
        sz = float(Fraction(min(maxdeg, backend.prime), backend.prime)
                   ** backend.points)
        per_degree = {d: [] for d in range(t_max + 1)}
        stream = sample_points(backend)
        used = 0
        attempts = 0
        while used < backend.points:
            if attempts > 20 * backend.points:
                raise EvalDegenerate("sampling kept hitting poles")
            point = next(stream)
            attempts += 1
            try:
                q = _eval_quotient_at(num, den, point, t_max)
                rhs_vals = {
                    d: rhs_coeffs[d].eval_mod(point.assign, backend.prime)
                    for d in range(t_max + 1)
                }
            except EvalDegenerate:
                continue
            for d in range(t_max + 1):
                per_degree[d].append((q[d], rhs_vals[d]))
            used += 1
        for d in range(t_max + 1):
            pairs = per_degree[d]
            ok = all(a == b for a, b in pairs)
            degrees.append(DegreeRecord(
                d=d,
                lhs=json.dumps([str(a) for a, _ in pairs]),
                rhs=json.dumps([str(b) for _, b in pairs]),
                verdict="equal" if ok else "unequal",
                backend=_backend_name(backend),
                points=backend.points,
            ))
    from .geom import i0_label
    return CheckReport(
        command="wallcross",
        params={"wall": f"Lmm:{k}", "i0": i0_label(i0), "tmax": t_max},
        seed=_seed_of(backend),
        degrees=degrees,
        passed=all(r.verdict == "equal" for r in degrees),
        sz_bound=sz,
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# the proved localization identity over Lmm(k) with trivial reference


def _lam0_form(mult):
    return LinearForm.canonical(-mult, -mult, -mult, 0)


def _js_form(c_lam0, c_lam3, c_m=0):
    """c_lam0 * lam0 + c_lam3 * lam3 + c_m * m as a canonical form."""
    return LinearForm.canonical(-c_lam0, -c_lam0, c_lam3 - c_lam0, c_m)


def js_closed_formula(k, d):
    """Closed localization formula at the wall Lmm(k), degree d.

    Internal rank parameter kk = k - 1, total chi n = k d.  Stated over
    lam0 = -(lam1+lam2+lam3) and lam3 only.
    """
    kk = k - 1
    n = k * d
    pref = Fraction((-1) ** n, math.prod(math.factorial(i) for i in range(1, kk + 1)))
    terms = []
    for comp in compositions(d, kk + 1):
        scalar = pref / math.prod(math.factorial(di) for di in comp)
        term = RatFun.const(scalar)
        for i in range(kk + 1):
            for j in range(i + 1, kk + 1):
                # (j - i) + (d_i - d_j) lam3 / lam0
                f = _js_form(j - i, comp[i] - comp[j])
                term = term * RatFun.from_form(f) / RatFun.lam0()
        for i in range(kk + 1):
            di = comp[i]
            for a in range(di):
                for b in range(-i, kk - i + 1):
                    # m/lam3 - a - b lam0/lam3
                    f = _js_form(-b, -a, 1)
                    term = term * RatFun.from_form(f) / RatFun.var("lam3")
            for a in range(1, di + 1):
                for b in range(1, kk - i + 1):
                    f = _js_form(b, a)
                    term = term * RatFun.var("lam3") / RatFun.from_form(f)
                for b in range(1, i + 1):
                    f = _js_form(-b, a)
                    term = term * RatFun.var("lam3") / RatFun.from_form(f)
        terms.append(term)
    return rf_sum(terms)


def check_js(k, d_max, backend="symbolic", threads=1):
    """Three-way comparison of the localization sum at the wall Lmm(k).

    For each degree: the fixed-point sum, the closed product formula, and
    (-1)^d binom(k m / lam3, d) must agree pairwise.
    """
    t0 = time.monotonic()
    x = k * RatFun.var("m") / RatFun.var("lam3")
    degrees = []
    for d in range(1, d_max + 1):
        terms = pmap(contribution, js_fixed_points(k, d), threads)
        loc = rf_sum(terms)
        closed = js_closed_formula(k, d)
        binom = binomial_rf(x, d)
        if d % 2:
            binom = -binom
        checks = {
            "localization=closed": rf_equal(loc, closed, backend).equal,
            "localization=binomial": rf_equal(loc, binom, backend).equal,
            "closed=binomial": rf_equal(closed, binom, backend).equal,
        }
        ok = all(checks.values())
        degrees.append(DegreeRecord(
            d=d, lhs=str(loc), rhs=str(binom),
            verdict="equal" if ok else "unequal",
            backend=_backend_name(backend),
            detail=[f"{name}:{'equal' if v else 'unequal'}"
                    for name, v in checks.items()],
        ))
    return CheckReport(
        command="js",
        params={"k": k, "dmax": d_max},
        seed=_seed_of(backend),
        degrees=degrees,
        passed=all(r.verdict == "equal" for r in degrees),
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# dimensional reduction m -> lam3


def substitute_m(v):
    """Specialize the insertion weight m to lam3."""
    return v.substitute_m()


def chiZ_class(F):
    """Reduced pair class on the 3-fold Z: chi_Z(F,F) - chi_Z(F) + chi_Z(F)^v t3."""
    cx = chi_X(F)
    return chi_pair(F, F, "Z3fold") - cx + cx.dual().twist((0, 0, 1, 0))


def check_dimred(k, d_max, threads=1):
    """Specialization m = lam3 against the 3-fold model, point by point.

    Thickened points must die (their insertion class contains the weight
    m - lam3); Z-supported points must reproduce the Euler class of the
    reduced pair class; degree totals must give (-1)^d binom(k, d).
    """
    t0 = time.monotonic()
    degrees = []
    for d in range(0, d_max + 1):
        detail = []
        subbed = []
        for fp in js_fixed_points(k, d):
            sub = substitute_m(contribution(fp))
            subbed.append(sub)
            if fp.support == "thickened":
                has_t3 = chi_X(fp.sheaf).terms.get((0, 0, 1, 0), 0) > 0
                ok = sub.is_zero() and has_t3
                detail.append(f"{fp.label}:thickened:"
                              f"{'zero' if ok else 'NONZERO'}")
            elif fp.support == "on_Z":
                target = euler_class(chiZ_class(fp.sheaf))
                ok = rf_sum([sub, -target]).is_zero()
                detail.append(f"{fp.label}:on_Z:"
                              f"{'equal' if ok else 'unequal'}")
            else:
                ok = rf_sum([sub, -RatFun.const(1)]).is_zero()
                detail.append(f"{fp.label}:on_Y:"
                              f"{'equal' if ok else 'unequal'}")
        total = rf_sum(subbed)
        expected = RatFun.const((-1) ** d * math.comb(k, d))
        total_ok = rf_sum([total, -expected]).is_zero()
        all_ok = total_ok and not any(
            "NONZERO" in x or "unequal" in x for x in detail
        )
        degrees.append(DegreeRecord(
            d=d, lhs=str(total), rhs=str(expected),
            verdict="equal" if all_ok else "unequal",
            backend="symbolic",
            detail=detail,
        ))
    return CheckReport(
        command="dimred",
        params={"k": k, "dmax": d_max},
        seed=None,
        degrees=degrees,
        passed=all(r.verdict == "equal" for r in degrees),
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# insertion-free limit


def check_insertion_free(k, d_max, threads=1):
    """Series of bare square-root Euler classes over the JS fixed points.

    Expected: exp(-t/lam3) for k=1 (coefficients (-1/lam3)^d / d!) and the
    constant series 1 for k >= 2.
    """
    t0 = time.monotonic()
    degrees = []
    neg_inv_l3 = -(RatFun.var("lam3").inverse())
    for d in range(0, d_max + 1):
        terms = []
        for fp in js_fixed_points(k, d):
            e = euler_class(sqrt_class(fp.sheaf))
            if e.is_zero():
                continue
            sign = -1 if (fp.chi + fp.deg + fp.sign_extra) % 2 else 1
            terms.append(e if sign == 1 else -e)
        total = rf_sum(terms)
        if k == 1:
            expected = (neg_inv_l3 ** d) * RatFun.const(
                Fraction(1, math.factorial(d)))
        else:
            expected = RatFun.const(1 if d == 0 else 0)
        ok = rf_sum([total, -expected]).is_zero()
        degrees.append(DegreeRecord(
            d=d, lhs=str(total), rhs=str(expected),
            verdict="equal" if ok else "unequal",
            backend="symbolic",
        ))
    return CheckReport(
        command="insertion-free",
        params={"k": k, "dmax": d_max},
        seed=None,
        degrees=degrees,
        passed=all(r.verdict == "equal" for r in degrees),
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# sign search


def sign_search(points, target, cap=20, backend="symbolic"):
    """First lexicographic sign vector whose signed sum hits the target.

    Signs are searched in the order (+1, ..., +1), ..., (-1, ..., -1);
    returns None when no assignment works.
    """
    if len(points) > cap:
        raise CapExceeded(f"{len(points)} points exceeds cap {cap}")
    contribs = [contribution(fp) for fp in points]
    for signs in itertools.product((1, -1), repeat=len(points)):
        total = rf_sum([
            c if s == 1 else -c for c, s in zip(contribs, signs)
        ])
        if rf_equal(total, target, backend).equal:
            return signs
    return None
