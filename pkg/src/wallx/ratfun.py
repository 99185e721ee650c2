"""Exact rational functions in the equivariant parameters lam1, lam2, lam3, m.

Values live in Q(lam1, lam2, lam3, m).  The fourth torus weight lam0 is not a
variable: it is eliminated at construction time through the Calabi-Yau
relation lam0 = -(lam1 + lam2 + lam3).

A RatFun is kept in partially factored form: a product of integer powers of
linear forms times a residual num/den pair of polynomials.  Every denominator
produced by localization is a product of linear forms, so cancellation only
ever needs trial division by linear forms; no general multivariate GCD is
attempted.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

VARS = ("lam1", "lam2", "lam3", "m")
NVARS = 4
ZERO_EXP = (0, 0, 0, 0)
DEFAULT_PRIME = (1 << 61) - 1


class DivisionByZero(ZeroDivisionError):
    pass


class ZeroForm(ValueError):
    """All coefficients of a would-be linear form vanish."""


class PoleAtZeroWeight(ZeroDivisionError):
    pass


class PoleAtSubstitution(ZeroDivisionError):
    pass


class EvalDegenerate(RuntimeError):
    """Repeated sampling kept hitting zeros of a denominator."""


class ParseError(ValueError):
    pass


def _div_exact(x, c):
    """x / c staying in int when the division is exact."""
    if isinstance(x, int) and isinstance(c, int) and c != 0 and x % c == 0:
        return x // c
    return Fraction(x) / Fraction(c)


def _grlex_key(exp):
    return (sum(exp), exp)


# ---------------------------------------------------------------------------
# polynomials


class MultiPoly:
    """Sparse polynomial: dict from exponent 4-tuple to a nonzero rational."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @staticmethod
    def const(c):
        c = c if isinstance(c, int) else Fraction(c)
        return MultiPoly({ZERO_EXP: c} if c != 0 else {})

    @staticmethod
    def var(name):
        i = VARS.index(name)
        e = tuple(1 if j == i else 0 for j in range(NVARS))
        return MultiPoly({e: 1})

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and ZERO_EXP in self.terms)

    def const_value(self):
        return self.terms.get(ZERO_EXP, 0)

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def leading(self):
        """Graded-lex leading (exponent, coefficient)."""
        if not self.terms:
            return ZERO_EXP, 0
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return MultiPoly(out)

    def __neg__(self):
        return MultiPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.terms or not other.terms:
            return MultiPoly()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = {}
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3])
                s = out.get(e, 0) + ca * cb
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(out)

    def scale(self, c):
        if c == 0:
            return MultiPoly()
        return MultiPoly({e: v * c for e, v in self.terms.items()})

    def __pow__(self, n):
        assert isinstance(n, int) and n >= 0
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def eval_mod(self, assign, p):
        total = 0
        for e, c in self.terms.items():
            if isinstance(c, int):
                cv = c % p
            else:
                cv = c.numerator % p * pow(c.denominator % p, p - 2, p) % p
            for i in range(NVARS):
                if e[i]:
                    cv = cv * pow(assign[i], e[i], p) % p
            total = (total + cv) % p
        return total

    def subs_m_lam3(self):
        """Substitute m -> lam3 (exponent folding (e1,e2,e3,em) -> (e1,e2,e3+em,0))."""
        out = {}
        for e, c in self.terms.items():
            ne = (e[0], e[1], e[2] + e[3], 0)
            s = out.get(ne, 0) + c
            if s == 0:
                out.pop(ne, None)
            else:
                out[ne] = s
        return MultiPoly(out)

    def divmod_linear(self, form):
        """Divide by a linear form; returns (quotient, exact) with exact a bool.

        Synthetic division along the form's pivot variable (its first variable
        with nonzero coefficient, which is also its graded-lex leading one).
        """
        coeffs = form.coeffs
        piv = next(i for i in range(NVARS) if coeffs[i] != 0)
        cp = coeffs[piv]
        rest = [(i, coeffs[i]) for i in range(piv + 1, NVARS) if coeffs[i] != 0]
        # bucket the dividend by pivot exponent
        by_deg = {}
        for e, c in self.terms.items():
            by_deg.setdefault(e[piv], {})[e] = c
        if not by_deg:
            return MultiPoly(), True
        top = max(by_deg)
        quot = {}
        carry = {}  # p_k - cp-free part, at current pivot level
        for k in range(top, -1, -1):
            level = dict(by_deg.get(k, {}))
            for e, c in carry.items():
                s = level.get(e, 0) + c
                if s == 0:
                    level.pop(e, None)
                else:
                    level[e] = s
            if k == 0:
                return (MultiPoly(quot), not level)
            carry = {}
            for e, c in level.items():
                q = _div_exact(c, cp)
                eq = list(e)
                eq[piv] = k - 1
                eq = tuple(eq)
                quot[eq] = quot.get(eq, 0) + q
                if quot[eq] == 0:
                    del quot[eq]
                # subtract q * x^eq * (rest of the form) from the next level
                for i, ci in rest:
                    er = list(eq)
                    er[i] += 1
                    er = tuple(er)
                    s = carry.get(er, 0) - q * ci
                    if s == 0:
                        carry.pop(er, None)
                    else:
                        carry[er] = s
        return MultiPoly(quot), not carry  # pragma: no cover

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            c = Fraction(self.terms[e])
            mono = "*".join(
                VARS[i] + (f"^{e[i]}" if e[i] > 1 else "")
                for i in range(NVARS)
                if e[i]
            )
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        sign0, body0 = parts[0]
        out = ("-" if sign0 == "-" else "") + body0
        for sgn, body in parts[1:]:
            out += f" {sgn} {body}"
        return out


# ---------------------------------------------------------------------------
# linear forms


@dataclass(frozen=True, order=True)
class LinearForm:
    """c1*lam1 + c2*lam2 + c3*lam3 + cm*m, canonicalized.

    The canonical representative has its first nonzero coefficient positive;
    `sign` records the parity of the normalization that produced it.
    """

    coeffs: tuple
    sign: int = field(default=1, compare=False)

    @staticmethod
    def canonical(c1, c2, c3, cm):
        coeffs = (c1, c2, c3, cm)
        if not any(coeffs):
            raise ZeroForm("all coefficients vanish")
        lead = next(c for c in coeffs if c != 0)
        if lead < 0:
            return LinearForm(tuple(-c for c in coeffs), -1)
        return LinearForm(coeffs, 1)

    def unsigned(self):
        return self if self.sign == 1 else LinearForm(self.coeffs, 1)

    def to_poly(self):
        out = {}
        for i, c in enumerate(self.coeffs):
            if c:
                e = tuple(1 if j == i else 0 for j in range(NVARS))
                out[e] = c
        return MultiPoly(out)

    def eval_mod(self, assign, p):
        return sum(c * a for c, a in zip(self.coeffs, assign)) % p

    def subs_m_lam3(self):
        """m -> lam3; returns (LinearForm, sign) or (None, 0) if it collapses."""
        c1, c2, c3, cm = self.coeffs
        try:
            f = LinearForm.canonical(c1, c2, c3 + cm, 0)
        except ZeroForm:
            return None, 0
        return f.unsigned(), f.sign

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            body = VARS[i] if mag == 1 else f"{mag}*{VARS[i]}"
            parts.append(("-" if c < 0 else "+", body))
        sign0, body0 = parts[0]
        out = ("-" if sign0 == "-" else "") + body0
        for sgn, body in parts[1:]:
            out += f" {sgn} {body}"
        return out


def linear_form_of_weight(w):
    """Linear form of a torus weight (w0, w1, w2, w3, wm), eliminating lam0.

    lam0 = -(lam1+lam2+lam3), so the coefficients become
    (w1-w0, w2-w0, w3-w0, wm).  Raises ZeroForm when they all vanish
    (the caller decides the policy for genuinely zero weights).
    """
    w0, w1, w2, w3, wm = w
    return LinearForm.canonical(w1 - w0, w2 - w0, w3 - w0, wm)


# ---------------------------------------------------------------------------
# rational functions

_ONE = MultiPoly.const(1)


class RatFun:
    """prod of LinearForm^exp times residual num/den."""

    __slots__ = ("factored", "num", "den")

    def __init__(self, factored=None, num=_ONE, den=_ONE, normalize=True):
        self.factored = dict(factored or {})
        self.num = num
        self.den = den
        if normalize:
            self._normalize()

    # -- constructors

    @staticmethod
    def zero():
        return RatFun({}, MultiPoly(), _ONE, normalize=False)

    @staticmethod
    def const(c):
        c = Fraction(c)
        if c == 0:
            return RatFun.zero()
        num = MultiPoly.const(c.numerator)
        den = MultiPoly.const(c.denominator)
        return RatFun({}, num, den)

    @staticmethod
    def var(name):
        i = VARS.index(name)
        coeffs = tuple(1 if j == i else 0 for j in range(NVARS))
        return RatFun({LinearForm(coeffs): 1})

    @staticmethod
    def lam0():
        return RatFun.from_form(LinearForm.canonical(-1, -1, -1, 0))

    @staticmethod
    def from_form(form, exp=1):
        sign = 1 if form.sign == 1 or exp % 2 == 0 else -1
        num = MultiPoly.const(sign)
        return RatFun({form.unsigned(): exp}, num)

    @staticmethod
    def from_poly(p):
        return RatFun({}, p)

    # -- normalization

    def _normalize(self):
        if self.num.is_zero():
            self.factored = {}
            self.num = MultiPoly()
            self.den = _ONE
            return
        if self.den.is_zero():
            raise DivisionByZero("zero residual denominator")
        fold = {}
        for f, e in self.factored.items():
            if e == 0:
                continue
            if f.sign != 1:
                if e % 2:
                    self.num = self.num.scale(-1)
                f = f.unsigned()
            fold[f] = fold.get(f, 0) + e
        self.factored = {f: e for f, e in fold.items() if e != 0}
        # a residual that is itself one linear form moves to the factored part
        split = _linear_split(self.den)
        if split is not None:
            content, form = split
            self.factored[form] = self.factored.get(form, 0) - 1
            self.num = self.num.scale(Fraction(1, 1) / content)
            self.den = _ONE
        split = _linear_split(self.num)
        if split is not None:
            content, form = split
            self.factored[form] = self.factored.get(form, 0) + 1
            c = content if content.denominator != 1 else content.numerator
            self.num = MultiPoly.const(c)
        self.factored = {f: e for f, e in self.factored.items() if e != 0}
        # cancel factored forms against the residual den, then pull any
        # remaining copies of them out of the residual num
        for f in list(self.factored):
            while not self.den.is_const():
                q, exact = self.den.divmod_linear(f)
                if not exact:
                    break
                self.den = q
                self.factored[f] = self.factored.get(f, 0) - 1
            while not self.num.is_const():
                q, exact = self.num.divmod_linear(f)
                if not exact:
                    break
                self.num = q
                self.factored[f] = self.factored.get(f, 0) + 1
            if self.factored.get(f) == 0:
                del self.factored[f]
        # monic positive denominator
        _, lead = self.den.leading()
        if lead != 1:
            self.num = self.num.scale(Fraction(1, 1) / lead)
            self.den = self.den.scale(Fraction(1, 1) / lead)

    def extract_linear(self, forms):
        """Pull every possible copy of the given linear forms out of num.

        Returns a new RatFun.  This is the cancellation workhorse used after
        summing localization contributions over a common denominator.
        """
        factored = dict(self.factored)
        num = self.num
        if num.is_zero():
            return RatFun.zero()
        for f in forms:
            f = f.unsigned()
            while not num.is_const():
                q, exact = num.divmod_linear(f)
                if not exact:
                    break
                num = q
                factored[f] = factored.get(f, 0) + 1
        return RatFun(factored, num, self.den)

    # -- predicates

    def is_zero(self):
        return self.num.is_zero()

    def degree_bound(self):
        """Bound on the degrees of the fully expanded numerator/denominator."""
        up = self.num.total_degree() + sum(e for e in self.factored.values() if e > 0)
        dn = self.den.total_degree() + sum(-e for e in self.factored.values() if e < 0)
        return up + dn

    def expand(self):
        """Return (N, D) MultiPolys with value = N/D and no factored part."""
        n, d = self.num, self.den
        for f, e in self.factored.items():
            p = f.to_poly() ** abs(e)
            if e > 0:
                n = n * p
            else:
                d = d * p
        return n, d

    # -- arithmetic

    def __mul__(self, other):
        other = _coerce(other)
        if self.is_zero() or other.is_zero():
            return RatFun.zero()
        factored = dict(self.factored)
        for f, e in other.factored.items():
            factored[f] = factored.get(f, 0) + e
        return RatFun(factored, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        factored = {f: -e for f, e in self.factored.items()}
        return RatFun(factored, self.den, self.num)

    def __truediv__(self, other):
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __neg__(self):
        return RatFun(self.factored, self.num.scale(-1), self.den, normalize=False)

    def __add__(self, other):
        return rf_sum([self, _coerce(other)])

    __radd__ = __add__

    def __sub__(self, other):
        return rf_sum([self, -_coerce(other)])

    def __rsub__(self, other):
        return rf_sum([_coerce(other), -self])

    def __pow__(self, n):
        assert isinstance(n, int)
        if n < 0:
            return self.inverse() ** (-n)
        result = RatFun.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, (RatFun, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        na, da = self.expand()
        nb, db = other.expand()
        return (na * db - nb * da).is_zero()

    def __hash__(self):  # pragma: no cover - not used as dict key
        return 0

    # -- specialization and evaluation

    def substitute_m(self):
        """Specialize m -> lam3 on the factored representation."""
        factored = {}
        num = self.num.subs_m_lam3()
        den = self.den.subs_m_lam3()
        sign = 1
        for f, e in self.factored.items():
            nf, s = f.subs_m_lam3()
            if nf is None:
                if e > 0:
                    return RatFun.zero()
                raise PoleAtSubstitution(f"denominator factor {f} vanishes at m=lam3")
            factored[nf] = factored.get(nf, 0) + e
            if e % 2 and s == -1:
                sign = -sign
        if den.is_zero():
            raise PoleAtSubstitution("residual denominator vanishes at m=lam3")
        if sign == -1:
            num = num.scale(-1)
        return RatFun(factored, num, den)

    def eval_mod(self, assign, p):
        """Evaluate at residues mod p.  Raises EvalDegenerate on a pole."""
        den = self.den.eval_mod(assign, p)
        if den == 0:
            raise EvalDegenerate("denominator hit zero at sample point")
        acc = self.num.eval_mod(assign, p) * pow(den, p - 2, p) % p
        for f, e in self.factored.items():
            v = f.eval_mod(assign, p)
            if v == 0:
                if e < 0:
                    raise EvalDegenerate("denominator hit zero at sample point")
                return 0
            acc = acc * pow(v, e if e > 0 else p - 1 + e, p) % p
        return acc

    def eval_exact(self, assign):
        """Evaluate at exact rational assignments; raises DivisionByZero on poles."""
        num = sum(
            Fraction(c)
            * math.prod(Fraction(assign[i]) ** e[i] for i in range(NVARS))
            for e, c in self.num.terms.items()
        )
        den = sum(
            Fraction(c)
            * math.prod(Fraction(assign[i]) ** e[i] for i in range(NVARS))
            for e, c in self.den.terms.items()
        )
        if den == 0:
            raise DivisionByZero("denominator vanishes at point")
        acc = Fraction(num) / den
        for f, e in self.factored.items():
            v = sum(Fraction(c) * Fraction(a) for c, a in zip(f.coeffs, assign))
            if v == 0:
                if e < 0:
                    raise DivisionByZero("denominator form vanishes at point")
                return Fraction(0)
            acc *= v**e
        return acc

    def as_fraction(self):
        """Constant value as a Fraction; raises ValueError if not constant."""
        if self.factored or not self.num.is_const() or not self.den.is_const():
            n, d = self.expand()
            if not n.is_const() or not d.is_const():
                raise ValueError("not a constant")
            return Fraction(n.const_value()) / Fraction(d.const_value())
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.num.const_value()) / Fraction(self.den.const_value())

    # -- serialization

    def __str__(self):
        forms = " ; ".join(
            f"{f}^{self.factored[f]}" for f in sorted(self.factored)
        )
        inner = f" {forms} " if forms else " "
        return f"prod[{inner}] * ( {self.num} ) / ( {self.den} )"

    def __repr__(self):
        return f"RatFun({self})"


def _linear_split(poly):
    """(signed content, canonical LinearForm) if poly is one linear form.

    Returns None unless every term of poly is homogeneous of degree 1.
    """
    if not poly.terms or any(sum(e) != 1 for e in poly.terms):
        return None
    coeffs = [Fraction(0)] * NVARS
    for e, c in poly.terms.items():
        coeffs[e.index(1)] += Fraction(c)
    lcm = math.lcm(*(q.denominator for q in coeffs if q))
    ints = [int(q * lcm) for q in coeffs]
    g = math.gcd(*(abs(n) for n in ints if n))
    form = LinearForm.canonical(*(n // g for n in ints))
    content = Fraction(g, lcm) * form.sign
    return content, form.unsigned()


def _coerce(x):
    if isinstance(x, RatFun):
        return x
    if isinstance(x, (int, Fraction)):
        return RatFun.const(x)
    raise TypeError(f"cannot coerce {x!r} to RatFun")


def arith(a, b, op):
    """Named arithmetic entry point: op in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise DivisionByZero("division by zero RatFun")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def binomial_rf(x, d):
    """x (x-1) ... (x-d+1) / d! as a RatFun."""
    result = RatFun.const(Fraction(1, math.factorial(d)))
    for i in range(d):
        result = result * (x - i)
    return result


def rf_sum(terms):
    """Exact sum of RatFuns over the shared factored denominator.

    Collects the common linear-form part, expands only each term's leftover
    factors, sums the numerators, and pulls linear factors back out of the
    result by trial division.
    """
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        return RatFun.zero()
    if len(terms) == 1:
        return terms[0]
    allforms = set()
    for t in terms:
        allforms.update(t.factored)
    common = {
        f: min(t.factored.get(f, 0) for t in terms) for f in allforms
    }
    # residual denominators: constant ones fold into coefficients
    polydens = []
    prepared = []  # (num MultiPoly, leftover factored dict, polyden index or None)
    for t in terms:
        num, den = t.num, t.den
        if den.is_const():
            num = num.scale(Fraction(1, 1) / den.const_value())
            idx = None
        else:
            idx = len(polydens)
            polydens.append(den)
        left = {f: e - common.get(f, 0) for f, e in t.factored.items()}
        for f, c in common.items():
            if f not in t.factored:
                left[f] = -c
        prepared.append((num, {f: e for f, e in left.items() if e}, idx))
    total_num = MultiPoly()
    total_den = _ONE
    for dpoly in polydens:
        total_den = total_den * dpoly
    for num, left, idx in prepared:
        expanded = num
        for f, e in left.items():
            assert e >= 0, "common part must minorize every term"
            expanded = expanded * (f.to_poly() ** e)
        for j, dpoly in enumerate(polydens):
            if j != idx:
                expanded = expanded * dpoly
        total_num = total_num + expanded
    raw = RatFun(common, total_num, total_den, normalize=False)
    if raw.is_zero():
        return RatFun.zero()
    out = raw.extract_linear(sorted(allforms))
    return out


# ---------------------------------------------------------------------------
# identity testing


@dataclass(frozen=True)
class EvalPoint:
    prime: int
    assign: tuple
    seed: int


@dataclass(frozen=True)
class EvalBackend:
    points: int = 5
    seed: int = 42
    prime: int = DEFAULT_PRIME

    def describe(self):
        return f"eval(points={self.points}, seed={self.seed}, prime={self.prime})"


@dataclass(frozen=True)
class EqResult:
    equal: bool
    witness: object = None
    sz_bound: Fraction | None = None
    backend: str = "symbolic"


def sample_points(backend, n_denominators_hint=0):
    """Deterministic stream of candidate evaluation points for a backend."""
    rng = random.Random(backend.seed)
    while True:
        assign = tuple(rng.randrange(1, backend.prime) for _ in range(NVARS))
        yield EvalPoint(backend.prime, assign, backend.seed)


def rf_equal(a, b, backend="symbolic"):
    """Decide a == b symbolically or by seeded modular evaluation."""
    if backend == "symbolic":
        diff = rf_sum([a, -b])
        if diff.is_zero():
            return EqResult(True)
        return EqResult(False, witness=diff)
    assert isinstance(backend, EvalBackend)
    p = backend.prime
    deg = a.degree_bound() + b.degree_bound()
    bound = Fraction(min(deg, p), p) ** backend.points
    stream = sample_points(backend)
    checked = 0
    attempts = 0
    max_attempts = backend.points * 20
    while checked < backend.points:
        if attempts >= max_attempts:
            raise EvalDegenerate(
                f"{max_attempts} sample attempts all hit denominator zeros"
            )
        point = next(stream)
        attempts += 1
        try:
            va = a.eval_mod(point.assign, p)
            vb = b.eval_mod(point.assign, p)
        except EvalDegenerate:
            continue
        if va != vb:
            return EqResult(False, witness=point, sz_bound=bound,
                            backend=backend.describe())
        checked += 1
    return EqResult(True, sz_bound=bound, backend=backend.describe())


# ---------------------------------------------------------------------------
# text grammar

_TOKEN_RE = re.compile(
    r"\s*(prod\[|\]|;|\^|\*|\(|\)|/|\+|-|[0-9]+|lam1|lam2|lam3|m\b)"
)


def _tokenize(s):
    tokens = []
    pos = 0
    while pos < len(s):
        mo = _TOKEN_RE.match(s, pos)
        if not mo:
            if s[pos:].strip():
                raise ParseError(f"unexpected input at {s[pos:pos + 12]!r}")
            break
        tokens.append(mo.group(1))
        pos = mo.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        t = self.peek()
        if t is None or (expect is not None and t != expect):
            raise ParseError(f"expected {expect!r}, got {t!r}")
        self.i += 1
        return t

    def parse_int(self):
        neg = False
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                neg = not neg
        t = self.take()
        if not t.isdigit():
            raise ParseError(f"expected integer, got {t!r}")
        return -int(t) if neg else int(t)

    def parse_poly(self, stop, allow_power=True):
        """Sum of terms until a stop token (not consumed).

        allow_power=False parses a linear-form body, where `^` belongs to
        the enclosing `<form>^<exp>` syntax rather than to a variable.
        """
        poly = MultiPoly()
        first = True
        while self.peek() not in stop:
            sign = 1
            while self.peek() in ("+", "-"):
                if self.take() == "-":
                    sign = -sign
                first = False
            if self.peek() is None:
                raise ParseError("unterminated polynomial")
            coeff = Fraction(sign)
            exp = [0, 0, 0, 0]
            saw = False
            while True:
                t = self.peek()
                if t is not None and t.isdigit():
                    self.take()
                    val = int(t)
                    if self.peek() == "/" and self.i + 1 < len(self.toks) \
                            and self.toks[self.i + 1].isdigit():
                        self.take("/")
                        val = Fraction(val, int(self.take()))
                    coeff *= val
                    saw = True
                elif t in VARS:
                    self.take()
                    idx = VARS.index(t)
                    power = 1
                    if allow_power and self.peek() == "^":
                        self.take("^")
                        power = self.parse_int()
                    exp[idx] += power
                    saw = True
                else:
                    break
                if self.peek() == "*":
                    self.take("*")
                    continue
                break
            if not saw:
                raise ParseError(f"empty term near {self.peek()!r}")
            c = coeff if coeff.denominator != 1 else coeff.numerator
            e = tuple(exp)
            poly = poly + MultiPoly({e: c})
            first = False
        if first:
            raise ParseError("empty polynomial")
        return poly


def parse_ratfun(s):
    p = _Parser(_tokenize(s))
    p.take("prod[")
    factored = {}
    if p.peek() != "]":
        while True:
            fp = p.parse_poly(stop=("^",), allow_power=False)
            p.take("^")
            e = p.parse_int()
            form = _poly_to_form(fp)
            factored[form.unsigned()] = factored.get(form.unsigned(), 0) + e
            if form.sign == -1 and e % 2:
                raise ParseError(f"non-canonical form {fp}")
            if p.peek() == ";":
                p.take(";")
                continue
            break
    p.take("]")
    p.take("*")
    p.take("(")
    num = p.parse_poly(stop=(")",))
    p.take(")")
    p.take("/")
    p.take("(")
    den = p.parse_poly(stop=(")",))
    p.take(")")
    if p.peek() is not None:
        raise ParseError(f"trailing tokens from {p.peek()!r}")
    return RatFun(factored, num, den)


def parse_poly(s):
    p = _Parser(_tokenize(s))
    poly = p.parse_poly(stop=(None,))
    if p.peek() is not None:
        raise ParseError("trailing tokens")
    return poly


def _poly_to_form(poly):
    coeffs = [0, 0, 0, 0]
    for e, c in poly.terms.items():
        if sum(e) != 1:
            raise ParseError(f"not a linear form: {poly}")
        if not isinstance(c, int) and Fraction(c).denominator != 1:
            raise ParseError(f"non-integer form coefficient in {poly}")
        idx = e.index(1)
        coeffs[idx] = int(c)
    return LinearForm.canonical(*coeffs)
