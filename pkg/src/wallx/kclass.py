"""Virtual equivariant characters for the torus T0 x C*_m.

A Weight is the exponent vector (w1, w2, w3, wm) of a monomial
t1^w1 t2^w2 t3^w3 e^{wm m}; the scaling weight t0 is never stored, it is
folded in through the relation t0 t1 t2 t3 = 1, i.e. t0^k = (t1 t2 t3)^{-k}.
A KClass is a finite Z-linear combination of weights.
"""

from __future__ import annotations

from .ratfun import PoleAtZeroWeight, RatFun, ZeroForm, linear_form_of_weight

ZERO_WEIGHT = (0, 0, 0, 0)


def weight(w1=0, w2=0, w3=0, wm=0, w0=0):
    """Canonical weight with the t0 exponent folded into t1 t2 t3."""
    return (w1 - w0, w2 - w0, w3 - w0, wm)


def t0_weight(k):
    return weight(w0=k)


class KClass:
    """Finite multiset of weights with integer multiplicities."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        self.terms = {w: int(c) for w, c in terms.items() if c != 0}

    @staticmethod
    def zero():
        return KClass()

    @staticmethod
    def line(w1=0, w2=0, w3=0, wm=0, w0=0):
        return KClass({weight(w1, w2, w3, wm, w0): 1})

    def rank(self):
        return sum(self.terms.values())

    def zero_mult(self):
        return self.terms.get(ZERO_WEIGHT, 0)

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, 0) + c
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
        return KClass(out)

    def __neg__(self):
        return KClass({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def tensor(self, other):
        out = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                w = (wa[0] + wb[0], wa[1] + wb[1], wa[2] + wb[2], wa[3] + wb[3])
                s = out.get(w, 0) + ca * cb
                if s == 0:
                    out.pop(w, None)
                else:
                    out[w] = s
        return KClass(out)

    def twist(self, w):
        """Tensor with the single weight w."""
        return KClass({
            (a[0] + w[0], a[1] + w[1], a[2] + w[2], a[3] + w[3]): c
            for a, c in self.terms.items()
        })

    def dual(self):
        return KClass({tuple(-x for x in w): c for w, c in self.terms.items()})

    def scale(self, n):
        return KClass({w: c * n for w, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, KClass) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "sum[ ]"
        body = " ; ".join(
            f"{self.terms[w]}*({w[0]},{w[1]},{w[2]},{w[3]})"
            for w in sorted(self.terms)
        )
        return f"sum[ {body} ]"

    __repr__ = __str__


def kclass_ops(a, b, op):
    """Named entry point: op in {add, sub, tensor, dual}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "tensor":
        return a.tensor(b)
    if op == "dual":
        return a.dual()
    raise ValueError(f"unknown op {op!r}")


def parse_kclass(s):
    s = s.strip()
    if not (s.startswith("sum[") and s.endswith("]")):
        raise ValueError(f"bad KClass text {s!r}")
    body = s[4:-1].strip()
    if not body:
        return KClass.zero()
    terms = {}
    for chunk in body.split(";"):
        mult, _, wpart = chunk.strip().partition("*")
        w = tuple(int(x) for x in wpart.strip().strip("()").split(","))
        assert len(w) == 4
        terms[w] = terms.get(w, 0) + int(mult)
    return KClass(terms)


def chi_p1(a, b):
    """Character of chi(P^1, O(a Z0 + b Zinf)) by equivariant Riemann-Roch.

    The geometric sum of the RR formula gives sum_{k=-a}^{b} t0^k when
    -a <= b, the empty class when b = -a-1, and minus the complementary
    range when b < -a-1.  The rank is a+b+1 in every case.
    """
    if -a <= b:
        return KClass({t0_weight(k): 1 for k in range(-a, b + 1)})
    if b == -a - 1:
        return KClass.zero()
    return KClass({t0_weight(k): -1 for k in range(b + 1, -a)})


def euler_class(v):
    """Product of the weight linear forms with multiplicities.

    A positive net multiplicity of the zero weight kills the class (a trivial
    summand makes the Euler class vanish); a negative one is a genuine pole
    and raises PoleAtZeroWeight.
    """
    zm = v.zero_mult()
    if zm > 0:
        return RatFun.zero()
    if zm < 0:
        raise PoleAtZeroWeight("zero weight with negative multiplicity")
    factored = {}
    sign = 1
    for w, c in v.terms.items():
        if w == ZERO_WEIGHT:
            continue
        form = linear_form_of_weight((0, *w))
        factored[form.unsigned()] = factored.get(form.unsigned(), 0) + c
        if form.sign == -1 and c % 2:
            sign = -sign
    out = RatFun(factored)
    return out if sign == 1 else -out
