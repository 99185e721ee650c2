"""Equivariant sheaves on the local resolved conifold 4-fold O_P1(-1,-1,0).

Every torus-fixed object in scope pushes down to a finite direct sum of
twisted line bundles O(a Z0 + b Zinf) x t^w on the base P1.  This module
computes their chi-classes by equivariant Riemann-Roch on P1 plus adjunction
along the normal bundle of P1 in the relevant ambient space, and enumerates
the classified fixed loci over the walls Lmm(k) together with their signs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .kclass import KClass, chi_p1, euler_class, weight
from .ratfun import LinearForm, PoleAtZeroWeight, RatFun

ON_Y = "on_Y"
ON_Z = "on_Z"
THICKENED = "thickened"


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class EquivLineBundle:
    """O(a Z0 + b Zinf) tensored with the character t^twist."""

    a: int
    b: int
    twist: tuple = (0, 0, 0, 0)

    def shifted(self, w):
        t = self.twist
        return EquivLineBundle(
            self.a, self.b,
            (t[0] + w[0], t[1] + w[1], t[2] + w[2], t[3] + w[3]),
        )


@dataclass(frozen=True)
class EquivSheaf:
    summands: tuple

    @staticmethod
    def of(*bundles):
        return EquivSheaf(tuple(bundles))

    def __len__(self):
        return len(self.summands)


O_P1 = EquivLineBundle(0, 0)

# normal bundle summands of P1 inside each ambient space
AMBIENT_NORMAL = {
    "P1": (),
    "Y3fold": (
        EquivLineBundle(0, -1, weight(w1=-1)),
        EquivLineBundle(0, 0, weight(w3=-1)),
    ),
    "Z3fold": (
        EquivLineBundle(0, -1, weight(w1=-1)),
        EquivLineBundle(0, -1, weight(w2=-1)),
    ),
    "X4fold": (
        EquivLineBundle(0, -1, weight(w1=-1)),
        EquivLineBundle(0, -1, weight(w2=-1)),
        EquivLineBundle(0, 0, weight(w3=-1)),
    ),
}


@dataclass(frozen=True)
class FixedPoint:
    label: str
    sheaf: EquivSheaf
    chi: int
    deg: int
    sign_extra: int = 0
    support: str = ON_Y


def chi_X(F):
    """Pushforward character chi(P1, F)."""
    total = KClass.zero()
    for L in F.summands:
        total = total + chi_p1(L.a, L.b).twist(L.twist)
    return total


def chi_pair(F, G, ambient):
    """Adjunction chi-pairing of two sheaves inside an ambient space.

    Alternating sum over exterior powers of the normal bundle of P1:
    sum_p (-1)^p chi_P1(Hom(L, L' x wedge^p N)) over all summand pairs.
    """
    normal = AMBIENT_NORMAL[ambient]
    total = KClass.zero()
    for p in range(len(normal) + 1):
        for subset in itertools.combinations(normal, p):
            wa = sum(n.a for n in subset)
            wb = sum(n.b for n in subset)
            wt = [0, 0, 0, 0]
            for n in subset:
                for i in range(4):
                    wt[i] += n.twist[i]
            sign = -1 if p % 2 else 1
            for L in F.summands:
                for Lp in G.summands:
                    rel = chi_p1(Lp.a - L.a + wa, Lp.b - L.b + wb)
                    tw = tuple(
                        Lp.twist[i] - L.twist[i] + wt[i] for i in range(4)
                    )
                    total = total + rel.twist(tw).scale(sign)
    return total


def sqrt_class(F):
    """Half Ext-class -chi_X(F) + chi_Y(F, F)."""
    return -chi_X(F) + chi_pair(F, F, "Y3fold")


def taut_class(F):
    """Insertion class chi_X(F)^dual tensored with e^m."""
    return chi_X(F).dual().twist((0, 0, 0, 1))


def contribution(fp):
    """Signed Euler-class contribution of one fixed point.

    (-1)^(chi + deg + sign_extra) e(sqrt_class) e(taut_class); vanishes
    exactly when the square-root class has a positive zero-weight part.
    """
    e_sqrt = euler_class(sqrt_class(fp.sheaf))
    if e_sqrt.is_zero():
        return RatFun.zero()
    e_taut = euler_class(taut_class(fp.sheaf))
    sign = -1 if (fp.chi + fp.deg + fp.sign_extra) % 2 else 1
    out = e_sqrt * e_taut
    return out if sign == 1 else -out


# ---------------------------------------------------------------------------
# combinatorics


def compositions(d, parts):
    """All tuples of `parts` nonnegative integers summing to d, lex order."""
    if parts == 0:
        if d == 0:
            yield ()
        return
    if parts == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in compositions(d - first, parts - 1):
            yield (first, *rest)


def _support_of(summands):
    if not summands:
        return ON_Y
    if all(L.twist[2] == 0 for L in summands):
        return ON_Z
    return THICKENED


def _thicken(bundle, count):
    """count copies of bundle twisted by t3^j for j < count."""
    return [bundle.shifted(weight(w3=j)) for j in range(count)]


# ---------------------------------------------------------------------------
# classified fixed loci over the walls Lmm(k)


def js_fixed_points(k, d):
    """Fixed pairs over the wall Lmm(k) with trivial reference object.

    One point per composition (d_0, ..., d_{k-1}) of d: the summand for slot
    i is O((k-1-i) Zinf + i Z0) thickened by sum_{j<d_i} t3^j.
    """
    assert k >= 1 and d >= 0
    points = []
    for comp in compositions(d, k):
        summands = []
        for i, di in enumerate(comp):
            summands.extend(_thicken(EquivLineBundle(i, k - 1 - i), di))
        label = f"js:k={k},d={d},comp=" + ",".join(map(str, comp))
        points.append(FixedPoint(
            label=label,
            sheaf=EquivSheaf(tuple(summands)),
            chi=k * d,
            deg=d,
            sign_extra=0,
            support=_support_of(summands),
        ))
    return points


def _i0_sheaf(i0):
    """Sheaf part of the reference object I0."""
    kind, l = i0
    if kind == "OX":
        return []
    if kind == "IlP1":
        return _thicken(O_P1, l)
    if kind == "IP1":
        return [O_P1]
    raise UnsupportedConfiguration(f"unknown I0 {i0!r}")


def parse_i0(text):
    if text == "OX":
        return ("OX", 0)
    if text == "IP1":
        return ("IP1", 1)
    if text.startswith("IlP1:"):
        l = int(text.split(":", 1)[1])
        if l < 1:
            raise UnsupportedConfiguration("IlP1 requires l >= 1")
        return ("IlP1", l)
    raise UnsupportedConfiguration(f"unknown I0 name {text!r}")


def i0_label(i0):
    kind, l = i0
    return f"IlP1:{l}" if kind == "IlP1" else kind


def _check_wall_i0(k, i0):
    kind, _ = i0
    if kind == "OX":
        if k < 1:
            raise UnsupportedConfiguration("wall index must be >= 1")
    elif kind == "IlP1":
        if k != 2:
            raise UnsupportedConfiguration("IlP1 reference only classified on Lmm(2)")
    elif kind == "IP1":
        if k < 3:
            raise UnsupportedConfiguration("IP1 reference only classified for k >= 3")
    else:
        raise UnsupportedConfiguration(f"unknown I0 {i0!r}")


def fiber_plus(k, i0, d):
    """Fixed points on the plus side of the wall Lmm(k) over the given I0."""
    _check_wall_i0(k, i0)
    kind, l = i0
    if kind == "OX":
        return js_fixed_points(k, d)
    base = _i0_sheaf(i0)
    points = []
    if kind == "IlP1":
        new = (
            EquivLineBundle(0, 1, weight(w1=1)),
            EquivLineBundle(0, 1, weight(w2=1)),
            EquivLineBundle(0, 1, weight(w3=l)),
            EquivLineBundle(1, 0, weight(w3=l)),
        )
        for comp in compositions(d, 4):
            summands = list(base)
            for bundle, di in zip(new, comp):
                summands.extend(_thicken(bundle, di))
            label = (f"plus:Lmm{k},i0={i0_label(i0)},comp="
                     + ",".join(map(str, comp)))
            points.append(FixedPoint(
                label=label,
                sheaf=EquivSheaf(tuple(summands)),
                chi=l + 2 * d,
                deg=l + d,
                sign_extra=1 if comp[1] > 0 else 0,
                support=_support_of(summands),
            ))
        return points
    # kind == "IP1", k >= 3: tuples (d_1..d_{k-1}, e_1..e_{k-1}, f_0..f_{k-1})
    for comp in compositions(d, 3 * k - 2):
        ds = comp[: k - 1]
        es = comp[k - 1: 2 * (k - 1)]
        fs = comp[2 * (k - 1):]
        summands = list(base)
        for i in range(1, k):
            bundle = EquivLineBundle(k - 1 - i, i)
            summands.extend(_thicken(bundle.shifted(weight(w1=1)), ds[i - 1]))
        for i in range(1, k):
            bundle = EquivLineBundle(k - 1 - i, i)
            summands.extend(_thicken(bundle.shifted(weight(w2=1)), es[i - 1]))
        for i in range(0, k):
            bundle = EquivLineBundle(k - 1 - i, i)
            summands.extend(_thicken(bundle.shifted(weight(w3=1)), fs[i]))
        label = (f"plus:Lmm{k},i0={i0_label(i0)},comp="
                 + ",".join(map(str, comp)))
        points.append(FixedPoint(
            label=label,
            sheaf=EquivSheaf(tuple(summands)),
            chi=1 + k * d,
            deg=1 + d,
            sign_extra=sum(1 for e in es if e > 0),
            support=_support_of(summands),
        ))
    return points


def fiber_minus(k, i0, d):
    """Fixed points on the minus side of the wall Lmm(k) over the given I0."""
    _check_wall_i0(k, i0)
    kind, l = i0
    if kind in ("OX", "IlP1"):
        if d > 0:
            return []
        summands = tuple(_i0_sheaf(i0))
        label = f"minus:Lmm{k},i0={i0_label(i0)}"
        return [FixedPoint(
            label=label,
            sheaf=EquivSheaf(summands),
            chi=len(summands),
            deg=len(summands),
            sign_extra=0,
            support=_support_of(summands),
        )]
    # kind == "IP1": the extension class is recorded K-theoretically
    if d > k - 2:
        return []
    points = []
    for subset in itertools.combinations(range(1, k - 1), d):
        summands = [O_P1]
        for i in subset:
            summands.append(EquivLineBundle(k - 1 - i, i))
        label = f"minus:Lmm{k},i0={i0_label(i0)}"
        if subset:
            label += ",subset=" + ",".join(map(str, subset))
        points.append(FixedPoint(
            label=label,
            sheaf=EquivSheaf(tuple(summands)),
            chi=1 + k * d,
            deg=1 + d,
            sign_extra=0,
            support=_support_of(summands),
        ))
    return points


def i0_contribution(i0):
    """Contribution of the d=0 minus-side point for the reference object."""
    kind, _ = i0
    if kind == "OX":
        return RatFun.const(1)
    k = 2 if kind == "IlP1" else 3
    (point,) = fiber_minus(k, i0, 0)
    return contribution(point)


# ---------------------------------------------------------------------------
# the displayed degree-d product for l=1, wall Lmm(2)

_LAM = {
    1: (1, 0, 0, 0),
    2: (0, 1, 0, 0),
    3: (0, 0, 1, 0),
    4: (1, 1, 2, 0),
}


def _factor(lam3_mult, plus=None, minus=None, with_m=False):
    c = [0, 0, 0, 1 if with_m else 0]
    for i in range(3):
        c[i] += lam3_mult * _LAM[3][i]
        if plus is not None:
            c[i] += _LAM[plus][i]
        if minus is not None:
            c[i] -= _LAM[minus][i]
    if not any(c):
        return None
    return LinearForm.canonical(*c)


def example_term_l1_k2(d1, d2, d3, d4):
    """One quadruple's term of the closed degree-d product for l=1, k=2.

    Mechanical transcription of the displayed product with
    lam4 := lam1 + lam2 + 2 lam3; a vanishing numerator factor makes the
    term 0, a vanishing denominator factor raises PoleAtZeroWeight.
    """
    ds = {1: d1, 2: d2, 3: d3, 4: d4}
    d = d1 + d2 + d3 + d4
    result = RatFun.const(-1 if d % 2 else 1)
    for i in range(1, 5):
        for kk in range(ds[i]):
            for j in range(1, 5):
                f = _factor(kk - ds[j], plus=i, minus=j)
                if f is None:
                    raise PoleAtZeroWeight(
                        f"denominator factor vanishes at i={i}, j={j}, k={kk}"
                    )
                result = result * RatFun.from_form(f, -1)
            for j in (1, 2):
                f = _factor(kk - 1, plus=i, minus=j)
                if f is None:
                    return RatFun.zero()
                result = result * RatFun.from_form(f)
            for shifted in (False, True):
                # (m - k lam3 - lam_i), then the same shifted by lam1+lam2+lam3
                c = [0, 0, 0, 1]
                for t in range(3):
                    c[t] -= kk * _LAM[3][t] + _LAM[i][t]
                    if shifted:
                        c[t] += _LAM[1][t] + _LAM[2][t] + _LAM[3][t]
                if not any(c):
                    return RatFun.zero()
                result = result * RatFun.from_form(LinearForm.canonical(*c))
    return result


# ---------------------------------------------------------------------------
# fixed point labels


def parse_label(text):
    """Parse a fixed-point label back into the FixedPoint it names."""
    head, _, rest = text.partition(":")
    fields = {}
    current = None
    for part in rest.split(","):
        if "=" in part:
            current, val = part.split("=", 1)
            fields[current] = val
        elif current is not None:
            fields[current] += "," + part
    if head == "js":
        k, d = int(fields["k"]), int(fields["d"])
        want = text
        for fp in js_fixed_points(k, d):
            if fp.label == want:
                return fp
        raise UnsupportedConfiguration(f"no such fixed point {text!r}")
    if head in ("plus", "minus"):
        wall = rest.split(",", 1)[0]
        if not wall.startswith("Lmm"):
            raise UnsupportedConfiguration(f"unclassified wall in {text!r}")
        k = int(wall[3:])
        i0 = parse_i0(fields["i0"])
        if head == "plus":
            comp = tuple(int(x) for x in fields["comp"].split(","))
            d = sum(comp)
            for fp in fiber_plus(k, i0, d):
                if fp.label == text:
                    return fp
        else:
            subset = fields.get("subset")
            d = len(subset.split(",")) if subset else 0
            for fp in fiber_minus(k, i0, d):
                if fp.label == text:
                    return fp
        raise UnsupportedConfiguration(f"no such fixed point {text!r}")
    raise UnsupportedConfiguration(f"bad label {text!r}")
