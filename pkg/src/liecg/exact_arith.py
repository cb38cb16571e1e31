"""Exact number tower: rationals and signed square roots of rationals.

The engine keeps every state vector rational (integer coordinates plus a
separate squared norm) and takes a single square root only when a
coefficient is reported.  Every reported coefficient is therefore one
value of the form  s * sqrt(p/q)  with s in {-1, 0, +1} -- a SignedRadical.
Sums of radicals are deliberately unsupported: they never occur.
"""

from fractions import Fraction
from math import isqrt

# Arbitrary-precision rational.  Fraction already enforces lowest terms and
# a positive denominator, which is exactly the invariant we need.
Rational = Fraction


class NotCommensurable(ArithmeticError):
    """Ratio of two SignedRadicals is irrational."""


def _is_perfect_square(n):
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


def rational_sqrt(x):
    """Exact square root of a nonnegative Rational, or None if irrational."""
    if x < 0:
        return None
    if _is_perfect_square(x.numerator) and _is_perfect_square(x.denominator):
        return Fraction(isqrt(x.numerator), isqrt(x.denominator))
    return None


class SignedRadical:
    """A value s*sqrt(p/q): sign in {-1,0,+1}, radicand a nonnegative rational.

    Canonical form: radicand in lowest terms (automatic with Fraction);
    sign == 0 iff radicand == 0.  Square factors are NOT extracted --
    equality/ratio questions go through srad_ratio_as_rational.
    Instances are immutable and hashable.
    """

    __slots__ = ("sign", "radicand")

    def __init__(self, sign, radicand):
        radicand = Fraction(radicand)
        if radicand < 0:
            raise ValueError("radicand must be nonnegative: %r" % (radicand,))
        if radicand == 0:
            sign = 0
        if sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1: %r" % (sign,))
        if sign == 0 and radicand != 0:
            raise ValueError("sign 0 demands radicand 0")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "radicand", radicand)

    def __setattr__(self, name, value):
        raise AttributeError("SignedRadical is immutable")

    def is_zero(self):
        return self.sign == 0

    def __bool__(self):
        return self.sign != 0

    def __neg__(self):
        return SignedRadical(-self.sign, self.radicand)

    def __eq__(self, other):
        if not isinstance(other, SignedRadical):
            return NotImplemented
        # numeric equality: same sign and same radicand is sufficient AND
        # necessary in canonical form (no square extraction means distinct
        # radicands may still be numerically equal only if one rescales by a
        # square -- Fraction lowest terms makes the representation unique
        # for a given (sign, radicand) but sqrt(9/16) != "3/4*sqrt(1)" here;
        # ratio-based comparison is what the engine uses for collinearity).
        return self.sign == other.sign and self.radicand == other.radicand

    def __hash__(self):
        return hash((self.sign, self.radicand))

    def __float__(self):
        return float(self.sign) * float(self.radicand) ** 0.5

    def render(self):
        """Textual form '+sqrt(p/q)' / '-sqrt(p/q)' / '0' (used in JSON)."""
        if self.sign == 0:
            return "0"
        s = "+" if self.sign > 0 else "-"
        return "%ssqrt(%d/%d)" % (s, self.radicand.numerator, self.radicand.denominator)

    def __repr__(self):
        return "SignedRadical(%r)" % (self.render(),)


SRAD_ZERO = SignedRadical(0, 0)
SRAD_ONE = SignedRadical(1, 1)


def srad_from_signed_rational(x):
    """sign(x) * sqrt(x^2): the SignedRadical equal to the rational x."""
    x = Fraction(x)
    if x == 0:
        return SRAD_ZERO
    sign = 1 if x > 0 else -1
    return SignedRadical(sign, x * x)


def srad_mul(a, b):
    """Product of two SignedRadicals (signs multiply, radicands multiply)."""
    if a.sign == 0 or b.sign == 0:
        return SRAD_ZERO
    return SignedRadical(a.sign * b.sign, a.radicand * b.radicand)


def srad_ratio_as_rational(a, b):
    """Exact rational a/b, or raise NotCommensurable if the ratio is irrational.

    b must be nonzero.  Used to verify collinearity of state vectors and
    the constancy of exchange phases.
    """
    if b.sign == 0:
        raise ZeroDivisionError("ratio with zero SignedRadical denominator")
    if a.sign == 0:
        return Fraction(0)
    root = rational_sqrt(a.radicand / b.radicand)
    if root is None:
        raise NotCommensurable(
            "sqrt(%s)/sqrt(%s) is irrational" % (a.radicand, b.radicand)
        )
    return a.sign * b.sign * root


def srad_from_ratio(num, den):
    """sign(num/den) * sqrt(|num/den|) for rationals num, den (den != 0).

    E.g. srad_from_ratio(2, 1) is sqrt(2); handy for the sqrt2 factors of
    the S/A column packaging.
    """
    num = Fraction(num)
    den = Fraction(den)
    if den == 0:
        raise ZeroDivisionError("srad_from_ratio with zero denominator")
    x = num / den
    if x == 0:
        return SRAD_ZERO
    return SignedRadical(1 if x > 0 else -1, abs(x))


def srad_of_overlap(dot, norm2_u, norm2_v):
    """The coefficient <u|v>/sqrt(N_u N_v) as one SignedRadical.

    dot, norm2_u, norm2_v are exact rationals (norms positive).  The value
    is sign(dot) * sqrt(dot^2 / (N_u N_v)).
    """
    dot = Fraction(dot)
    if dot == 0:
        return SRAD_ZERO
    rad = dot * dot / (Fraction(norm2_u) * Fraction(norm2_v))
    return SignedRadical(1 if dot > 0 else -1, rad)


def parse_srad(text):
    """Inverse of SignedRadical.render (accepts '0', '+sqrt(p/q)', '-sqrt(p)')."""
    text = text.strip()
    if text == "0":
        return SRAD_ZERO
    sign = 1
    if text[0] == "+":
        text = text[1:]
    elif text[0] == "-":
        sign = -1
        text = text[1:]
    if not (text.startswith("sqrt(") and text.endswith(")")):
        raise ValueError("malformed SignedRadical literal: %r" % (text,))
    body = text[5:-1]
    if "/" in body:
        p, q = body.split("/")
        rad = Fraction(int(p), int(q))
    else:
        rad = Fraction(int(body))
    return SignedRadical(sign, rad)
