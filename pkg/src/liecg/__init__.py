"""Exact Clebsch-Gordan / scalar-factor engine for SU(n) spin-flavor chains.

Constructs SU(n) irreps inside tensor products of (anti)fundamental
factors, resolves Clebsch-Gordan series by highest-weight extraction, and
computes the scalar factors of the reduction chains

    SU(8) > SU(4) x SU(2)      SU(6) > SU(3) x SU(2)
    SU(4) > SU(3) x U(1)_C     SU(3) > SU(2) x U(1)_Y

with every coefficient an exact signed square root of a rational.
"""

from .exact_arith import (
    Rational,
    SignedRadical,
    NotCommensurable,
    srad_from_signed_rational,
    srad_mul,
    srad_ratio_as_rational,
)

__version__ = "0.1.0"

__all__ = [
    "Rational",
    "SignedRadical",
    "NotCommensurable",
    "srad_from_signed_rational",
    "srad_mul",
    "srad_ratio_as_rational",
    "__version__",
]
