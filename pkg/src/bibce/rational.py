"""Exact rational scalars.

Every probability, payoff, and LP coefficient in this package is a rational
number in lowest terms; nothing is ever rounded.  The backing type is
``gmpy2.mpq`` when available (an order of magnitude faster than the stdlib),
with ``fractions.Fraction`` as a drop-in fallback.  Both normalize on
construction and hash/compare identically, so the rest of the code never
needs to know which one it got.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _mpq = Fraction
    _HAVE_GMPY2 = False

#: the scalar type used throughout; constructors below normalize to it
Rat = _mpq

ZERO = Rat(0)
ONE = Rat(1)


def rat(value, den=None) -> Rat:
    """Coerce ``value`` to an exact rational.

    Accepts ints, existing rationals, ``Fraction``, and strings in either
    "p/q" or decimal form ("0.75" parses as 3/4 exactly).  Floats are
    rejected: a float argument is almost always a bug in exact code.
    """
    if den is not None:
        return Rat(value, den)
    if isinstance(value, float):
        raise TypeError("refusing to build an exact rational from a float: %r" % value)
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            num, d = s.split("/", 1)
            return Rat(int(num), int(d))
        # Fraction parses decimal strings exactly (e.g. "0.75" -> 3/4)
        return Rat(Fraction(s))
    return Rat(value)


def rat_str(value) -> str:
    """Render a rational as "p/q" (or plain "p" for integers); never decimal."""
    q = Rat(value)
    return str(q)


def as_fraction(value) -> Fraction:
    return Fraction(Rat(value))
