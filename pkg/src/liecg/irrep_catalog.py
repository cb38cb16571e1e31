"""Young-diagram bookkeeping for SU(n) irreps.

An irrep of SU(n) is identified by its canonical partition (columns of height
n stripped).  This module computes dimensions (hook-content formula),
conjugate diagrams (rectangle complement), highest weights, and the display
labels used in the tables (dimension string plus ``*``/primes), and serves
the reference reduction content of the spin-flavor irreps from a shipped
data file.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache

# Reduction-chain identifiers used across the package.
CHAIN_SU8 = "SU8>SU4xSU2"
CHAIN_SU6 = "SU6>SU3xSU2"
CHAIN_SU4 = "SU4>SU3xU1"
CHAIN_SU3 = "SU3>SU2xU1"
CHAIN_SU2 = "SU2>U1"

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class UnlabeledDiagram(KeyError):
    """No deterministic display label exists; caller must supply one."""


class UnknownIrrep(KeyError):
    """Irrep absent from the shipped reduction data (or label unknown)."""


class YoungDiagram:
    """A partition at rank n, canonicalized for SU(n) irrep identity."""

    __slots__ = ("n", "rows")

    def __init__(self, n, rows):
        if n < 2:
            raise ValueError("rank must be >= 2")
        rows = tuple(int(r) for r in rows)
        if any(r <= 0 for r in rows):
            raise ValueError("row lengths must be positive")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError("rows must be weakly decreasing")
        if len(rows) > n:
            raise ValueError(f"more than {n} rows for SU({n})")
        if len(rows) == n:
            # strip the full columns of height n: they carry no SU(n) charge
            cut = rows[-1]
            rows = tuple(r - cut for r in rows if r > cut)
        self.n = n
        self.rows = rows

    def boxes(self):
        return sum(self.rows)

    def __eq__(self, other):
        return (
            isinstance(other, YoungDiagram)
            and self.n == other.n
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.n, self.rows))

    def __repr__(self):
        return f"YoungDiagram({self.n}, {list(self.rows)})"


def _column_heights(rows):
    if not rows:
        return []
    return [sum(1 for r in rows if r > j) for j in range(rows[0])]


def dimension(d):
    """Hook-content product: prod over cells of (n + col - row) / hook."""
    rows = d.rows
    if not rows:
        return 1
    cols = _column_heights(rows)
    num = den = 1
    for i, r in enumerate(rows):
        for j in range(r):
            num *= d.n + j - i
            den *= (r - j) + (cols[j] - i) - 1
    assert num % den == 0
    return num // den


def conjugate(d):
    """Complement inside the (first row) x n rectangle, rotated by 180 degrees."""
    if not d.rows:
        return d
    r0 = d.rows[0]
    padded = list(d.rows) + [0] * (d.n - len(d.rows))
    comp = [r0 - padded[d.n - 1 - i] for i in range(d.n)]
    return YoungDiagram(d.n, [r for r in comp if r > 0])


def highest_weight(d):
    """Row lengths padded to n, shifted to zero sum; tuple of Fractions."""
    padded = list(d.rows) + [0] * (d.n - len(d.rows))
    mean = Fraction(sum(padded), d.n)
    return tuple(Fraction(r) - mean for r in padded)


# Fixed label assignments (dimension plus */prime decorations).  These pin
# down which member of a conjugate pair is starred and which equal-dimension
# diagram carries a prime; the general star rule below covers the rest.
_TABLE1 = {
    8: {
        (): "1",
        (1,): "8",
        (1, 1, 1, 1, 1, 1, 1): "8*",
        (2, 1, 1, 1, 1, 1, 1): "63",
        (3,): "120",
        (2, 1): "168",
        (2, 2, 1, 1, 1, 1): "720",
        (3, 1, 1, 1, 1, 1): "945",
        (3, 3, 2, 2, 2, 2, 2): "945*",
        (4, 2, 2, 2, 2, 2, 2): "1232",
        (5, 1, 1, 1, 1, 1, 1): "2520",
        (4, 2, 1, 1, 1, 1, 1): "4752",
    },
    6: {
        (): "1",
        (1,): "6",
        (1, 1, 1, 1, 1): "6*",
        (2, 1, 1, 1, 1): "35",
        (3,): "56",
        (2, 1): "70",
        (2, 2, 1, 1): "189",
        (3, 1, 1, 1): "280",
        (3, 3, 2, 2, 2): "280*",
        (4, 2, 2, 2, 2): "405",
        (5, 1, 1, 1, 1): "700",
        (4, 2, 1, 1, 1): "1134",
    },
    4: {
        (): "1",
        (1,): "4",
        (1, 1, 1): "4*",
        (2, 1, 1): "15",
        (2, 1): "20",
        (3,): "20′",
        (2, 2): "20″",
        (3, 2, 2): "36*",
        (3, 1): "45",
        (3, 3, 2): "45*",
        (3, 3, 1): "60*",
        (4, 2, 2): "84",
        (5, 1, 1): "120",
        (4, 2, 1): "140",
    },
    3: {
        (): "1",
        (1,): "3",
        (1, 1): "3*",
        (2,): "6",
        (2, 2): "6*",
        (2, 1): "8",
        (3,): "10",
        (3, 3): "10*",
        (3, 1): "15",
        (3, 2): "15*",
        (4,): "15′",
        (4, 1): "24*",
        (4, 2): "27",
        (5, 1): "35",
    },
}


def _derived_partner_labels():
    """Label the conjugates of catalogued diagrams when that is unambiguous."""
    derived = {}
    for n, table in _TABLE1.items():
        dims = {}
        for rows in table:
            dims.setdefault(dimension(YoungDiagram(n, rows)), []).append(rows)
        for rows, label in table.items():
            d = YoungDiagram(n, rows)
            c = conjugate(d)
            if c.rows in table or c == d:
                continue
            # refuse when the dimension also belongs to a non-conjugate entry
            if any(other != rows for other in dims[dimension(d)]):
                continue
            partner = label[:-1] if label.endswith("*") else label + "*"
            derived.setdefault(n, {})[c.rows] = partner
    return derived


_DERIVED = _derived_partner_labels()


def display_label(d):
    """Dimension string with * and prime decorations matching the catalog."""
    lab = _TABLE1.get(d.n, {}).get(d.rows) or _DERIVED.get(d.n, {}).get(d.rows)
    if lab is not None:
        return lab
    dim = dimension(d)
    table = _TABLE1.get(d.n, {})
    if any(dimension(YoungDiagram(d.n, rows)) == dim for rows in table):
        raise UnlabeledDiagram(f"dimension {dim} collides at SU({d.n}): {d!r}")
    c = conjugate(d)
    if c == d:
        return str(dim)
    if len(d.rows) == len(c.rows):
        # star undecidable: conjugate pair with equal first-column height
        raise UnlabeledDiagram(f"ambiguous star for {d!r}")
    return str(dim) + ("*" if len(d.rows) > len(c.rows) else "")


class IrrepId:
    """Canonical diagram together with its dimension and display label."""

    __slots__ = ("diagram", "dimension", "_label")

    def __init__(self, diagram):
        self.diagram = diagram
        self.dimension = dimension(diagram)
        self._label = None

    @property
    def n(self):
        return self.diagram.n

    @property
    def display_label(self):
        if self._label is None:
            self._label = display_label(self.diagram)
        return self._label

    def conjugate(self):
        return irrep(self.diagram.n, conjugate(self.diagram).rows)

    def highest_weight(self):
        return highest_weight(self.diagram)

    def weight_sort_key(self):
        # dimension first; ties (20 vs 20' vs 20'') broken by higher weight
        return (self.dimension, self.highest_weight())

    def __eq__(self, other):
        return isinstance(other, IrrepId) and self.diagram == other.diagram

    def __hash__(self):
        return hash(self.diagram)

    def __repr__(self):
        try:
            return f"IrrepId(SU({self.n}) {self.display_label})"
        except UnlabeledDiagram:
            return f"IrrepId({self.diagram!r})"


@lru_cache(maxsize=None)
def _irrep_cached(n, rows):
    return IrrepId(YoungDiagram(n, rows))


def irrep(n, rows):
    return _irrep_cached(n, YoungDiagram(n, rows).rows)


def _normalize_label(text):
    # accept ASCII apostrophes for primes
    return text.replace("''", "″").replace("'", "′")


@lru_cache(maxsize=None)
def _label_lookup(n):
    table = {}
    for rows, label in _TABLE1.get(n, {}).items():
        table[label] = rows
    for rows, label in _DERIVED.get(n, {}).items():
        table.setdefault(label, rows)
    return table


def irrep_from_label(n, label):
    """Inverse of display_label for catalogued names; SU(2) accepts any dimension."""
    name = _normalize_label(label.strip())
    rows = _label_lookup(n).get(name)
    if rows is not None:
        return irrep(n, rows)
    if name.isdigit():
        k = int(name)
        if k == 1:
            return irrep(n, ())
        if n == 2:
            return irrep(2, (k - 1,))
    raise UnknownIrrep(f"no SU({n}) irrep labeled {label!r}")


class ProductIrrepId:
    """Irrep of a product subgroup: flavor irrep times a spin or U(1) factor.

    kind "spin": tag is the SU(2) multiplicity 2J+1 (e.g. 15_3).
    kind "u1":   tag is the U(1) charge, a Fraction with denominator 1 or 3.
    """

    __slots__ = ("flavor", "kind", "tag")

    def __init__(self, flavor, kind, tag):
        if kind == "spin":
            tag = int(tag)
            if tag < 1:
                raise ValueError("spin multiplicity 2J+1 must be >= 1")
        elif kind == "u1":
            tag = Fraction(tag)
            if tag.denominator not in (1, 3):
                raise ValueError(f"U(1) charge denominator out of range: {tag}")
        else:
            raise ValueError(f"unknown product kind {kind!r}")
        self.flavor = flavor
        self.kind = kind
        self.tag = tag

    @property
    def display_label(self):
        if self.kind == "spin":
            return f"{self.flavor.display_label}_{self.tag}"
        return f"{self.flavor.display_label}({self.tag})"

    def __eq__(self, other):
        return (
            isinstance(other, ProductIrrepId)
            and self.kind == other.kind
            and self.flavor == other.flavor
            and self.tag == other.tag
        )

    def __hash__(self):
        return hash((self.flavor, self.kind, self.tag))

    def __repr__(self):
        return f"ProductIrrepId({self.display_label})"


def mu_spin(flavor, j2):
    return ProductIrrepId(flavor, "spin", j2)


def mu_u1(flavor, charge):
    return ProductIrrepId(flavor, "u1", charge)


def parse_reduction_entry(token, flavor_rank):
    """Parse e.g. "15_s3" -> (ProductIrrepId(15_3), "s"); gamma may be absent."""
    head, _, tail = token.rpartition("_")
    if not head or not tail:
        raise ValueError(f"bad reduction entry {token!r}")
    gamma = None
    if tail[0] in "sab" and len(tail) > 1:
        gamma, tail = tail[0], tail[1:]
    return mu_spin(irrep_from_label(flavor_rank, head), int(tail)), gamma


@lru_cache(maxsize=None)
def _reduction_table():
    path = os.path.join(_DATA_DIR, "table2_reductions.txt")
    table = {}
    chain = flavor_rank = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                section = line.strip("[]").strip()
                chain = {"SU8": CHAIN_SU8, "SU6": CHAIN_SU6}[section]
                flavor_rank = {"SU8": 4, "SU6": 3}[section]
                continue
            label, _, rest = line.partition(":")
            entries = [parse_reduction_entry(t, flavor_rank) for t in rest.split()]
            table[(chain, _normalize_label(label.strip()))] = entries
    return table


def expected_reduction(R, chain):
    """Reference reduction content of a spin-flavor irrep, as shipped data."""
    try:
        return list(_reduction_table()[(chain, R.display_label)])
    except KeyError:
        raise UnknownIrrep(f"no reduction data for {R!r} under {chain}") from None
