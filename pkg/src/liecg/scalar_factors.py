"""Scalar factors of chain couplings and full CG assembly.

A scalar factor is the subgroup-independent piece of a CG coefficient: the
overlap of a coupled-block slice with one uncoupled slice-pair family.  Both
sides are kept as unnormalized integer vectors with tracked squared norms,
so each overlap is a single signed radical, and it must come out identical
for every chain label of the slice (ZetaDependence guards that).

Identical factors are reported in the exchange-adapted column basis: a
mirror pair of slice pairs contributes through (|a,b> +- |b,a>)/sqrt(2)
combinations, so the stored value picks up sqrt(2) and the column subscript
shows either the family's own s/a coupling tag or, when the family is
unique, the packaging sign S/A that matches the row's exchange parity.
`full_cg` undoes that packaging and works in ordered pair indices.
"""

from fractions import Fraction
from threading import RLock

from . import decomposer as dec
from . import sparse_linalg as sl
from .exact_arith import (
    SRAD_ZERO,
    SignedRadical,
    srad_from_ratio,
    srad_mul,
    srad_of_overlap,
)
from .irrep_catalog import _normalize_label

SRAD_SQRT2 = srad_from_ratio(2, 1)
SRAD_INV_SQRT2 = srad_from_ratio(1, 2)
_MINUS = SignedRadical(-1, 1)

CHAIN_NAMES = {
    8: "SU(8)>SU(4)xSU(2)",
    6: "SU(6)>SU(3)xSU(2)",
    4: "SU(4)>SU(3)xU(1)",
    3: "SU(3)>SU(2)xU(1)",
    2: "SU(2)>U(1)",
}


class ZetaDependence(RuntimeError):
    """An overlap changed across the chain labels of one slice."""


class IndexMismatch(ValueError):
    """Chain indices of a requested CG coefficient are inconsistent."""


class SFEntry:
    """One scalar factor: row (R, sigma; mu, gamma), column (mu1, mu2, gamma').

    `sym` is the S/A exchange-packaging label of mirror-pair columns of
    identical factors (None on unpacked columns); a packed stored value is
    sqrt(2) times the ordered overlap."""

    __slots__ = ("R", "sigma", "mu", "gamma", "mu1", "mu2", "gamma_prime",
                 "value", "xi", "sym")

    def __init__(self, R, sigma, mu, gamma, mu1, mu2, gamma_prime, value, xi,
                 sym=None):
        self.R = R
        self.sigma = sigma
        self.mu = mu
        self.gamma = gamma
        self.mu1 = mu1
        self.mu2 = mu2
        self.gamma_prime = gamma_prime
        self.value = value
        self.xi = xi
        self.sym = sym

    @property
    def packed(self):
        return self.sym is not None

    def row_key(self):
        return (self.R, self.sigma, self.mu, self.gamma)

    def col_key(self):
        return (self.mu1, self.mu2, self.gamma_prime)

    def __repr__(self):
        r = self.R.display_label + (f"_{self.sigma}" if self.sigma else "")
        m = self.mu.display_label + (f",{self.gamma}" if self.gamma else "")
        c = f"{self.mu1.display_label},{self.mu2.display_label}"
        if self.gamma_prime:
            c += f";{self.gamma_prime}"
        if self.sym:
            c += f";{self.sym}"
        return f"SFEntry({r}; {m} | {c}) = {self.value.render()}"


class SFTable:
    """All scalar factors of one resolved product, row-major.

    Rows are keyed (R, sigma, mu, gamma) and hold their entries in context
    (column) order; zero scalar factors are omitted from storage."""

    __slots__ = ("product", "chain", "entries", "same_factors", "_rows",
                 "_row_order")

    def __init__(self, product, chain, entries, same_factors):
        self.product = product
        self.chain = chain
        self.entries = entries
        self.same_factors = same_factors
        self._rows = {}
        self._row_order = []
        for e in entries:
            key = e.row_key()
            if key not in self._rows:
                self._rows[key] = []
                self._row_order.append(key)
            self._rows[key].append(e)

    def rows(self):
        for key in self._row_order:
            yield key, self._rows[key]

    def row(self, R, sigma, mu, gamma=None):
        try:
            return self._rows[(R, sigma, mu, gamma)]
        except KeyError:
            raise IndexMismatch(
                f"no row ({R!r}, {sigma!r}, {mu!r}, {gamma!r}) in this table"
            ) from None

    def column(self, mu1, mu2, gamma_prime=None):
        key = (mu1, mu2, gamma_prime)
        return [e for e in self.entries if e.col_key() == key]

    def __repr__(self):
        p1, p2 = self.product
        return (f"SFTable({p1.display_label} x {p2.display_label}, "
                f"{self.chain}, {len(self.entries)} entries)")


def _overlap(pw, sub, fb):
    """Scalar factor of one slice against one family, checked on every zeta."""
    if sub.dim != fb.dim:
        raise ZetaDependence("slice and family disagree on dimension")
    val = None
    for t in range(sub.dim):
        d = pw.dot(sub.state(t), fb.state(t))
        v = srad_of_overlap(d, sub.norm2(t), fb.norm2(t))
        if val is None:
            val = v
        elif v != val:
            raise ZetaDependence(
                f"overlap varies across chain labels: {val!r} vs {v!r} at {t}"
            )
    return val


def _mirror_sign(product, i, j, fb, cache):
    """Sign eta with swap(family on (i,j)) == eta * (same family on (j,i))."""
    stack, pw = product.stack, product.pw
    v1, v2 = product.rep1.block, product.rep2.block
    sw = sl._int_reduce(pw.swap(fb.top_state()))
    by_sigma = len(stack.levels[1]) > 1
    cands = cache.get((j, i))
    if cands is None:
        if by_sigma:
            cands = list(dec._family_tops(stack, pw, j, i, v1.subs[j],
                                          v2.subs[i]))
        else:
            blocks, _ = dec._couple(stack, 1, v1.subs[j], v2.subs[i], pw,
                                    product.ctx.sub())
            cands = [(b.top_state(), b.sigma) for b in blocks]
        cache[(j, i)] = cands
    for mt, gl in cands:
        if (by_sigma and gl != fb.sigma) or pw.key_of(mt) != pw.key_of(sw):
            continue
        mt = sl._int_reduce(mt)
        if mt == sw:
            return 1
        if mt == dec._negate(sw):
            return -1
    raise ZetaDependence("swapped family top matches no mirror family")


def _slice_gammas(stack, blk):
    """Degeneracy label per slice: the fill's own tag, else s/a/b in order."""
    pids = [dec._product_id(stack, s) for s in blk.subs]
    counts = {}
    for pid in pids:
        counts[pid] = counts.get(pid, 0) + 1
    seen = {}
    out = []
    for sub, pid in zip(blk.subs, pids):
        gamma = sub.gamma
        if gamma is None and counts[pid] > 1:
            pos = seen.get(pid, 0)
            seen[pid] = pos + 1
            gamma = "sab"[pos]
        out.append(gamma)
    return out


def _slice_rows(product, blk, gammas, mu1s, mu2s, mirrors):
    """SFEntry rows for every slice of one coupled block."""
    stack, pw = product.stack, product.pw
    same = product.rep1 is product.rep2
    rep_id = product.rep_of(blk)
    rows = []
    for sub, gamma in zip(blk.subs, gammas):
        xi = blk.parity if same else dec.exchange_phase((product, blk, sub))
        mu = dec._product_id(stack, sub)
        entries = []
        total = Fraction(0)
        for (i, j) in product.fams:
            for fb in product.fams[(i, j)]:
                if fb.top_key != sub.top_key:
                    continue
                val = _overlap(pw, sub, fb)
                if not val:
                    continue
                sym = None
                if same and i != j:
                    eta = _mirror_sign(product, i, j, fb, mirrors)
                    sym = "S" if blk.parity * eta > 0 else "A"
                    val = srad_mul(val, SRAD_SQRT2)
                entries.append(SFEntry(rep_id, blk.sigma, mu, gamma,
                                       mu1s[i], mu2s[j], fb.sigma, val, xi,
                                       sym))
                total += val.radicand
        if total != 1:
            raise ZetaDependence(
                f"row ({rep_id.display_label}, {mu.display_label}) "
                f"normalizes to {total}, not 1"
            )
        rows.extend(entries)
    return rows


def extract_sf(space, threads=1):
    """SFTable of a resolved product.

    `space` is a CoupledProduct (or a (FactorRep, FactorRep) pair, coupled
    here).  Every scalar factor is read off as the overlap of a coupled
    slice with an uncoupled family, demanded constant across the slice's
    chain labels; rows are emitted in block order and entries per row in
    context order.  With threads > 1 the per-block work is farmed out but
    assembled in the same deterministic order."""
    if isinstance(space, dec.CoupledProduct):
        product = space
    else:
        rep1, rep2 = space
        product = dec.CoupledProduct(rep1, rep2)
    stack = product.stack
    mu1s = [dec._product_id(stack, s) for s in product.rep1.block.subs]
    mu2s = [dec._product_id(stack, s) for s in product.rep2.block.subs]
    jobs = [(blk, _slice_gammas(stack, blk)) for blk in product.blocks]
    mirrors = {}
    if product.rep1 is product.rep2:
        # precompute mirror-family candidates so threads only read the cache
        for (i, j) in product.fams:
            if i != j and product.fams[(i, j)]:
                _mirror_sign(product, i, j, product.fams[(i, j)][0], mirrors)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda job: _slice_rows(product, job[0], job[1], mu1s, mu2s,
                                        mirrors),
                jobs,
            ))
    else:
        parts = [_slice_rows(product, blk, gs, mu1s, mu2s, mirrors)
                 for blk, gs in jobs]
    entries = [e for part in parts for e in part]
    chain = CHAIN_NAMES[stack.n]
    same = product.rep1 is product.rep2
    return SFTable((product.rep1.irrep, product.rep2.irrep), chain, entries,
                   same)


_TABLE_CACHE = {}
_TABLE_LOCK = RLock()


def sf_table(n, lab1, lab2, threads=1):
    """Memoized SFTable of the canonical SU(n) product lab1 x lab2."""
    key = (n, _normalize_label(str(lab1)), _normalize_label(str(lab2)))
    table = _TABLE_CACHE.get(key)
    if table is not None:
        return table
    with _TABLE_LOCK:
        table = _TABLE_CACHE.get(key)
        if table is None:
            table = extract_sf(dec.standard_product(n, lab1, lab2),
                               threads=threads)
            _TABLE_CACHE[key] = table
    return table


def invert_sf(table, mu, gamma_prime, mu1, mu2):
    """Transpose read-out: the coupled components of one uncoupled column.

    Returns [(R, sigma, gamma, value)] over the rows meeting the column
    (mu1, mu2, gamma_prime) at slice mu; values are the stored table values
    (the scalar-factor matrix is real orthogonal)."""
    out = []
    for e in table.entries:
        if e.mu == mu and e.col_key() == (mu1, mu2, gamma_prime):
            out.append((e.R, e.sigma, e.gamma, e.value))
    if not out:
        raise IndexMismatch(
            f"no column ({mu1!r}, {mu2!r}, {gamma_prime!r}) at slice {mu!r}"
        )
    return out


# ---------------------------------------------------------------------------
# unitarity verification


def _exact_sqrt(q):
    from .exact_arith import NotCommensurable, rational_sqrt

    try:
        return rational_sqrt(q)
    except NotCommensurable:
        return None


def _class_sums(terms):
    """Group signed radicals by square class and sum the rational weights.

    Returns [(representative radicand, rational coefficient)] with only the
    nonzero classes kept, so the whole sum vanishes iff the list is empty;
    radicals of distinct square classes are linearly independent over Q."""
    classes = []
    for v in terms:
        if not v:
            continue
        for idx, (rep, coeff) in enumerate(classes):
            root = _exact_sqrt(v.radicand / rep)
            if root is not None:
                classes[idx] = (rep, coeff + v.sign * root)
                break
        else:
            classes.append((v.radicand, Fraction(v.sign)))
    return [(rep, coeff) for rep, coeff in classes if coeff]


def verify_unitarity(table):
    """Exact row/column orthonormality report for one SFTable.

    Within each verification context -- a slice mu, restricted to one
    exchange-parity sector when the factors are identical -- the matrix of
    values over rows (R, sigma, gamma) and columns (mu1, mu2, gamma') must
    be square and orthogonal.  Report-only: returns a dict with `ok`,
    counts, and the first violation found (if any)."""
    contexts = {}
    for e in table.entries:
        ckey = (repr(e.mu), e.xi if table.same_factors else 0)
        contexts.setdefault(ckey, {}).setdefault(e.row_key(), {})[
            e.col_key()] = e.value
    report = {"ok": True, "contexts": 0, "rows": 0, "violation": None}

    def fail(msg):
        report["ok"] = False
        if report["violation"] is None:
            report["violation"] = msg

    for ckey in sorted(contexts):
        rows = contexts[ckey]
        report["contexts"] += 1
        keys = sorted(rows, key=repr)
        cols = sorted({c for r in rows.values() for c in r}, key=repr)
        if len(keys) != len(cols):
            fail(f"context {ckey!r}: {len(keys)} rows vs {len(cols)} columns")
        for rk in keys:
            report["rows"] += 1
            norm = sum(v.radicand for v in rows[rk].values())
            if norm != 1:
                fail(f"row {rk!r} normalizes to {norm}")
        for a in range(len(keys)):
            ra = rows[keys[a]]
            for b in range(a + 1, len(keys)):
                rb = rows[keys[b]]
                terms = [srad_mul(ra[c], rb[c]) for c in ra if c in rb]
                if _class_sums(terms):
                    fail(f"rows {keys[a]!r} and {keys[b]!r} not orthogonal")
        for c in cols:
            norm = sum(r[c].radicand for r in rows.values() if c in r)
            if norm != 1:
                fail(f"column {c!r} in context {ckey!r} normalizes to {norm}")
    return report


# ---------------------------------------------------------------------------
# full CG assembly down the chain


def su2_cg(d1, d2, d, m1, m2):
    """<j1 m1; j2 m2 | J M> with 2j+1 multiplicities and twice-z integers.

    Read off the canonically coupled SU(2) product, whose first-pair
    anchoring reproduces the Condon-Shortley convention."""
    for dd, m in ((d1, m1), (d2, m2), (d, m1 + m2)):
        if (dd - 1 - m) % 2 or not -dd < m < dd:
            raise IndexMismatch(f"z-label {m}/2 outside the {dd}-plet")
    if not abs(d1 - d2) < d < d1 + d2 or (d1 + d2 - d) % 2 == 0:
        raise IndexMismatch(f"{d} not in the {d1} x {d2} series")
    prod = dec.standard_product(2, str(d1), str(d2))
    blk = next(b for b in prod.blocks if b.dim == d)
    pw = prod.pw
    t = (d - 1 - (m1 + m2)) // 2
    a = (d1 - 1 - m1) // 2
    b = (d2 - 1 - m2) // 2
    c = blk.state(t).get(pw.pair(a, b), 0)
    w = pw.rep1.n2s[a] * pw.rep2.n2s[b]
    return srad_of_overlap(c * w, w, blk.norm2(t))


def _find_row(table, rlab, sigma, mu_label, tag, gamma):
    for key in table._row_order:
        R, sig, mu, gam = key
        if (R.display_label == rlab and sig == sigma and gam == gamma
                and mu.flavor.display_label == mu_label and mu.tag == tag):
            return table._rows[key]
    raise IndexMismatch(
        f"no row {rlab}/{sigma} at ({mu_label}, {tag}, {gamma})"
    )


def _entry_matches(e, mu1_want, mu2_want, gp, swapped):
    a, b = (e.mu2, e.mu1) if swapped else (e.mu1, e.mu2)
    if ((a.flavor.display_label, a.tag) != mu1_want
            or (b.flavor.display_label, b.tag) != mu2_want):
        return False
    if e.packed and e.gamma_prime in ("S", "A"):
        # packaging label, not a coupling degeneracy index
        return gp is None
    return e.gamma_prime == gp


def _col_value(table, product, row_entries, mu1_want, mu2_want, gp):
    """Ordered (factor-1, factor-2) scalar factor from a stored row.

    Mirror-packaged values carry sqrt(2): the ordered coefficient is
    value/sqrt(2), and naming the dropped mirror order picks up the row
    parity times the family's mirror sign eta (already folded into the
    packaging label when the family has no coupling tag of its own)."""
    for e in row_entries:
        if _entry_matches(e, mu1_want, mu2_want, gp, swapped=False):
            if e.packed:
                return srad_mul(e.value, SRAD_INV_SQRT2), e
            return e.value, e
    if table.same_factors:
        for e in row_entries:
            if not e.packed:
                continue
            if not _entry_matches(e, mu1_want, mu2_want, gp, swapped=True):
                continue
            raw = srad_mul(e.value, SRAD_INV_SQRT2)
            if e.gamma_prime in ("S", "A"):
                sign = 1 if e.gamma_prime == "S" else -1
            else:
                sign = e.xi * _mirror_eta_for(product, e)
            return (raw if sign > 0 else srad_mul(raw, _MINUS)), e
    return SRAD_ZERO, None


def _mirror_eta_for(product, entry):
    stack = product.stack
    mu1s = [dec._product_id(stack, s) for s in product.rep1.block.subs]
    mu2s = [dec._product_id(stack, s) for s in product.rep2.block.subs]
    for (i, j) in product.fams:
        if mu1s[i] != entry.mu1 or mu2s[j] != entry.mu2:
            continue
        for fb in product.fams[(i, j)]:
            if fb.sigma == entry.gamma_prime:
                return _mirror_sign(product, i, j, fb)
    raise IndexMismatch("mirror family not found for entry")


def full_cg(n, labels, path):
    """Full CG coefficient as the product of chain scalar factors.

    `labels` = (label1, label2) of the SU(n) factor irreps; `path` names one
    coefficient by its chain indices, in ordered (factor-1, factor-2) pair
    convention:

      spin-flavor level (n = 8 or 6):
        R, sigma          coupled irrep label and series tag
        mu, tag, gamma    slice: flavor label, 2J+1, degeneracy tag
        col               ((mu1, 2J1+1), (mu2, 2J2+1), gamma')
        spin              (2*Jz1, 2*Jz2)
        flavor            nested dict for the flavor-factor product
      flavor levels (n = 4, then 3):
        mu, tag, gamma    slice: subgroup label and U(1) charge
        col               ((mu1, tag1), (mu2, tag2), gamma')
        flavor            nested dict, down to the SU(2) level
      isospin bottom (below SU(3)):
        iso               (2*Iz1, 2*Iz2)

    A nested level inherits its row (R, sigma) from the parent's column
    (mu of the parent slice, gamma' of the parent column), so inner dicts
    carry only mu/tag/gamma/col and the next level.  The two SU(2) factors
    (isospin z and spin z) commute with everything and are applied last, in
    isospin-then-spin order.  Returns one SignedRadical; IndexMismatch on
    inconsistent indices.  Coefficients of identical factors refer to the
    ordered product basis (mirror packaging is undone)."""
    lab1, lab2 = labels
    return _chain_cg(n, lab1, lab2, path.get("R"), path.get("sigma"), path)


def _chain_cg(n, lab1, lab2, rlab, sigma, path):
    table = sf_table(n, lab1, lab2)
    product = dec.standard_product(n, lab1, lab2)
    mu_label, tag = path["mu"], path["tag"]
    gamma = path.get("gamma")
    (m1l, t1), (m2l, t2), gp = path["col"]
    spinful = n in (8, 6)
    if not spinful and Fraction(t1) + Fraction(t2) != Fraction(tag):
        raise IndexMismatch(f"charges {t1} + {t2} != {tag}")
    row = _find_row(table, rlab, sigma, mu_label, tag, gamma)
    val, _ = _col_value(table, product, row, (m1l, t1), (m2l, t2), gp)
    if not val:
        return SRAD_ZERO
    if spinful:
        jz1, jz2 = path["spin"]
        spin = su2_cg(t1, t2, tag, jz1, jz2)
        if not spin:
            return SRAD_ZERO
        flavor = _chain_cg(4 if n == 8 else 3, m1l, m2l, mu_label, gp,
                           path["flavor"])
        return srad_mul(val, srad_mul(spin, flavor))
    if n == 4:
        flavor = _chain_cg(3, m1l, m2l, mu_label, gp, path["flavor"])
        return srad_mul(val, flavor)
    # SU(3) bottom: the slice is an isospin multiplet; finish with its CG.
    iz1, iz2 = path["iso"]
    iso = su2_cg(int(m1l), int(m2l), int(mu_label), iz1, iz2)
    return srad_mul(val, iso)
