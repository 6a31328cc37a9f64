"""Laurent-polynomial constant-term engine and the kernel registry.

CT[K^n] for a kernel K counts n-step returns combinatorially: each
monomial of K is a step, its exponent vector the displacement, and the
constant term collects the walks whose displacements cancel.  This is
the second, independent source for every coefficient table.

Kernels for arbitrary dimension:

    sc       sum_i (x_i + 1/x_i)
    bcc      prod_i (x_i + 1/x_i)
    fcc      sum_{i<j} (x_i + 1/x_i)(x_j + 1/x_j)
    diamond  (1 + sum_i x_i)(1 + sum_i 1/x_i)

The diamond form generalizes the honeycomb kernel (1+x+y)(1+1/x+1/y);
its constant terms are the squared-multinomial sums S_n^(d+1) (pair the
forward composition with the backward one).  The ad-hoc printed 3d/4d
diamond kernels are kept in a separate registry and proven equivalent
through kernel_equivalence rather than trusted.

steps_per_power: two-site kernels (honeycomb, diamond) advance two
lattice steps per kernel power, so CT[K^n] is the 2n-step count.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .errors import ResourceLimit, UnsupportedLattice, UnsupportedTerm
from .lattices import FAMILIES, LatticeSpec
from .reports import VerifyReport

DEFAULT_BUDGET = 50_000_000  # monomials held at once


class LaurentPoly:
    """Integer Laurent polynomial, exponent vector -> coefficient."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms: dict[tuple[int, ...], int], nvars: int | None = None):
        clean = {k: v for k, v in terms.items() if v}
        if nvars is None:
            if not clean:
                raise UnsupportedTerm("cannot infer variable count of the zero polynomial")
            nvars = len(next(iter(clean)))
        for k in clean:
            if len(k) != nvars:
                raise UnsupportedTerm("inconsistent exponent vector lengths")
        self.terms = clean
        self.nvars = nvars

    @classmethod
    def constant(cls, c: int, nvars: int) -> "LaurentPoly":
        return cls({(0,) * nvars: c} if c else {}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int, power: int = 1) -> "LaurentPoly":
        e = [0] * nvars
        e[i] = power
        return cls({tuple(e): 1}, nvars)

    @property
    def constant_term(self) -> int:
        return self.terms.get((0,) * self.nvars, 0)

    def eval_ones(self) -> int:
        return sum(self.terms.values())

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.constant(other, self.nvars)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly(out, self.nvars)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly({k: v * other for k, v in self.terms.items()}, self.nvars)
        out: dict[tuple[int, ...], int] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return LaurentPoly(out, self.nvars)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"LaurentPoly({self.terms!r})"


def _transforms(nvars: int, signs: bool):
    perms = list(permutations(range(nvars)))
    sign_sets = list(product((1, -1), repeat=nvars)) if signs else [(1,) * nvars]
    return [(p, s) for p in perms for s in sign_sets]


def _is_invariant(poly: LaurentPoly, signs: bool) -> bool:
    for p, s in _transforms(poly.nvars, signs):
        moved = {}
        for k, v in poly.terms.items():
            nk = tuple(k[p[i]] * s[i] for i in range(poly.nvars))
            moved[nk] = v
        if moved != poly.terms:
            return False
    return True


@dataclass(frozen=True)
class KernelSpec:
    """A CT kernel plus its bookkeeping.

    symmetry is the group under which the expanded kernel is invariant,
    used to collapse the walk distribution to canonical classes:
    "hyperoctahedral" (coordinate permutations and sign flips),
    "permutation", or "none".  The claim is checked at construction.
    """

    kernel: LaurentPoly
    steps_per_power: int
    family: str | None = None
    dim: int | None = None
    symmetry: str = "none"
    label: str = ""

    def __post_init__(self):
        if self.steps_per_power not in (1, 2):
            raise UnsupportedTerm("steps_per_power must be 1 or 2")
        if self.symmetry not in ("none", "permutation", "hyperoctahedral"):
            raise UnsupportedTerm(f"unknown symmetry {self.symmetry!r}")
        if self.symmetry != "none" and not _is_invariant(self.kernel, self.symmetry == "hyperoctahedral"):
            raise UnsupportedTerm(f"kernel is not {self.symmetry}-invariant")
        if self.family is not None:
            spec = LatticeSpec(self.family, self.dim)
            q = spec.coordination
            want = q * q if self.steps_per_power == 2 else q
            if self.kernel.eval_ones() != want:
                raise UnsupportedTerm(
                    f"kernel mass {self.kernel.eval_ones()} != expected {want} for {self.family} d={self.dim}"
                )

    @property
    def even_only(self) -> bool:
        """Whether CT[K^n] vanishes for odd n (single-site even lattices)."""
        if self.family is None:
            return False
        return self.steps_per_power == 1 and LatticeSpec(self.family, self.dim).even_only


def _pm(i: int, d: int) -> LaurentPoly:
    return LaurentPoly.var(i, d) + LaurentPoly.var(i, d, -1)


def kernel(family: str, d: int) -> KernelSpec:
    """The registry kernel for a lattice family at dimension d."""
    if family not in FAMILIES:
        raise UnsupportedLattice(f"unknown family {family!r}")
    spec = LatticeSpec(family, d)  # validates the dimension
    if family == "square":
        k = _pm(0, 2) + _pm(1, 2)
        return KernelSpec(k, 1, family, d, "hyperoctahedral", "square")
    if family == "triangular":
        terms = {}
        for e in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)):
            terms[e] = 1
        return KernelSpec(LaurentPoly(terms), 1, family, d, "permutation", "triangular")
    if family in ("honeycomb", "diamond"):
        fwd = LaurentPoly.constant(1, d) + sum(LaurentPoly.var(i, d) for i in range(d))
        bwd = LaurentPoly.constant(1, d) + sum(LaurentPoly.var(i, d, -1) for i in range(d))
        return KernelSpec(fwd * bwd, 2, family, d, "permutation", f"{family}{d}")
    if family == "sc":
        k = sum(_pm(i, d) for i in range(d))
        return KernelSpec(k, 1, family, d, "hyperoctahedral", f"sc{d}")
    if family == "bcc":
        k = _pm(0, d)
        for i in range(1, d):
            k = k * _pm(i, d)
        return KernelSpec(k, 1, family, d, "hyperoctahedral", f"bcc{d}")
    if family == "fcc":
        k = LaurentPoly.constant(0, d)
        for i in range(d):
            for j in range(i + 1, d):
                k = k + _pm(i, d) * _pm(j, d)
        return KernelSpec(k, 1, family, d, "hyperoctahedral", f"fcc{d}")
    if family == "sincos4":
        terms = {e: 1 for e in product((1, -1), repeat=4) if e[0] * e[1] * e[2] * e[3] > 0}
        return KernelSpec(LaurentPoly(terms), 1, family, d, "permutation", "sincos4")
    if family == "triples4":
        terms = {}
        for skip in range(4):
            for s in product((1, -1), repeat=3):
                e = list(s)
                e.insert(skip, 0)
                terms[tuple(e)] = 1
        return KernelSpec(LaurentPoly(terms), 1, family, d, "hyperoctahedral", "triples4")
    raise UnsupportedLattice(family)  # pragma: no cover


def printed_kernels() -> dict[str, KernelSpec]:
    """The kernels exactly as listed in the original tables, including
    the product and sum square forms and the ad-hoc 3d/4d diamond ones."""
    x2, y2 = (LaurentPoly.var(i, 2) for i in range(2))
    ix2, iy2 = (LaurentPoly.var(i, 2, -1) for i in range(2))
    x3, y3, z3 = (LaurentPoly.var(i, 3) for i in range(3))
    ix3, iy3, iz3 = (LaurentPoly.var(i, 3, -1) for i in range(3))
    V4 = [LaurentPoly.var(i, 4) for i in range(4)]
    IV4 = [LaurentPoly.var(i, 4, -1) for i in range(4)]
    x4, y4, z4, w4 = V4
    ix4, iy4, iz4, iw4 = IV4

    out = {}
    out["square-product"] = KernelSpec(
        (x2 + ix2) * (y2 + iy2), 1, "square", 2, "hyperoctahedral", "square-product"
    )
    out["square-sum"] = KernelSpec(x2 + ix2 + y2 + iy2, 1, "square", 2, "hyperoctahedral", "square-sum")
    out["triangular"] = kernel("triangular", 2)
    out["honeycomb"] = KernelSpec(
        (1 + x2 + y2) * (1 + ix2 + iy2), 2, "honeycomb", 2, "permutation", "honeycomb"
    )
    out["diamond3"] = KernelSpec(
        (ix3 + x3 + z3 * (y3 + iy3)) * (x3 + ix3 + iz3 * (y3 + iy3)),
        2,
        "diamond",
        3,
        "none",
        "diamond3-printed",
    )
    out["sc3"] = kernel("sc", 3)
    out["bcc3"] = KernelSpec((x3 + ix3) * (y3 + iy3) * (z3 + iz3), 1, "bcc", 3, "hyperoctahedral", "bcc3")
    out["fcc3"] = kernel("fcc", 3)
    out["diamond4"] = KernelSpec(
        (ix4 + x4 + z4 * y4 + z4 * iy4 + w4 * ix4) * (x4 + ix4 + y4 * iz4 + iy4 * iz4 + x4 * iw4),
        2,
        "diamond",
        4,
        "none",
        "diamond4-printed",
    )
    out["sc4"] = kernel("sc", 4)
    out["bcc4"] = KernelSpec(
        (x4 + ix4) * (y4 + iy4) * (z4 + iz4) * (w4 + iw4), 1, "bcc", 4, "hyperoctahedral", "bcc4"
    )
    out["fcc4"] = KernelSpec(
        (x4 + ix4) * (y4 + iy4)
        + (x4 + ix4) * (z4 + iz4)
        + (z4 + iz4) * (y4 + iy4)
        + (w4 + iw4) * (x4 + ix4 + y4 + iy4 + z4 + iz4),
        1,
        "fcc",
        4,
        "hyperoctahedral",
        "fcc4",
    )
    return out


# ---------------------------------------------------------------------------
# CT extraction


def _reach(poly: LaurentPoly) -> tuple[int, ...]:
    r = [0] * poly.nvars
    for e in poly.terms:
        for i, x in enumerate(e):
            a = abs(x)
            if a > r[i]:
                r[i] = a
    return tuple(r)


def ct_power(kspec: KernelSpec, n: int, budget: int = DEFAULT_BUDGET, prune: bool = True) -> int:
    """Exact CT[K^n] by iterated multiplication.

    A monomial is dropped as soon as some exponent exceeds what the
    remaining multiplications can cancel (|e_i| > remaining * reach_i);
    such a monomial cannot reach the constant term, so the result is
    unchanged.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    K = kspec.kernel
    reach = _reach(K)
    cur = {(0,) * K.nvars: 1}
    for step in range(n):
        remaining = n - step - 1
        nxt: dict[tuple[int, ...], int] = {}
        for e, c in cur.items():
            for ek, ck in K.terms.items():
                ne = tuple(a + b for a, b in zip(e, ek))
                if prune and any(abs(x) > remaining * r for x, r in zip(ne, reach)):
                    continue
                nxt[ne] = nxt.get(ne, 0) + c * ck
        if len(nxt) > budget:
            raise ResourceLimit(f"{len(nxt)} monomials at power {step + 1} exceeds budget {budget}")
        cur = {k: v for k, v in nxt.items() if v}
    return cur.get((0,) * K.nvars, 0)


def _canon(symmetry: str):
    if symmetry == "hyperoctahedral":
        return lambda e: tuple(sorted(abs(x) for x in e))
    if symmetry == "permutation":
        return lambda e: tuple(sorted(e))
    return lambda e: e


def ct_sequence(kspec: KernelSpec, n_max: int, budget: int = DEFAULT_BUDGET) -> list[int]:
    """CT[K^n] for n = 0..n_max.

    The walk distribution is folded onto canonical exponent classes
    under the kernel's symmetry group; class mass pushed from a single
    representative is exact because every member of a class scatters
    into the same classes with the same weights.
    """
    K = kspec.kernel
    nvars = K.nvars
    reach = _reach(K)
    canon = _canon(kspec.symmetry)
    steps = list(K.terms.items())
    origin = (0,) * nvars
    cur = {origin: 1}
    out = [1]
    for step in range(n_max):
        remaining = n_max - step - 1
        nxt: dict[tuple[int, ...], int] = {}
        for cls, mass in cur.items():
            for ek, ck in steps:
                ne = tuple(a + b for a, b in zip(cls, ek))
                if any(abs(x) > remaining * r for x, r in zip(ne, reach)):
                    continue
                key = canon(ne)
                nxt[key] = nxt.get(key, 0) + mass * ck
        if len(nxt) > budget:
            raise ResourceLimit(f"{len(nxt)} classes at power {step + 1} exceeds budget {budget}")
        cur = nxt
        out.append(cur.get(origin, 0))
    return out


def ct_series(kspec: KernelSpec, n_max: int, budget: int = DEFAULT_BUDGET) -> list[int]:
    """Coefficient table by constant terms, indexed the same way as the
    closed-form tables: even-only families report CT[K^{2n}] at index n,
    everything else CT[K^n].  Unbound kernels report the raw sequence."""
    if kspec.even_only:
        raw = ct_sequence(kspec, 2 * n_max, budget)
        return [raw[2 * n] for n in range(n_max + 1)]
    return ct_sequence(kspec, n_max, budget)


def kernel_equivalence(k1: KernelSpec, k2: KernelSpec, n_max: int, budget: int = DEFAULT_BUDGET) -> VerifyReport:
    """Do the two kernels generate identical CT sequences through n_max?"""
    a = ct_sequence(k1, n_max, budget)
    b = ct_sequence(k2, n_max, budget)
    for n in range(n_max + 1):
        if a[n] != b[n]:
            return VerifyReport(False, n_max, n, f"{k1.label or 'k1'} vs {k2.label or 'k2'}")
    return VerifyReport(True, n_max, note=f"{k1.label or 'k1'} == {k2.label or 'k2'}")


# ---------------------------------------------------------------------------
# text exchange format: one monomial per line, "coefficient e1 e2 ... ed"


def format_kernel(poly: LaurentPoly) -> str:
    lines = []
    for e in sorted(poly.terms):
        lines.append(" ".join([str(poly.terms[e])] + [str(x) for x in e]))
    return "\n".join(lines) + "\n"


def parse_kernel(text: str) -> LaurentPoly:
    terms: dict[tuple[int, ...], int] = {}
    nvars = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError as exc:
            raise UnsupportedTerm(f"line {lineno}: non-integer field") from exc
        if len(nums) < 2:
            raise UnsupportedTerm(f"line {lineno}: need a coefficient and at least one exponent")
        coef, exps = nums[0], tuple(nums[1:])
        if nvars is None:
            nvars = len(exps)
        elif len(exps) != nvars:
            raise UnsupportedTerm(f"line {lineno}: expected {nvars} exponents, got {len(exps)}")
        terms[exps] = terms.get(exps, 0) + coef
    if nvars is None:
        raise UnsupportedTerm("empty kernel text")
    return LaurentPoly(terms, nvars)
