"""Exact potential accounting and operation counters.

The potential of a heap record is a weighted census of its registries and
caches:

    meld variant:     phi = 3|GR| + 4|GC| + 5|AR| + 6|AC| + 10|LR| + 11|LC|
    no-meld variant:  phi =          |AR| + 2|AC| +  3|LR| +  4|LC|

|LC| is weighted: an entry for a node whose current tag is L* with loss >= 2
weighs that loss, every other entry weighs 1.  Every cache reduction step
must lower phi by at least 1, which is what terminates the reduction loops
and what the fuzz harness asserts step by step.

Heap records maintain these quantities incrementally; :func:`compute_phi`
recomputes them from scratch and is the independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field


class OpCounters:
    """Cumulative work counters for one heap record.

    `nontree_writes` follows this convention: writes to a registry slot,
    a cache slot, the root-list head, or a node-list link count one each;
    pointer writes inside heap trees do not count.  The count is advisory
    (checked softly) because reasonable conventions differ.
    """

    __slots__ = ("comparisons", "links", "reduction_steps", "nontree_writes",
                 "degree_steps", "degree_fired", "conversions", "ops", "cases")

    def __init__(self):
        self.comparisons = 0
        self.links = 0
        self.reduction_steps = 0
        self.nontree_writes = 0
        self.degree_steps = 0
        self.degree_fired = 0
        self.conversions = 0
        self.ops = {}
        self.cases = {}

    def merge(self, other):
        """Fold another record's counters into this one (used by meld)."""
        self.comparisons += other.comparisons
        self.links += other.links
        self.reduction_steps += other.reduction_steps
        self.nontree_writes += other.nontree_writes
        self.degree_steps += other.degree_steps
        self.degree_fired += other.degree_fired
        self.conversions += other.conversions
        for k, v in other.ops.items():
            self.ops[k] = self.ops.get(k, 0) + v
        for k, v in other.cases.items():
            self.cases[k] = self.cases.get(k, 0) + v

    def snapshot(self):
        d = {
            "comparisons": self.comparisons,
            "links": self.links,
            "reduction_steps": self.reduction_steps,
            "nontree_writes": self.nontree_writes,
            "degree_steps": self.degree_steps,
            "degree_fired": self.degree_fired,
            "conversions": self.conversions,
        }
        for k in sorted(self.ops):
            d["op_" + k] = self.ops[k]
        for k in sorted(self.cases):
            d["case_" + k.replace(":", "_")] = self.cases[k]
        return d


@dataclass(frozen=True)
class PhiSnapshot:
    """Registry/cache census with the derived potential coordinates."""

    variant: str
    gr: int
    gc: int
    ar: int
    ac: int
    lr: int
    lc_weighted: int
    phi_g: int = field(init=False)
    phi_a: int = field(init=False)
    phi_l: int = field(init=False)
    phi: int = field(init=False)

    def __post_init__(self):
        if self.variant == "meld":
            g = 3 * self.gr + 4 * self.gc
            a = 5 * self.ar + 6 * self.ac
            l = 10 * self.lr + 11 * self.lc_weighted
        else:
            g = 0
            a = self.ar + 2 * self.ac
            l = 3 * self.lr + 4 * self.lc_weighted
        object.__setattr__(self, "phi_g", g)
        object.__setattr__(self, "phi_a", a)
        object.__setattr__(self, "phi_l", l)
        object.__setattr__(self, "phi", g + a + l)


def _registry_count(reg):
    return sum(1 for _ in reg.occupants())


def compute_phi(heap) -> PhiSnapshot:
    """Recompute the potential census by scanning the record (pure)."""
    from .core import TAG_LSTAR
    lc_weighted = 0
    for x in heap.lc:
        lc_weighted += x.loss if (x.tag == TAG_LSTAR and x.loss >= 2) else 1
    if heap.MELD:
        gr = _registry_count(heap.gr)
        gc = len(heap.gc)
    else:
        gr = 0
        gc = 0
    return PhiSnapshot(
        variant=heap.variant,
        gr=gr,
        gc=gc,
        ar=_registry_count(heap.ar),
        ac=len(heap.ac),
        lr=_registry_count(heap.lr),
        lc_weighted=lc_weighted,
    )


@dataclass(frozen=True)
class PotentialLedger:
    """Per-coordinate potential change since the current method started."""

    d_phi_g: int
    d_phi_a: int
    d_phi_l: int

    @property
    def d_phi(self):
        return self.d_phi_g + self.d_phi_a + self.d_phi_l


def ledger_state(heap) -> PotentialLedger:
    dg, da, dl = heap.ledger_deltas()
    return PotentialLedger(dg, da, dl)


class BoundViolation(AssertionError):
    """A hard per-method or per-block potential bound was exceeded."""


def max_rank_bound(n: int) -> int:
    """Largest admissible rank for an n-node heap."""
    return int(math.floor(6 + 1.2 * math.log2(max(n, 2))))


# ---------------------------------------------------------------------------
# Per-public-method injection bounds: the potential added by a method outside
# its reduction steps, per coordinate (G, A, L) plus the total, and the soft
# write-count bound.  Size-dependent methods map n (size at method entry) to
# the tuple.  The no-meld decrease_key A-coordinate is the sum of its parts
# (+1 removal, +2 phase 0, +1 phase 2); the three can co-occur.

def _nomeld_delete_min(n):
    r = max_rank_bound(n)
    return (0, 2 * r, 0, 2 * r, r + 4)


METHOD_BOUNDS: dict = {
    ("nomeld", "insert"): (0, 3, 0, 3, 3),
    ("nomeld", "find_min"): (0, 0, 0, 0, 0),
    ("nomeld", "decrease_key"): (0, 4, 5, 8, 5),
    ("nomeld", "delete_min"): _nomeld_delete_min,
    ("meld", "insert"): (4, 12, 0, 16, 5),
    ("meld", "find_min"): (0, 0, 0, 0, 0),
    ("meld", "decrease_key"): (8, 13, 12, 28, 8),
    ("meld", "meld"): (8, 6, 0, 14, 5),
}


def _meld_delete_min_bounds(n):
    r2 = max_rank_bound(2 * n)
    r = max_rank_bound(n)
    g = 12 * r2 + 20 + 4 * r
    a = 24 + 12 * r
    return (g, a, 0, g + a, 6 * r2 + 10 + 4 * r + 11)


METHOD_BOUNDS[("meld", "delete_min")] = _meld_delete_min_bounds


def assert_method_bounds(heap):
    """Hard-check the method's injected potential; writes checked softly."""
    key = (heap.variant, heap._method)
    bounds = METHOD_BOUNDS.get(key)
    if bounds is None:
        return
    if callable(bounds):
        bounds = bounds(max(heap._method_n, 1))
    bg, ba, bl, bphi, bp = bounds
    dg, da, dl = heap.injected_deltas()
    if dg > bg or da > ba or dl > bl or dg + da + dl > bphi:
        raise BoundViolation(
            "%s %s injected (%+d,%+d,%+d) exceeds (%d,%d,%d,phi<=%d)"
            % (heap.variant, heap._method, dg, da, dl, bg, ba, bl, bphi))


# Per-private-block potential bounds (aggregate rows), used in debug mode.
# Values are (G, A, L, phi) upper bounds on the block's total effect.  The
# conversion-cause degree reduction is invoked by the one-node loss
# reduction after its rank decrement, so these rows exclude it.
BLOCK_BOUNDS = {
    "nomeld": {
        "set_violation_type_A": (0, 2, 0, 2),
        "set_violation_type_L*": (0, 0, 5, 5),
        "set_violation_type_N": (0, 0, 0, 0),
        "rank_decrement": (0, 1, 5, 5),
        "add_solid_child": (0, 1, 0, 1),
        "child_removal": (0, 1, 5, 5),
        "link": (0, 2, 5, 6),
    },
    "meld": {
        "set_violation_type_G": (4, 0, 0, 4),
        "set_violation_type_A": (0, 6, 0, 6),
        "set_violation_type_L*": (0, 0, 12, 12),
        "set_violation_type_N": (0, 0, 0, 0),
        "rank_decrement": (4, 1, 12, 12),
        "add_solid_child": (4, 6, 0, 10),
        "child_removal": (4, 1, 12, 12),
        "link": (8, 7, 12, 22),
        "heap_size_decrement": (0, 24, 0, 24),
    },
}


def assert_block_bounds(variant, block, delta):
    bounds = BLOCK_BOUNDS.get(variant, {}).get(block)
    if bounds is None:
        return
    dg, da, dl = delta
    bg, ba, bl, bphi = bounds
    if dg > bg or da > ba or dl > bl or dg + da + dl > bphi:
        raise BoundViolation(
            "%s block %s changed phi by (%+d,%+d,%+d), bound (%d,%d,%d,%d)"
            % (variant, block, dg, da, dl, bg, ba, bl, bphi))


def warn_write_bound(context, observed, bound):
    """Soft check for the pointer-write columns (convention-dependent)."""
    if observed > bound:
        warnings.warn(
            "%s made %d non-tree writes, table bound %d"
            % (context, observed, bound), stacklevel=2)
