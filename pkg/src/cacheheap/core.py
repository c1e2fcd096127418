"""Intrusive heap trees with violation caches and rank registries.

Two cooperating ideas keep decrease-key heaps cheap here:

  * a node that breaks a shape rule (a rank root, or a rank child that has
    lost rank children) is tagged and thrown on a LIFO *cache* instead of
    being wired into a violation list, and
  * a per-tag, rank-indexed *registry* pairs up two violations of equal
    rank so a single link repairs both.

Draining the caches after every public method gives the amortized flavor;
the worst-case flavor only reduces while a potential coordinate has grown
since the method started.  This module implements the machinery shared by
both heap variants plus the complete variant without meld support
(:class:`NoMeldHeap`).  The meldable variant lives in :mod:`cacheheap.meld`.

Concurrency contract: a heap record is single-writer.  Distinct records are
independent.  Node handles are plain objects; only ever drive them through
the owning record's methods.
"""

from __future__ import annotations

import itertools
import os

from .accounting import OpCounters

# Violation tags.
TAG_N = 0       # no violation
TAG_A = 1       # rank root without guaranteed degree reserve
TAG_G = 2       # rank root with guaranteed degree reserve (meld variant only)
TAG_LSTAR = 3   # rank child with loss >= 1

TAG_NAMES = {TAG_N: "N", TAG_A: "A", TAG_G: "G", TAG_LSTAR: "L*"}

# Child classification stored in Node.kind.  Being a tree root or sitting in
# a retired record overrides the stored kind.
KIND_RANK = 0
KIND_NONRANK = 1
KIND_DEFERRED = 2

# Causes for a rank decrement.
CAUSE_REMOVAL = 0      # a rank child was removed
CAUSE_CONVERSION = 1   # a rank child was demoted to nonrank

# Reduction policies for the public methods.
AMORTIZED = "amortized"
WORSTCASE = "worstcase"   # ledger-driven reductions
SIMPLE = "simple"         # keep AC (and GC) empty, two LC steps per decrease_key
POLICIES = (AMORTIZED, WORSTCASE, SIMPLE)

# Modes for reduce_until.
DRAIN_ALL = "drain_all"
LEDGER_DRIVEN = "ledger"

_next_uid = itertools.count().__next__


class HeapError(Exception):
    """Base class for heap usage errors."""


class EmptyHeapError(HeapError):
    """delete_min on an empty heap."""


class KeyIncreaseError(HeapError):
    """decrease_key with a key above the node's current key."""


class StaleNodeError(HeapError):
    """Operation on a node already removed by delete_min."""


class RetiredHeapError(HeapError):
    """Operation on a record that was melded away."""


class SelfMeldError(HeapError):
    """meld of a record with itself."""


class Node:
    """One heap element.  Create via ``heap.insert``, never directly."""

    __slots__ = (
        "key", "uid", "rank", "loss", "tag", "kind",
        "parent", "child", "left", "right",
        "owner", "nl_prev", "nl_next",
        "in_ac", "in_gc", "in_lc", "alive",
    )

    def __init__(self, key, owner):
        self.key = key
        self.uid = _next_uid()
        self.rank = 0
        self.loss = 0
        self.tag = TAG_N
        self.kind = KIND_NONRANK
        self.parent = None
        self.child = None       # leftmost child
        self.left = self        # cyclic: left of leftmost is rightmost
        self.right = None
        self.owner = owner
        self.nl_prev = None
        self.nl_next = None
        self.in_ac = False
        self.in_gc = False
        self.in_lc = False
        self.alive = True

    def __repr__(self):
        return "<Node key=%r uid=%d rank=%d loss=%d tag=%s>" % (
            self.key, self.uid, self.rank, self.loss, TAG_NAMES[self.tag])

    def children(self):
        """Yield children left to right (checker/test helper)."""
        c = self.child
        while c is not None:
            yield c
            c = c.right


class RankRegistry:
    """Rank-indexed slots, one optional node per rank.

    Grows by doubling with the copy work spread out: at most two slots are
    migrated per mutating call, so no single call pays for a full copy.
    Reads are pure (the structural checker relies on that).
    """

    __slots__ = ("slots", "old", "copied", "occupied")

    INITIAL_CAPACITY = 8

    def __init__(self):
        self.slots = [None] * self.INITIAL_CAPACITY
        self.old = None       # array still being migrated, if any
        self.copied = 0       # slots of `old` already copied into `slots`
        self.occupied = 0

    def get(self, rank):
        old = self.old
        if old is not None and self.copied <= rank < len(old):
            return old[rank]
        if rank < len(self.slots):
            return self.slots[rank]
        return None

    def put(self, rank, node):
        if rank >= len(self.slots):
            self._grow(rank)
        assert self.get(rank) is None
        self._write(rank, node)
        self.occupied += 1
        self._advance()

    def clear(self, rank):
        assert self.get(rank) is not None
        self._write(rank, None)
        self.occupied -= 1
        self._advance()

    def _write(self, rank, value):
        old = self.old
        if old is not None and self.copied <= rank < len(old):
            old[rank] = value
        else:
            self.slots[rank] = value

    def _advance(self):
        # Migrate up to two pending slots per mutation.
        old = self.old
        if old is None:
            return
        copied = self.copied
        end = min(copied + 2, len(old))
        while copied < end:
            self.slots[copied] = old[copied]
            copied += 1
        self.copied = copied
        if copied >= len(old):
            self.old = None

    def _grow(self, need):
        if self.old is not None:
            # Finish a migration that a very fast second growth overtook.
            old, copied = self.old, self.copied
            while copied < len(old):
                self.slots[copied] = old[copied]
                copied += 1
            self.old = None
        cap = len(self.slots)
        while cap <= need:
            cap *= 2
        self.old = self.slots
        self.copied = 0
        self.slots = [None] * cap

    def occupants(self):
        """Yield (rank, node) for occupied slots (pure)."""
        for r in range(len(self.slots)):
            node = self.get(r)
            if node is not None:
                yield r, node


class _HeapBase:
    """Machinery shared by both variants; concrete classes pick the hooks."""

    MELD = False
    variant = "nomeld"
    # Tag given to a rank root whose rank dropped because a rank child left.
    ALPHA_ROOT_TAG = TAG_A
    # Tag given to a freshly demoted nonrank child (one-node loss reduction).
    CONVERSION_ROOT_TAG = TAG_A

    __slots__ = (
        "policy", "size", "root",
        "ar", "lr", "ac", "lc", "lc_weight",
        "counters", "discarded",
        "check_phi_steps", "check_method_bounds", "debug_blocks",
        "_start_g", "_start_a", "_start_l",
        "_step_g", "_step_a", "_step_l",
        "_method", "_method_n", "_method_steps", "_in_method",
        "_revive_skips", "_block_depth", "_in_step",
    )

    def __init__(self, policy=AMORTIZED):
        if policy not in POLICIES:
            raise ValueError("unknown policy %r" % (policy,))
        self.policy = policy
        self.size = 0
        self.root = None
        self.ar = RankRegistry()
        self.lr = RankRegistry()
        self.ac = []
        self.lc = []
        self.lc_weight = 0
        self.counters = OpCounters()
        self.discarded = False
        self.check_phi_steps = True
        self.check_method_bounds = False
        self.debug_blocks = bool(os.environ.get("HEAP_DEBUG_PHI"))
        self._start_g = self._start_a = self._start_l = 0
        self._step_g = self._step_a = self._step_l = 0
        self._method = None
        self._method_n = 0
        self._method_steps = 0
        self._in_method = False
        self._revive_skips = 0
        self._block_depth = 0
        self._in_step = False

    # ------------------------------------------------------------------
    # potential coordinates (maintained incrementally, O(1) reads)

    def phi_coords(self):
        """(phi_G, phi_A, phi_L) from the incremental counts."""
        return (0,
                self.ar.occupied + 2 * len(self.ac),
                3 * self.lr.occupied + 4 * self.lc_weight)

    def phi(self):
        g, a, l = self.phi_coords()
        return g + a + l

    def ledger_deltas(self):
        """Per-coordinate change since the current method started."""
        g, a, l = self.phi_coords()
        return g - self._start_g, a - self._start_a, l - self._start_l

    def injected_deltas(self):
        """Method-so-far potential change excluding the reduction steps."""
        dg, da, dl = self.ledger_deltas()
        return dg - self._step_g, da - self._step_a, dl - self._step_l

    # ------------------------------------------------------------------
    # public-method bracketing

    def _guard_live(self):
        if self.discarded or self.size < 0:
            raise RetiredHeapError("heap record was melded away")

    def _begin(self, name):
        assert not self._in_method, "heap records are single-writer"
        self._in_method = True
        self._method = name
        self._method_n = self.size
        self._method_steps = 0
        self._start_g, self._start_a, self._start_l = self.phi_coords()
        self._step_g = self._step_a = self._step_l = 0

    def _end(self):
        if self.policy == WORSTCASE:
            dg, da, dl = self.ledger_deltas()
            assert dg <= 0 or not self.gc, "positive G delta with nonempty GC"
            assert da <= 0 or not self.ac, "positive A delta with nonempty AC"
            assert dl <= 0 or not self.lc, "positive L delta with nonempty LC"
        if self.check_method_bounds:
            from .accounting import assert_method_bounds
            assert_method_bounds(self)
        self._in_method = False

    # ------------------------------------------------------------------
    # intrusive child list: parent.child is leftmost, left pointers cyclic,
    # right pointer of the rightmost child is None

    @staticmethod
    def _child_add_left(p, c):
        first = p.child
        if first is None:
            c.left = c
            c.right = None
        else:
            c.left = first.left
            c.right = first
            first.left = c
        p.child = c
        c.parent = p

    @staticmethod
    def _child_add_right(p, c):
        first = p.child
        if first is None:
            c.left = c
            c.right = None
            p.child = c
        else:
            last = first.left
            last.right = c
            c.left = last
            c.right = None
            first.left = c
        c.parent = p

    @staticmethod
    def _child_remove(p, c):
        r = c.right
        if p.child is c:
            p.child = r
            if r is not None:
                r.left = c.left
        else:
            c.left.right = r
            if r is not None:
                r.left = c.left
            else:
                p.child.left = c.left
        c.left = c
        c.right = None
        c.parent = None

    # root list: same shape, head kept in self.root, members have parent None

    def _root_append(self, c):
        first = self.root
        if first is None:
            c.left = c
            c.right = None
            self.root = c
        else:
            last = first.left
            last.right = c
            c.left = last
            c.right = None
            first.left = c
        c.parent = None
        self.counters.nontree_writes += 1

    def _root_remove(self, c):
        r = c.right
        if self.root is c:
            self.root = r
            if r is not None:
                r.left = c.left
        else:
            c.left.right = r
            if r is not None:
                r.left = c.left
            else:
                self.root.left = c.left
        c.left = c
        c.right = None
        self.counters.nontree_writes += 1

    # ------------------------------------------------------------------
    # violation bookkeeping

    def _registry_for(self, tag):
        if tag == TAG_A:
            return self.ar
        if tag == TAG_LSTAR:
            return self.lr
        raise AssertionError("no registry for tag %s" % TAG_NAMES[tag])

    def _unplace(self, x):
        """Clear x's registry slot if the slot holds x.

        Returns True when the slot held x (x is now represented nowhere);
        False means x is not placed, so if tagged it lives in its cache.
        """
        t = x.tag
        if t == TAG_N:
            return False
        if t == TAG_LSTAR and x.loss != 1:
            return False
        reg = self._registry_for(t)
        if reg.get(x.rank) is x:
            reg.clear(x.rank)
            self.counters.nontree_writes += 1
            return True
        return False

    def _lc_weight_of(self, x):
        return x.loss if (x.tag == TAG_LSTAR and x.loss >= 2) else 1

    def _retag(self, x, new, was_placed):
        """Install tag `new` on x after the caller already unplaced it.

        A node is pushed onto the cache of its new tag exactly when no
        entry represents it there yet; an existing entry (live or stale)
        simply keeps representing it.  A stale entry coming back to life
        under a different tag makes the surrounding step cheaper than the
        table row, so those skips are counted to relax exactness checks.
        """
        old = x.tag
        if x.in_lc:
            w_old = self._lc_weight_of(x)
        x.tag = new
        if new != TAG_LSTAR and x.loss:
            x.loss = 0
        if x.in_lc:
            self.lc_weight += self._lc_weight_of(x) - w_old
        if new == TAG_N:
            return
        if new == TAG_A:
            if x.in_ac:
                if new != old:
                    self._revive_skips += 1
                return
            assert not was_placed or not x.in_ac
            self.ac.append(x)
            x.in_ac = True
        elif new == TAG_LSTAR:
            if x.in_lc:
                if new != old:
                    self._revive_skips += 1
                return
            self.lc.append(x)
            x.in_lc = True
            self.lc_weight += self._lc_weight_of(x)
        else:
            assert new == TAG_G and self.MELD
            if x.in_gc:
                if new != old:
                    self._revive_skips += 1
                return
            self.gc.append(x)
            x.in_gc = True
        self.counters.nontree_writes += 1

    def set_violation_type(self, x, tag, known_cached=False):
        """Tag transition block: clears a held registry slot, re-caches.

        `known_cached` is a caller hint that x already sits on the target
        cache; membership is tracked exactly, so the hint is redundant and
        only checked.
        """
        dbg = self._block_pre()
        was_placed = self._unplace(x)
        if known_cached and tag != TAG_N:
            assert {TAG_A: x.in_ac, TAG_G: x.in_gc, TAG_LSTAR: x.in_lc}[tag]
        self._retag(x, tag, was_placed)
        self._block_post(dbg, "set_violation_type_%s" % TAG_NAMES[tag])

    # ------------------------------------------------------------------
    # structural private blocks

    def rank_decrement(self, p, cause):
        """p lost a rank child (removal) or had one demoted (conversion)."""
        dbg = self._block_pre()
        was_placed = self._unplace(p)
        assert p.rank >= 1
        p.rank -= 1
        if p.parent is None or p.kind == KIND_NONRANK:
            # p is a rank root; it keeps rank-root status.
            assert p.tag in (TAG_A, TAG_G)
            new = self.ALPHA_ROOT_TAG if cause == CAUSE_REMOVAL else p.tag
            self._retag(p, new, was_placed)
        else:
            assert p.kind == KIND_RANK and p.tag in (TAG_N, TAG_LSTAR)
            old_tag = p.tag
            if p.in_lc and old_tag == TAG_LSTAR:
                self.lc_weight += 1   # a represented node's entry tracks its loss
            p.loss += 1
            p.tag = TAG_LSTAR
            if p.in_lc:
                if old_tag != TAG_LSTAR:
                    self._revive_skips += 1
            else:
                self.lc.append(p)
                p.in_lc = True
                self.lc_weight += self._lc_weight_of(p)
                self.counters.nontree_writes += 1
        self._block_post(dbg, "rank_decrement")

    def add_solid_child(self, p, c, rank_child):
        """Link parentless solid c as leftmost child of solid p."""
        dbg = self._block_pre()
        self._child_add_left(p, c)
        c.kind = KIND_RANK if rank_child else KIND_NONRANK
        is_rank_root = p.parent is None or p.kind == KIND_NONRANK
        if rank_child:
            was_placed = self._unplace(p)
            p.rank += 1
            if is_rank_root:
                self._root_child_added(p, was_placed)
        elif self.MELD and is_rank_root:
            self._root_child_added(p, self._unplace(p))
        self._block_post(dbg, "add_solid_child")

    def _root_child_added(self, p, was_placed):
        # No-meld variant: rank roots carry tag A; refresh the placement.
        assert p.tag == TAG_A
        self._retag(p, TAG_A, was_placed)

    def remove_child(self, p, c):
        """Detach c from p onto the root list, with rank bookkeeping."""
        dbg = self._block_pre()
        was_rank = c.kind == KIND_RANK and not self._is_deferred(c)
        self._child_remove(p, c)
        self._root_append(c)
        if was_rank:
            self.rank_decrement(p, CAUSE_REMOVAL)
        self._block_post(dbg, "child_removal")

    def _is_deferred(self, x):
        return False

    def link(self, a, b):
        """Link two solid nodes; the larger key becomes the leftmost child
        of the smaller.  Exactly one key comparison.  Returns the winner."""
        dbg = self._block_pre()
        self.counters.comparisons += 1
        self.counters.links += 1
        if a.key < b.key or (a.key == b.key and a.uid < b.uid):
            s, h = a, b
        else:
            s, h = b, a
        rank_child = a.rank == b.rank
        if h.parent is not None:
            self.remove_child(h.parent, h)
        self._root_remove(h)
        self.add_solid_child(s, h, rank_child)
        if rank_child:
            self.set_violation_type(h, TAG_N)
        self._block_post(dbg, "link")
        return s

    # ------------------------------------------------------------------
    # loss reductions

    def one_node_loss_reduction(self, x):
        """Demote rank child x (loss >= 2) to a nonrank child of its parent."""
        p = x.parent
        assert p is not None and x.kind == KIND_RANK and x.loss >= 2
        self._child_remove(p, x)
        if self.MELD:
            self._child_add_left(p, x)    # keep solid children in front
        else:
            self._child_add_right(p, x)
        x.kind = KIND_NONRANK
        was_placed = self._unplace(x)
        self._retag(x, self.CONVERSION_ROOT_TAG, was_placed)
        self.rank_decrement(p, CAUSE_CONVERSION)
        if self.MELD and p.parent is not None and p.kind == KIND_RANK \
                and p.loss == 1:
            # p kept its degree but its allowance dropped with the new loss.
            self.degree_reduction_step(p)

    def two_node_loss_reduction(self, x, y):
        """Link equal-rank loss-1 rank children x and y."""
        assert x.loss == 1 and y.loss == 1 and x.rank == y.rank
        self.counters.comparisons += 1
        if x.key < y.key or (x.key == y.key and x.uid < y.uid):
            s, h = x, y
        else:
            s, h = y, x
        self._two_node_ordered(s, h)

    def _two_node_ordered(self, s, h):
        p = h.parent
        self.remove_child(p, h)
        self._root_remove(h)
        self.add_solid_child(s, h, True)
        self.set_violation_type(h, TAG_N)
        self.set_violation_type(s, TAG_N)

    # ------------------------------------------------------------------
    # cache reduction steps

    def reduce_ac_step(self):
        """Pop one AC entry and resolve it.  Returns (case, dphi)."""
        assert self.ac
        g0, a0, l0 = self.phi_coords()
        skips0 = self._revive_skips
        self._in_step = True
        x = self.ac.pop()
        x.in_ac = False
        exact = True
        if x.tag != TAG_A:
            case = "ac_stale"
        else:
            slot = self.ar.get(x.rank)
            if slot is x:
                case = "ac_placed_hit"     # unreachable with exact membership
                exact = False
            elif slot is None:
                self.ar.put(x.rank, x)
                self.counters.nontree_writes += 1
                case = "ac_place"
            else:
                self.ar.clear(x.rank)
                self.counters.nontree_writes += 1
                fired0 = self.counters.degree_fired
                self.link(x, slot)
                if self.MELD and self.counters.degree_fired > fired0:
                    case = "ac_match_deferred3"
                else:
                    case = "ac_match"
        if self._revive_skips != skips0:
            exact = False
        return self._finish_step(case, g0, a0, l0, exact, 0)

    def reduce_lc_step(self):
        """Pop one LC entry and resolve it.  Returns (case, dphi)."""
        assert self.lc
        g0, a0, l0 = self.phi_coords()
        skips0 = self._revive_skips
        self._in_step = True
        x = self.lc.pop()
        x.in_lc = False
        self.lc_weight -= self._lc_weight_of(x)
        exact = True
        m = 0
        if x.tag != TAG_LSTAR:
            case = "lc_stale"
        elif x.loss >= 2:
            m = x.loss
            fired0 = self.counters.degree_fired
            p = x.parent
            sub = self._parent_case(p)
            self.one_node_loss_reduction(x)
            if sub == "n" and self.MELD and self.counters.degree_fired > fired0:
                sub = "n_deferred3"
            case = "lc_one_node:" + sub
        else:
            slot = self.lr.get(x.rank)
            if slot is x:
                case = "lc_placed_hit"
                exact = False
            elif slot is None:
                self.lr.put(x.rank, x)
                self.counters.nontree_writes += 1
                case = "lc_place"
            else:
                m = 1
                self.lr.clear(x.rank)
                self.counters.nontree_writes += 1
                y = slot
                self.counters.comparisons += 1
                if x.key < y.key or (x.key == y.key and x.uid < y.uid):
                    s, h = x, y
                else:
                    s, h = y, x
                p = h.parent
                if p is s:
                    exact = False
                sub = self._parent_case(p)
                self._two_node_ordered(s, h)
                case = "lc_match:" + sub
        if self._revive_skips != skips0:
            exact = False
        return self._finish_step(case, g0, a0, l0, exact, m)

    def _parent_case(self, p):
        t = p.tag
        if t == TAG_A:
            return "a_placed" if self.ar.get(p.rank) is p else "a_cached"
        if t == TAG_G:
            return "g_placed" if self.gr.get(p.rank) is p else "g_cached"
        if t == TAG_LSTAR:
            if p.loss == 1 and self.lr.get(p.rank) is p:
                return "l_placed"
            return "lstar_cached"
        return "n"

    def _finish_step(self, case, g0, a0, l0, exact, m):
        self._in_step = False
        g1, a1, l1 = self.phi_coords()
        dg, da, dl = g1 - g0, a1 - a0, l1 - l0
        self._step_g += dg
        self._step_a += da
        self._step_l += dl
        self._method_steps += 1
        cnt = self.counters
        cnt.reduction_steps += 1
        cnt.cases[case] = cnt.cases.get(case, 0) + 1
        dphi = dg + da + dl
        if self.check_phi_steps:
            if dphi > -1:
                raise AssertionError(
                    "reduction step %s changed phi by %+d" % (case, dphi))
            if exact:
                expect = _STEP_PHI[self.variant].get(case)
                if expect is not None:
                    want = expect if isinstance(expect, int) else expect(m)
                    if dphi != want:
                        raise AssertionError(
                            "step %s: dphi %+d, table says %+d (loss %d)"
                            % (case, dphi, want, m))
        return case, dphi

    def reduce_until(self, mode):
        """Run reduction steps; returns how many were executed.

        DRAIN_ALL empties every cache (LC first, then AC, then GC).
        LEDGER_DRIVEN reduces a coordinate only while its change since
        method start is positive and its cache is nonempty.
        """
        steps = 0
        if mode == DRAIN_ALL:
            while True:
                if self.lc:
                    self.reduce_lc_step()
                elif self.ac:
                    self.reduce_ac_step()
                elif self.MELD and self.gc:
                    self.reduce_gc_step()
                else:
                    break
                steps += 1
        elif mode == LEDGER_DRIVEN:
            d0 = self.ledger_deltas()
            while True:
                dg, da, dl = self.ledger_deltas()
                if self.lc and dl > 0:
                    self.reduce_lc_step()
                elif self.ac and da > 0:
                    self.reduce_ac_step()
                elif self.MELD and self.gc and dg > 0:
                    self.reduce_gc_step()
                else:
                    break
                steps += 1
            if self.check_phi_steps:
                bound = self._ledger_step_bound(d0)
                assert steps <= bound, (
                    "ledger pass ran %d steps, bound %d" % (steps, bound))
        else:
            raise ValueError("unknown reduce mode %r" % (mode,))
        return steps

    def _ledger_step_bound(self, d0):
        _, da, dl = d0
        return max(-1, da) + max(-3, dl) + 4

    # ------------------------------------------------------------------
    # find-min phases

    def _phase0(self):
        r = self.root
        while r is not None:
            nxt = r.right
            r.parent = None
            self._phase0_root(r)
            r = nxt

    def _phase0_root(self, r):
        if r.tag != TAG_A:
            self.set_violation_type(r, TAG_A)

    def _phase2(self):
        cur = self.root
        if cur is None:
            return
        while True:
            d = cur.left
            if d is cur:
                break
            s = self.link(cur, d)
            cur = s.left

    def _reduce_pass(self, drain):
        if drain or self.policy == AMORTIZED:
            self.reduce_until(DRAIN_ALL)
        elif self.policy == WORSTCASE:
            self.reduce_until(LEDGER_DRIVEN)
        else:
            self._drain_ac_gc()

    def _drain_ac_gc(self):
        while True:
            if self.ac:
                self.reduce_ac_step()
            elif self.MELD and self.gc:
                self.reduce_gc_step()
            else:
                break

    def _find_min_pass(self, drain):
        self._phase0()
        self._reduce_pass(drain)
        self._phase2()
        self._reduce_pass(drain)

    # ------------------------------------------------------------------
    # public methods

    def insert(self, key):
        """Insert key; returns the node handle for later decrease_key."""
        self._guard_live()
        self._begin("insert")
        self.counters.ops["insert"] = self.counters.ops.get("insert", 0) + 1
        x = Node(key, self)
        self._on_new_node(x)
        self.size += 1
        self._root_append(x)
        self._find_min_pass(False)
        self._end()
        return x

    def _on_new_node(self, x):
        pass

    def find_min(self):
        """Return the minimum node, or None on an empty heap."""
        self._guard_live()
        self._begin("find_min")
        self.counters.ops["find_min"] = self.counters.ops.get("find_min", 0) + 1
        self._find_min_pass(False)
        self._end()
        return self.root

    def delete_min(self):
        """Remove the minimum; returns its (key, uid)."""
        self._guard_live()
        if self.size == 0:
            raise EmptyHeapError("delete_min on empty heap")
        self._begin("delete_min")
        self.counters.ops["delete_min"] = self.counters.ops.get("delete_min", 0) + 1
        rho = self.root
        assert rho is not None and rho.right is None and rho.left is rho, \
            "public methods always leave a single tree root"
        self._decrement_size()
        self.root = rho.child
        rho.child = None
        self.counters.nontree_writes += 1
        self._on_root_removed(rho)
        self.set_violation_type(rho, TAG_N)
        self._find_min_pass(True)   # delete_min always drains
        rho.alive = False
        self._end()
        return rho.key, rho.uid

    def _decrement_size(self):
        self.size -= 1

    def _on_root_removed(self, rho):
        pass

    def decrease_key(self, x, key):
        """Lower x's key to `key`.  Equal key is a no-op; larger is an error."""
        self._guard_live()
        if not x.alive:
            raise StaleNodeError("node was removed by delete_min")
        if key > x.key:
            raise KeyIncreaseError("new key %r above current %r" % (key, x.key))
        if key == x.key:
            return
        self._begin("decrease_key")
        self.counters.ops["decrease_key"] = self.counters.ops.get("decrease_key", 0) + 1
        p = x.parent
        if p is not None:
            self.remove_child(p, x)
        x.key = key
        self._find_min_pass(False)
        if self.policy == SIMPLE:
            for _ in range(2):
                if not self.lc:
                    break
                self.reduce_lc_step()
            self._drain_ac_gc()
        self._end()

    # ------------------------------------------------------------------
    # debug-mode block bracketing (HEAP_DEBUG_PHI=1)

    def _block_pre(self):
        if not self.debug_blocks:
            return None
        self._block_depth += 1
        from .accounting import compute_phi
        snap = compute_phi(self)
        tracked = self.phi_coords()
        assert (snap.phi_g, snap.phi_a, snap.phi_l) == tracked, \
            "tracked coordinates diverged from recomputation: %r vs %r" % (
                (snap.phi_g, snap.phi_a, snap.phi_l), tracked)
        return tracked

    def _block_post(self, pre, block):
        if pre is None:
            return
        from .accounting import compute_phi, assert_block_bounds
        self._block_depth -= 1
        snap = compute_phi(self)
        tracked = self.phi_coords()
        if (snap.phi_g, snap.phi_a, snap.phi_l) != tracked:
            raise AssertionError(
                "block %s: tracked %r != recomputed %r"
                % (block, tracked, (snap.phi_g, snap.phi_a, snap.phi_l)))
        if self._block_depth == 0 and not self._in_step:
            # Table rows describe blocks entered from consistent states;
            # inside a reduction step the step-level checks apply instead.
            delta = tuple(b - a for a, b in zip(pre, tracked))
            assert_block_bounds(self.variant, block, delta)


class NoMeldHeap(_HeapBase):
    """Heap variant without meld: violation tags A and L* only."""

    MELD = False
    variant = "nomeld"
    ALPHA_ROOT_TAG = TAG_A
    CONVERSION_ROOT_TAG = TAG_A

    __slots__ = ()

    gc = ()   # so shared code can test `self.gc` cheaply

    def reduce_gc_step(self):
        raise HeapError("no GC cache in the no-meld variant")


def make_heap(policy=AMORTIZED, variant="nomeld"):
    """Create an empty heap record of the requested variant and policy."""
    if variant == "nomeld":
        return NoMeldHeap(policy)
    if variant == "meld":
        from .meld import MeldHeap
        return MeldHeap(policy)
    raise ValueError("unknown variant %r" % (variant,))


# Expected exact potential change per reduction case, keyed by variant.
# Loss-dependent cases are functions of the popped node's loss.  Entries are
# checked only when no stale cache entry was revived during the step (a
# revival skips one push, making the step strictly cheaper).
_STEP_PHI = {
    "nomeld": {
        "ac_stale": -2,
        "ac_place": -1,
        "ac_match": -1,
        "lc_stale": -4,
        "lc_place": -1,
        "lc_one_node:a_placed": lambda m: 3 - 4 * m,
        "lc_one_node:a_cached": lambda m: 2 - 4 * m,
        "lc_one_node:l_placed": lambda m: 7 - 4 * m,
        "lc_one_node:lstar_cached": lambda m: 6 - 4 * m,
        "lc_one_node:n": lambda m: 6 - 4 * m,
        "lc_match:a_placed": -6,
        "lc_match:a_cached": -7,
        "lc_match:l_placed": -2,
        "lc_match:lstar_cached": -3,
        "lc_match:n": -3,
    },
    "meld": {
        "ac_stale": -6,
        "ac_place": -1,
        "ac_match": -7,
        "ac_match_deferred3": -1,
        "gc_stale": -4,
        "gc_place": -1,
        "gc_match": -1,
        "lc_stale": -11,
        "lc_place": -1,
        "lc_one_node:g_placed": lambda m: 5 - 11 * m,
        "lc_one_node:g_cached": lambda m: 4 - 11 * m,
        "lc_one_node:a_placed": lambda m: 5 - 11 * m,
        "lc_one_node:a_cached": lambda m: 4 - 11 * m,
        "lc_one_node:l_placed": lambda m: 16 - 11 * m,
        "lc_one_node:lstar_cached": lambda m: 15 - 11 * m,
        "lc_one_node:n": lambda m: 15 - 11 * m,
        "lc_one_node:n_deferred3": lambda m: 21 - 11 * m,
        "lc_match:g_placed": -20,
        "lc_match:g_cached": -21,
        "lc_match:a_placed": -22,
        "lc_match:a_cached": -17,
        "lc_match:l_placed": -9,
        "lc_match:lstar_cached": -10,
        "lc_match:n": -10,
    },
}
