"""Meldable heap variant: deferred nodes, degree reductions, retirement.

A meld makes every node of the smaller record *implicitly deferred* in one
pointer write: the record's size becomes -1 and membership is read through
the node's owner pointer.  Deferred nodes carry no rank obligations and are
re-integrated lazily, either when a root is consolidated or when a degree
reduction turns three rightmost deferred children into a small solid tree.

Degrees are kept logarithmic positionally: the node at position p of the
heap-node list observes degree <= b(2n - p), and every size decrement runs
two rounds of (two degree-reduction steps on the list head, move it to the
tail), which renews the bound as n shrinks.
"""

from __future__ import annotations

from .accounting import OpCounters
from .core import (
    _HeapBase, Node, RankRegistry,
    TAG_N, TAG_A, TAG_G, TAG_LSTAR,
    KIND_RANK, KIND_NONRANK, KIND_DEFERRED,
    CAUSE_REMOVAL, CAUSE_CONVERSION,
    AMORTIZED, WORSTCASE, SIMPLE,
    RetiredHeapError, SelfMeldError,
)


class MeldHeap(_HeapBase):
    """Heap variant with meld: violation tags G, A and L*."""

    MELD = True
    variant = "meld"
    ALPHA_ROOT_TAG = TAG_G
    CONVERSION_ROOT_TAG = TAG_G

    __slots__ = ("gr", "gc", "refcount", "nl_head")

    def __init__(self, policy=AMORTIZED):
        super().__init__(policy)
        self.gr = RankRegistry()
        self.gc = []
        self.refcount = 0
        self.nl_head = None

    # ------------------------------------------------------------------
    # node list (all nodes of the heap, deferred or not); same intrusive
    # shape as the other lists: head, cyclic prev, next None at the tail

    def phi_coords(self):
        """(phi_G, phi_A, phi_L) with the meld-variant weights."""
        return (3 * self.gr.occupied + 4 * len(self.gc),
                5 * self.ar.occupied + 6 * len(self.ac),
                10 * self.lr.occupied + 11 * self.lc_weight)

    @property
    def nl_tail(self):
        return self.nl_head.nl_prev if self.nl_head is not None else None

    def _nl_append(self, x):
        head = self.nl_head
        if head is None:
            x.nl_prev = x
            x.nl_next = None
            self.nl_head = x
        else:
            tail = head.nl_prev
            tail.nl_next = x
            x.nl_prev = tail
            x.nl_next = None
            head.nl_prev = x
        self.counters.nontree_writes += 1

    def _nl_remove(self, x):
        nxt = x.nl_next
        if self.nl_head is x:
            self.nl_head = nxt
            if nxt is not None:
                nxt.nl_prev = x.nl_prev
        else:
            x.nl_prev.nl_next = nxt
            if nxt is not None:
                nxt.nl_prev = x.nl_prev
            else:
                self.nl_head.nl_prev = x.nl_prev
        x.nl_prev = None
        x.nl_next = None
        self.counters.nontree_writes += 1

    def _nl_move_head_to_end(self):
        head = self.nl_head
        if head is None or head.nl_next is None:
            return
        self._nl_remove(head)
        self._nl_append(head)

    def _nl_prepend_list(self, other_head):
        if other_head is None:
            return
        mine = self.nl_head
        if mine is None:
            self.nl_head = other_head
        else:
            a_tail = other_head.nl_prev
            b_tail = mine.nl_prev
            a_tail.nl_next = mine
            mine.nl_prev = a_tail
            other_head.nl_prev = b_tail
            self.nl_head = other_head
        self.counters.nontree_writes += 1

    def node_list(self):
        """Yield the heap-node list front to back (checker helper)."""
        x = self.nl_head
        while x is not None:
            yield x
            x = x.nl_next

    # ------------------------------------------------------------------
    # deferral

    def _is_deferred(self, x):
        return x.kind == KIND_DEFERRED or x.owner.size < 0

    def convert_implicit(self, x):
        """Rebind an implicitly deferred node to this record (now explicit)."""
        old = x.owner
        assert old.size < 0 and old is not self
        old.refcount -= 1
        if old.refcount == 0:
            _discard_record(old)
        x.owner = self
        self.refcount += 1
        x.kind = KIND_DEFERRED
        # Stale bookkeeping from the retired record dies here.
        x.tag = TAG_N
        x.loss = 0
        x.rank = 0
        x.in_ac = x.in_gc = x.in_lc = False
        self.counters.conversions += 1
        self.counters.nontree_writes += 1

    # ------------------------------------------------------------------
    # degree reduction

    def degree_reduction_step(self, x):
        """One degree-reduction step on x.

        Converts x (and up to three rightmost deferred children) to
        explicit; if the three rightmost children are all deferred, they are
        rebuilt into a rank-1 tree hung as a new leftmost nonrank child, so
        the degree of x drops by two.  Returns True when that restructuring
        fired.
        """
        self.counters.degree_steps += 1
        if x.owner.size < 0:
            self.convert_implicit(x)
        picked = []
        first = x.child
        if first is not None:
            c = first.left
            while len(picked) < 3 and (c.kind == KIND_DEFERRED or c.owner.size < 0):
                picked.append(c)
                if c is first:
                    break
                c = c.left
        for c in picked:
            if c.owner.size < 0:
                self.convert_implicit(c)
        if len(picked) < 3:
            return False
        a, b, c3 = picked
        cnt = self.counters
        cnt.comparisons += 1
        if b.key < a.key or (b.key == a.key and b.uid < a.uid):
            a, b = b, a
        cnt.comparisons += 1
        if c3.key < b.key or (c3.key == b.key and c3.uid < b.uid):
            b, c3 = c3, b
            cnt.comparisons += 1
            if b.key < a.key or (b.key == a.key and b.uid < a.uid):
                a, b = b, a
        s, m, h = a, b, c3
        self._child_remove(x, s)
        self._child_remove(x, m)
        self._child_remove(x, h)
        s.kind = KIND_NONRANK
        s.rank = 1
        s.loss = 0
        m.kind = KIND_RANK
        m.rank = 0
        m.loss = 0
        self._child_add_left(s, m)
        self._child_add_right(m, h)        # h stays deferred under m
        self._child_add_left(x, s)         # plain splice: x is not charged
        self.set_violation_type(s, TAG_A)  # new rank root without reserve
        cnt.degree_fired += 1
        return True

    # ------------------------------------------------------------------
    # variant hooks

    def _on_new_node(self, x):
        self.refcount += 1
        self._nl_append(x)

    def _on_root_removed(self, rho):
        self._nl_remove(rho)

    def _decrement_size(self):
        # Heap size decrement block: also renews positional degree bounds.
        dbg = self._block_pre()
        self.size -= 1
        self.refcount -= 1
        for _ in range(2):
            f = self.nl_head
            if f is None:
                break
            self.degree_reduction_step(f)
            self.degree_reduction_step(f)
            self._nl_move_head_to_end()
        self._block_post(dbg, "heap_size_decrement")

    def _phase0_root(self, r):
        if r.owner.size < 0:
            self.convert_implicit(r)
        if r.kind == KIND_DEFERRED:
            r.kind = KIND_NONRANK
            r.rank = 0
            r.loss = 0
            self.set_violation_type(r, TAG_G)
        elif r.tag != TAG_A and r.tag != TAG_G:
            self.set_violation_type(r, TAG_A)

    def _root_child_added(self, p, was_placed):
        # Adding a solid child consumes degree headroom: flip the reserve
        # tag, and restore the reserve with a degree reduction on A -> G.
        assert p.tag in (TAG_A, TAG_G)
        if p.tag == TAG_A:
            self._retag(p, TAG_G, was_placed)
            self.degree_reduction_step(p)
        else:
            self._retag(p, TAG_A, was_placed)

    def _registry_for(self, tag):
        if tag == TAG_G:
            return self.gr
        return super()._registry_for(tag)

    def _ledger_step_bound(self, d0):
        dg, da, dl = d0
        return max(-6, dg) + max(-4, da) + max(-10, dl) + 20

    # ------------------------------------------------------------------
    # GC reduction

    def reduce_gc_step(self):
        """Pop one GC entry and resolve it.  Returns (case, dphi)."""
        assert self.gc
        g0, a0, l0 = self.phi_coords()
        skips0 = self._revive_skips
        self._in_step = True
        x = self.gc.pop()
        x.in_gc = False
        exact = True
        if x.tag != TAG_G:
            case = "gc_stale"
        else:
            slot = self.gr.get(x.rank)
            if slot is x:
                case = "gc_placed_hit"
                exact = False
            elif slot is None:
                self.gr.put(x.rank, x)
                self.counters.nontree_writes += 1
                case = "gc_place"
            else:
                self.gr.clear(x.rank)
                self.counters.nontree_writes += 1
                # Linking two reserve-backed roots needs no degree reduction:
                # the A <-> G flip inside add_solid_child spends the reserve.
                self.link(x, slot)
                case = "gc_match"
        if self._revive_skips != skips0:
            exact = False
        return self._finish_step(case, g0, a0, l0, exact, 0)

    # ------------------------------------------------------------------
    # meld

    def meld(self, other):
        """Meld with another record; returns the surviving record.

        The smaller record (ties: the receiver) retires: its nodes become
        implicitly deferred, its registries and caches are dropped, and only
        {size = -1, refcount} remain until the last owned node is rebound.
        """
        if self is other:
            raise SelfMeldError("cannot meld a heap with itself")
        self._guard_live()
        other._guard_live()
        if self.size <= other.size:
            h_s, h_h = self, other
        else:
            h_s, h_h = other, self
        h_h.counters.merge(h_s.counters)
        h_s.counters = OpCounters()
        h_h._begin("meld")
        h_h.counters.ops["meld"] = h_h.counters.ops.get("meld", 0) + 1
        h_h._nl_prepend_list(h_s.nl_head)
        h_s.nl_head = None
        h_h.size += h_s.size
        h_s.size = -1
        if h_s.root is not None:
            first = h_s.root
            mine = h_h.root
            if mine is None:
                h_h.root = first
            else:
                s_tail = first.left
                h_tail = mine.left
                s_tail.right = mine
                mine.left = s_tail
                first.left = h_tail
                h_h.root = first
            h_s.root = None
            h_h.counters.nontree_writes += 1
        # Registries and caches of the retired record are discarded whole.
        h_s.ar = h_s.lr = h_s.gr = None
        h_s.ac = h_s.lc = h_s.gc = None
        h_s.lc_weight = 0
        if h_s.refcount == 0:
            _discard_record(h_s)
        h_h._find_min_pass(False)
        h_h._end()
        return h_h


def _discard_record(record):
    """Reclaim a retired record once nothing points at it any more."""
    assert record.size < 0 and record.refcount == 0
    record.discarded = True
