"""Structural checking, bound functions, the sorted-multiset oracle, and
the differential fuzz driver.

The checker is side-effect free: it walks trees, lists, registries and
caches and returns findings instead of raising, so a report can name every
violated rule at once.  The fuzz driver runs the same random operation
sequence against a heap and against :class:`OracleHeap` and aborts with the
seed and operation index on the first divergence.
"""

from __future__ import annotations

import heapq
import math
import random
import time
from dataclasses import dataclass, field

from . import core
from .accounting import compute_phi, max_rank_bound
from .core import (
    TAG_N, TAG_A, TAG_G, TAG_LSTAR, TAG_NAMES,
    KIND_RANK, KIND_NONRANK, KIND_DEFERRED,
    AMORTIZED, WORSTCASE, SIMPLE,
    NoMeldHeap, make_heap,
)

AFTER_AMORTIZED = "after_amortized"
ANY_TIME = "any_time"

MIN_KEY = -(2 ** 63) + 1


def nomeld_degree_bound(n: int) -> int:
    """Largest admissible node degree without deferred children."""
    return 2 * max_rank_bound(n) + 1


def meld_degree_bound(n: int, position: int, solid_loss_free: bool) -> float:
    """Positional degree bound for the node at `position` (1-based) of the
    heap-node list."""
    c = 23 if solid_loss_free else 22
    return c + 4 * math.log2(max(2 * n - position, 2))


@dataclass
class CheckReport:
    """Outcome of one check_structure call; empty findings means all green."""

    findings: list = field(default_factory=list)

    def add(self, rule, message):
        self.findings.append((rule, message))

    @property
    def ok(self):
        return not self.findings

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join("%s: %s" % f for f in self.findings)


def _tree_nodes(root):
    stack = [root]
    while stack:
        x = stack.pop()
        yield x
        c = x.child
        while c is not None:
            stack.append(c)
            c = c.right


def check_structure(heap, strictness=ANY_TIME) -> CheckReport:
    """Verify the record's structural invariants; returns a report.

    AFTER_AMORTIZED additionally requires empty caches and the population
    bounds that hold at amortized-policy method exits.
    """
    rep = CheckReport()
    meld = heap.MELD
    n = heap.size
    if heap.discarded:
        rep.add("retired", "record is discarded")
        return rep
    if n < 0:
        rep.add("retired", "record is retired (size -1)")
        return rep

    # Root list shape: exactly one tree root whenever the heap is nonempty.
    roots = []
    r = heap.root
    while r is not None:
        roots.append(r)
        if r.parent is not None:
            rep.add("root-parent", "root %r has a parent" % r)
        r = r.right
    if n == 0 and roots:
        rep.add("size", "size 0 but root list nonempty")
    if n > 0 and len(roots) != 1:
        rep.add("single-root", "%d tree roots with size %d" % (len(roots), n))
    if roots and heap.root.left is not roots[-1]:
        rep.add("root-list", "left of leftmost root is not the rightmost")

    positions = {}
    if meld:
        for i, x in enumerate(heap.node_list()):
            positions[id(x)] = i + 1
        if len(positions) != n:
            rep.add("node-list", "node list has %d entries, size is %d"
                    % (len(positions), n))

    seen = {}
    total_loss = 0
    count_a = 0
    count_g = 0
    max_rank = 0
    owned = 0
    rank_bound = max_rank_bound(n)

    def deferred(x):
        return meld and (x.kind == KIND_DEFERRED or x.owner.size < 0)

    for root in roots:
        for x in _tree_nodes(root):
            if id(x) in seen:
                rep.add("sharing", "node %r reached twice" % x)
                continue
            seen[id(x)] = x
            if not x.alive:
                rep.add("alive", "discarded node %r still linked" % x)
            # sibling ring
            c = x.child
            rank_children = 0
            solid_over = False
            prev = None
            while c is not None:
                if c.parent is not x:
                    rep.add("parent-link", "child %r of %r has wrong parent" % (c, x))
                if c.right is not None and c.right.left is not c:
                    rep.add("sibling", "broken left link after %r" % c)
                if c.key < x.key or (c.key == x.key and c.uid < x.uid):
                    rep.add("heap-order",
                            "child %r not above parent %r" % (c, x))
                if deferred(c):
                    solid_over = True
                else:
                    if solid_over:
                        rep.add("solid-prefix",
                                "solid child %r right of a deferred one under %r"
                                % (c, x))
                    if c.kind == KIND_RANK:
                        rank_children += 1
                prev = c
                c = c.right
            if x.child is not None and x.child.left is not prev:
                rep.add("sibling", "left of leftmost child of %r is stale" % x)
            if deferred(x):
                if x.owner.size < 0:
                    # Implicitly deferred: the stored tag/loss/rank are dead
                    # values, scrubbed lazily on conversion.  No solid
                    # children may hang below.
                    cc = x.child
                    while cc is not None:
                        if not deferred(cc):
                            rep.add("deferred-children",
                                    "implicitly deferred %r has solid child %r"
                                    % (x, cc))
                        cc = cc.right
                    if x.owner.refcount <= 0:
                        rep.add("owner-refcount",
                                "retired owner of %r has refcount %d"
                                % (x, x.owner.refcount))
                else:
                    owned += 1
                    cc = x.child
                    while cc is not None:
                        if not deferred(cc) and cc.kind == KIND_RANK:
                            rep.add("deferred-children",
                                    "explicitly deferred %r has solid rank child %r"
                                    % (x, cc))
                        cc = cc.right
                    if x.loss or x.tag != TAG_N:
                        rep.add("deferred-state",
                                "explicitly deferred %r carries loss %d tag %s"
                                % (x, x.loss, TAG_NAMES[x.tag]))
            else:
                if not meld or x.owner is heap:
                    owned += 1
                elif meld:
                    rep.add("owner", "solid node %r owned elsewhere" % x)
                if x.rank != rank_children:
                    rep.add("rank-count", "node %r has rank %d but %d rank children"
                            % (x, x.rank, rank_children))
                is_rank_root = x.parent is None or x.kind == KIND_NONRANK
                if x.loss and is_rank_root:
                    rep.add("loss", "rank root %r has loss %d" % (x, x.loss))
                if x.loss and x.tag != TAG_LSTAR:
                    rep.add("tag-consistency",
                            "node %r has loss %d but tag %s"
                            % (x, x.loss, TAG_NAMES[x.tag]))
                if x.tag == TAG_LSTAR and x.loss == 0:
                    rep.add("tag-consistency", "node %r tagged L* with loss 0" % x)
                if x.tag in (TAG_A, TAG_G) and not is_rank_root:
                    rep.add("tag-consistency",
                            "rank child %r tagged %s" % (x, TAG_NAMES[x.tag]))
                if x.tag == TAG_G and not meld:
                    rep.add("tag-consistency", "tag G in the no-meld variant")
                if x.tag == TAG_A:
                    count_a += 1
                elif x.tag == TAG_G:
                    count_g += 1
                total_loss += x.loss
                if x.rank > max_rank:
                    max_rank = x.rank
            if meld and id(x) not in positions:
                rep.add("node-list", "node %r missing from the node list" % x)
            # degree bounds
            degree = sum(1 for _ in x.children())
            if meld:
                pos = positions.get(id(x))
                if pos is not None:
                    solid_l0 = not deferred(x) and x.loss == 0
                    if degree > meld_degree_bound(n, pos, solid_l0):
                        rep.add("degree",
                                "node %r degree %d above positional bound %.2f"
                                % (x, degree, meld_degree_bound(n, pos, solid_l0)))
            else:
                if degree > nomeld_degree_bound(n):
                    rep.add("degree", "node %r degree %d above %d"
                            % (x, degree, nomeld_degree_bound(n)))

    if len(seen) != max(n, 0):
        rep.add("size", "reached %d nodes, size is %d" % (len(seen), n))
    if meld and heap.refcount != owned:
        rep.add("refcount", "record refcount %d but owns %d nodes"
                % (heap.refcount, owned))

    # registries: never stale
    regs = [("AR", heap.ar, TAG_A), ("LR", heap.lr, TAG_LSTAR)]
    if meld:
        regs.append(("GR", heap.gr, TAG_G))
    for name, reg, tag in regs:
        for rank, x in reg.occupants():
            if x.tag != tag:
                rep.add("registry", "%s[%d] holds %r with tag %s"
                        % (name, rank, x, TAG_NAMES[x.tag]))
            if x.rank != rank:
                rep.add("registry", "%s[%d] holds %r with rank %d"
                        % (name, rank, x, x.rank))
            if tag == TAG_LSTAR and x.loss != 1:
                rep.add("registry", "LR[%d] holds %r with loss %d"
                        % (rank, x, x.loss))
            if id(x) not in seen:
                rep.add("registry", "%s[%d] points outside the heap" % (name, rank))

    # caches: membership flags must match contents exactly
    caches = [("AC", heap.ac, "in_ac"), ("LC", heap.lc, "in_lc")]
    if meld:
        caches.append(("GC", heap.gc, "in_gc"))
    for name, cache, flag in caches:
        counts = {}
        for x in cache:
            counts[id(x)] = counts.get(id(x), 0) + 1
        for ident, k in counts.items():
            if k > 1:
                rep.add("cache", "%s holds %d entries for one node" % (name, k))
        for x in cache:
            if not getattr(x, flag):
                rep.add("cache", "%s entry %r lacks its membership flag"
                        % (name, x))
    # incremental potential must match a recomputation
    snap = compute_phi(heap)
    if (snap.phi_g, snap.phi_a, snap.phi_l) != heap.phi_coords():
        rep.add("phi", "incremental coordinates %r != recomputed %r"
                % (heap.phi_coords(), (snap.phi_g, snap.phi_a, snap.phi_l)))

    if strictness == AFTER_AMORTIZED:
        if heap.ac or heap.lc or (meld and heap.gc):
            rep.add("caches-empty", "caches nonempty after amortized method")
        if total_loss > rank_bound + 1:
            rep.add("loss-bound", "total loss %d above %d"
                    % (total_loss, rank_bound + 1))
        if count_a > rank_bound + 1:
            rep.add("a-bound", "%d nodes tagged A, bound %d"
                    % (count_a, rank_bound + 1))
        if count_g > rank_bound + 1:
            rep.add("g-bound", "%d nodes tagged G, bound %d"
                    % (count_g, rank_bound + 1))
        if max_rank > rank_bound:
            rep.add("rank-bound", "max rank %d above %d" % (max_rank, rank_bound))
    return rep


def check_ownership(records):
    """Cross-record pass over all live heaps: every owner pointer must lead
    to a live record or an undiscarded retired one whose refcount equals the
    number of nodes still pointing at it."""
    rep = CheckReport()
    owners = {}
    counts = {}
    for h in records:
        if h.size < 0:
            continue
        for x in (h.node_list() if h.MELD else _all_nodes(h)):
            o = x.owner
            if o is None:
                rep.add("owner", "node %r has no owner record" % x)
                continue
            owners[id(o)] = o
            counts[id(o)] = counts.get(id(o), 0) + 1
            if o.discarded:
                rep.add("owner-discarded",
                        "node %r owned by a discarded record" % x)
    for ident, o in owners.items():
        if o.size < 0 and counts[ident] != o.refcount:
            rep.add("refcount",
                    "retired record refcount %d, %d nodes point at it"
                    % (o.refcount, counts[ident]))
    return rep


def _all_nodes(heap):
    r = heap.root
    while r is not None:
        yield from _tree_nodes(r)
        r = r.right


class OracleHeap:
    """Sorted-multiset mirror of the heap API, keyed by (key, uid).

    Built on a lazy-deletion binary heap; structurally unrelated to the
    heaps under test so divergences implicate exactly one side.
    """

    def __init__(self):
        self._heap = []
        self._key = {}

    def __len__(self):
        return len(self._key)

    def insert(self, key, uid):
        assert uid not in self._key
        self._key[uid] = key
        heapq.heappush(self._heap, (key, uid))

    def decrease_key(self, uid, key):
        cur = self._key[uid]
        if key > cur:
            raise core.KeyIncreaseError(key)
        if key == cur:
            return
        self._key[uid] = key
        heapq.heappush(self._heap, (key, uid))

    def _settle(self):
        h = self._heap
        while h:
            key, uid = h[0]
            if self._key.get(uid) == key:
                return
            heapq.heappop(h)

    def find_min(self):
        if not self._key:
            return None
        self._settle()
        return self._heap[0]

    def delete_min(self):
        if not self._key:
            raise core.EmptyHeapError()
        self._settle()
        key, uid = heapq.heappop(self._heap)
        del self._key[uid]
        return key, uid

    def meld(self, other):
        if len(other._key) > len(self._key):
            self._heap, other._heap = other._heap, self._heap
            self._key, other._key = other._key, self._key
        for uid, key in other._key.items():
            self._key[uid] = key
            heapq.heappush(self._heap, (key, uid))
        other._heap = []
        other._key = {}
        return self


class FuzzDivergence(AssertionError):
    """Heap and oracle disagreed; carries replay information."""

    def __init__(self, seed, index, message, trace):
        super().__init__("seed %d op %d: %s" % (seed, index, message))
        self.seed = seed
        self.index = index
        self.trace = trace


@dataclass
class FuzzSummary:
    seed: int
    n_ops: int
    variant: str
    policy: str
    final_size: int
    max_size: int
    reduction_steps: int
    comparisons: int
    nontree_writes: int
    cases: dict
    ops: dict
    max_steps_per_op: int
    max_steps_delete_min: int
    wall_time: float
    trace: list

    @property
    def counters(self):
        return {
            "reduction_steps": self.reduction_steps,
            "comparisons": self.comparisons,
            "nontree_writes": self.nontree_writes,
        }


# Default operation mix; meld weight applies only when the variant melds.
WEIGHTS = (("insert", 0.40), ("delete_min", 0.25),
           ("decrease_key", 0.30), ("meld", 0.05))

POOL_SIZE = 8


class _Group:
    """Union-find handle from a fuzz pool slot to its current record."""

    __slots__ = ("heap", "fused")

    def __init__(self, heap):
        self.heap = heap
        self.fused = None

    def find(self):
        g = self
        while g.fused is not None:
            g = g.fused
        return g


def fuzz_run(seed, n_ops, variant="nomeld", policy=AMORTIZED,
             check_every=1000, step_bounds=True):
    """Drive a random op sequence against heap and oracle.

    Asserts per-op result equality, per-step potential decrements (inside
    the heap), per-op reduction-step bounds, and structural invariants every
    `check_every` ops.  Returns a FuzzSummary; raises FuzzDivergence with
    seed and op index on the first mismatch.
    """
    rng = random.Random(seed)
    meld = variant == "meld"
    pool = [_Group(make_heap(policy, variant))
            for _ in range(POOL_SIZE if meld else 1)]
    for g in pool:
        g.heap.check_method_bounds = True
    oracles = {id(g.heap): OracleHeap() for g in pool}
    groups = {id(g.heap): g for g in pool}
    nodes = []          # (node, group) for live nodes, pruned lazily
    trace = ["newheap"] * (len(pool) - 1)   # heap 0 is implicit
    insert_index = {}   # uid -> 0-based insert order, for trace refs
    heap_index = {id(g.heap): i for i, g in enumerate(pool)}

    weights = [w for name, w in WEIGHTS if meld or name != "meld"]
    names = [name for name, w in WEIGHTS if meld or name != "meld"]
    total_w = sum(weights)
    budget = 0.0        # amortized aggregate step budget (no-meld amortized)
    max_steps_op = 0
    max_steps_dm = 0
    max_size = 0
    started = time.perf_counter()

    amortized_nomeld = policy == AMORTIZED and not meld

    def live_pick():
        while nodes:
            i = rng.randrange(len(nodes))
            node, group = nodes[i]
            if node.alive:
                return node, group.find()
            nodes[i] = nodes[-1]
            nodes.pop()
        return None, None

    def fail(i, msg):
        raise FuzzDivergence(seed, i, msg, trace)

    for i in range(n_ops):
        roll = rng.random() * total_w
        op = names[-1]
        for name, w in zip(names, weights):
            if roll < w:
                op = name
                break
            roll -= w
        g = rng.choice(pool)
        h = g.heap
        o = oracles[id(h)]
        n_before = h.size
        steps_before = h.counters.reduction_steps

        if op == "insert" or (op == "delete_min" and h.size == 0) \
                or (op == "decrease_key" and not nodes):
            key = rng.getrandbits(63) - 2 ** 62
            trace.append("useheap %d" % heap_index[id(h)])
            trace.append("insert %d" % key)
            x = h.insert(key)
            insert_index[x.uid] = len(insert_index)
            o.insert(key, x.uid)
            nodes.append((x, g))
            if amortized_nomeld:
                budget += 3
            op = "insert"
        elif op == "delete_min":
            trace.append("useheap %d" % heap_index[id(h)])
            trace.append("deletemin")
            if amortized_nomeld:
                budget += 2 * max_rank_bound(max(h.size, 1))
            got = h.delete_min()
            want = o.delete_min()
            if got != want:
                fail(i, "delete_min got %r, oracle %r" % (got, want))
        elif op == "decrease_key":
            x, xg = live_pick()
            if x is None:
                continue
            h = xg.heap
            o = oracles[id(h)]
            n_before = h.size
            steps_before = h.counters.reduction_steps
            delta = rng.randrange(1, 2 ** 32)
            key = max(x.key - delta, MIN_KEY)
            trace.append("useheap %d" % heap_index[id(h)])
            trace.append("decreasekey %d %d" % (insert_index[x.uid], key))
            h.decrease_key(x, key)
            o.decrease_key(x.uid, key)
            if amortized_nomeld:
                budget += 8
        else:  # meld
            g2 = rng.choice(pool)
            if g2 is g:
                continue
            h2 = g2.heap
            trace.append("meld %d %d" % (heap_index[id(h)], heap_index[id(h2)]))
            steps_before = h.counters.reduction_steps + h2.counters.reduction_steps
            o2 = oracles.pop(id(h2))
            o1 = oracles.pop(id(h))
            survivor = h.meld(h2)
            loser_group = g2 if survivor is h else g
            merged = o1.meld(o2)
            oracles[id(survivor)] = merged
            loser_group.fused = groups[id(survivor)]
            # keep the pool at full strength with a fresh empty heap
            fresh = make_heap(policy, variant)
            fresh.check_method_bounds = True
            fg = _Group(fresh)
            oracles[id(fresh)] = OracleHeap()
            groups[id(fresh)] = fg
            heap_index[id(fresh)] = len(heap_index)
            trace.append("newheap")
            pool[pool.index(loser_group)] = fg
            h = survivor
            o = merged
            n_before = max(h.size, 1)

        # per-op oracle agreement on the minimum, without a method call
        want = o.find_min()
        got = (h.root.key, h.root.uid) if h.root is not None else None
        if got != want:
            fail(i, "minimum %r, oracle %r" % (got, want))
        if len(o) != max(h.size, 0):
            fail(i, "size %d, oracle %d" % (h.size, len(o)))

        steps = h.counters.reduction_steps - steps_before
        if op == "delete_min":
            max_steps_dm = max(max_steps_dm, steps)
            if step_bounds:
                limit = (6 * max_rank_bound(max(n_before, 1)) + 4 if not meld
                         else 12 * max_rank_bound(2 * max(n_before, 1))
                         + 30 * max_rank_bound(max(n_before, 1)) + 62)
                if steps > limit:
                    fail(i, "delete_min ran %d reduction steps, bound %d"
                         % (steps, limit))
        else:
            max_steps_op = max(max_steps_op, steps)
            if step_bounds and policy == WORSTCASE:
                limit = 48 if meld else 12
                if steps > limit:
                    fail(i, "%s ran %d reduction steps, bound %d"
                         % (op, steps, limit))
        if policy == AMORTIZED:
            if h.ac or h.lc or (meld and h.gc):
                fail(i, "caches nonempty after amortized %s" % op)
        if amortized_nomeld:
            total = pool[0].heap.counters.reduction_steps
            if total > budget:
                fail(i, "aggregate steps %d exceed budget %.0f" % (total, budget))
        max_size = max(max_size, h.size)

        if check_every and (i + 1) % check_every == 0:
            strict = AFTER_AMORTIZED if policy == AMORTIZED else ANY_TIME
            for gr in pool:
                gg = gr.find()
                if gg.heap.size >= 0 and not gg.heap.discarded:
                    report = check_structure(gg.heap, strict)
                    if not report.ok:
                        fail(i, "structure: %s" % report)
            if meld:
                report = check_ownership([gr.find().heap for gr in pool])
                if not report.ok:
                    fail(i, "ownership: %s" % report)

    live = []
    seen_ids = set()
    for gr in pool:
        hh = gr.find().heap
        if id(hh) not in seen_ids:
            seen_ids.add(id(hh))
            live.append(hh)
    cases = {}
    ops_done = {}
    steps_sum = comps = writes = 0
    for hh in live:
        c = hh.counters
        steps_sum += c.reduction_steps
        comps += c.comparisons
        writes += c.nontree_writes
        for k, v in c.cases.items():
            cases[k] = cases.get(k, 0) + v
        for k, v in c.ops.items():
            ops_done[k] = ops_done.get(k, 0) + v
    return FuzzSummary(
        seed=seed, n_ops=n_ops, variant=variant, policy=policy,
        final_size=sum(max(hh.size, 0) for hh in live),
        max_size=max_size,
        reduction_steps=steps_sum, comparisons=comps, nontree_writes=writes,
        cases=cases, ops=ops_done,
        max_steps_per_op=max_steps_op, max_steps_delete_min=max_steps_dm,
        wall_time=time.perf_counter() - started,
        trace=trace,
    )


# Reduction-case rows that the fuzz corpus is expected to exercise.
NOMELD_CASE_ROWS = [
    "ac_stale", "ac_place", "ac_match",
    "lc_stale", "lc_place",
    "lc_one_node:a_placed", "lc_one_node:a_cached", "lc_one_node:l_placed",
    "lc_one_node:lstar_cached", "lc_one_node:n",
    "lc_match:a_placed", "lc_match:a_cached", "lc_match:l_placed",
    "lc_match:lstar_cached", "lc_match:n",
]

MELD_CASE_ROWS = [
    "ac_stale", "ac_place", "ac_match", "ac_match_deferred3",
    "gc_stale", "gc_place", "gc_match",
    "lc_stale", "lc_place",
    "lc_one_node:g_placed", "lc_one_node:g_cached",
    "lc_one_node:a_placed", "lc_one_node:a_cached",
    "lc_one_node:l_placed", "lc_one_node:lstar_cached",
    "lc_one_node:n", "lc_one_node:n_deferred3",
    "lc_match:g_placed", "lc_match:g_cached",
    "lc_match:a_placed", "lc_match:a_cached",
    "lc_match:l_placed", "lc_match:lstar_cached", "lc_match:n",
]
