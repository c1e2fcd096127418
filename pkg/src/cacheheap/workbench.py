"""Trace execution, benchmarks, and metrics emission.

Trace format: line-oriented ASCII, one op per line, '#' starts a comment.

    insert <key>             insert into the current heap
    deletemin                pop the minimum, print its key
    findmin                  print the minimum key, or "empty"
    decreasekey <ref> <key>  <ref> is the 0-based index of the insert that
                             created the node
    meld <i> <j>             meld heaps i and j (meld variant only); both
                             heap refs are rebound to the survivor
    newheap                  create another heap (heap 0 exists implicitly;
                             refs count up in creation order)
    useheap <i>              make heap i current for the ops above

Identical (trace, variant, policy) runs print identical output.
"""

from __future__ import annotations

import json
import random
import time

from .core import (
    AMORTIZED, WORSTCASE, SIMPLE, POLICIES,
    HeapError, make_heap,
)

VARIANTS = ("nomeld", "meld")


class TraceError(HeapError):
    """Malformed or semantically invalid trace line."""

    def __init__(self, lineno, message):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


METRICS_COLUMNS = [
    "run_id", "variant", "policy",
    "op_insert", "op_delete_min", "op_decrease_key", "op_find_min", "op_meld",
    "comparisons", "links", "reduction_steps", "nontree_writes",
    "degree_steps", "degree_fired", "conversions",
    "wall_time", "n_final",
]


def metrics_row(run_id, variant, policy, counters_snapshot, wall_time, n_final):
    """Assemble one metrics row; unknown case counters ride along sorted."""
    row = {c: 0 for c in METRICS_COLUMNS}
    row["run_id"] = run_id
    row["variant"] = variant
    row["policy"] = policy
    row["wall_time"] = wall_time
    row["n_final"] = n_final
    for k, v in counters_snapshot.items():
        row[k] = v
    return row


def _fmt(value):
    if isinstance(value, float):
        return "%.6g" % value
    return str(value)


def emit_metrics(rows, fmt="csv", path=None):
    """Serialize metrics rows as CSV or JSON lines; returns the text."""
    if fmt == "csv":
        columns = list(METRICS_COLUMNS)
        extra = sorted({k for row in rows for k in row} - set(columns))
        columns += extra
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(c, 0)) for c in columns))
        text = "\n".join(lines) + "\n"
    elif fmt == "json-lines":
        lines = []
        for row in rows:
            out = {k: (float(_fmt(v)) if isinstance(v, float) else v)
                   for k, v in row.items()}
            lines.append(json.dumps(out, sort_keys=True))
        text = "\n".join(lines) + ("\n" if lines else "")
    else:
        raise ValueError("unknown metrics format %r" % (fmt,))
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_trace(lines):
    """Parse trace text lines into (lineno, op, args) triples."""
    ops = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op, args = parts[0], parts[1:]
        try:
            if op == "insert":
                (key,) = args
                ops.append((lineno, "insert", (int(key),)))
            elif op == "deletemin":
                assert not args
                ops.append((lineno, "deletemin", ()))
            elif op == "findmin":
                assert not args
                ops.append((lineno, "findmin", ()))
            elif op == "decreasekey":
                ref, key = args
                ops.append((lineno, "decreasekey", (int(ref), int(key))))
            elif op == "meld":
                a, b = args
                ops.append((lineno, "meld", (int(a), int(b))))
            elif op == "newheap":
                assert not args
                ops.append((lineno, "newheap", ()))
            elif op == "useheap":
                (ref,) = args
                ops.append((lineno, "useheap", (int(ref),)))
            else:
                raise TraceError(lineno, "unknown op %r" % op)
        except (ValueError, AssertionError):
            raise TraceError(lineno, "malformed %r" % line) from None
    return ops


def run_trace(lines, variant="nomeld", policy=AMORTIZED, run_id="trace"):
    """Execute a trace; returns (outputs, metrics_row).

    Outputs hold one string per deletemin/findmin, in order.
    """
    started = time.perf_counter()
    heaps = [make_heap(policy, variant)]
    current = 0
    handles = []
    outputs = []
    records = [heaps[0]]
    for lineno, op, args in parse_trace(lines):
        try:
            if op == "newheap":
                h = make_heap(policy, variant)
                heaps.append(h)
                records.append(h)
            elif op == "useheap":
                (i,) = args
                if not 0 <= i < len(heaps):
                    raise TraceError(lineno, "no heap %d" % i)
                current = i
            elif op == "insert":
                handles.append(heaps[current].insert(args[0]))
            elif op == "deletemin":
                key, _uid = heaps[current].delete_min()
                outputs.append(str(key))
            elif op == "findmin":
                node = heaps[current].find_min()
                outputs.append("empty" if node is None else str(node.key))
            elif op == "decreasekey":
                ref, key = args
                if not 0 <= ref < len(handles):
                    raise TraceError(lineno, "no insert #%d yet" % ref)
                node = handles[ref]
                owner = _live_owner(heaps, node)
                if owner is None:
                    raise TraceError(lineno, "node of insert #%d is gone" % ref)
                owner.decrease_key(node, key)
            elif op == "meld":
                i, j = args
                if variant != "meld":
                    raise TraceError(lineno, "meld unsupported in variant")
                if not (0 <= i < len(heaps) and 0 <= j < len(heaps)):
                    raise TraceError(lineno, "bad heap ref in meld %d %d" % (i, j))
                hi, hj = heaps[i], heaps[j]
                survivor = hi.meld(hj)
                for k, h in enumerate(heaps):
                    if h is hi or h is hj:
                        heaps[k] = survivor
        except TraceError:
            raise
        except HeapError as exc:
            raise TraceError(lineno, str(exc) or exc.__class__.__name__) from exc
    n_final = 0
    from .accounting import OpCounters
    counters = OpCounters()
    seen = set()
    for h in records:
        if id(h) in seen:
            continue
        seen.add(id(h))
        counters.merge(h.counters)
        if h.size > 0:
            n_final += h.size
    row = metrics_row(run_id, variant, policy, counters.snapshot(),
                      time.perf_counter() - started, n_final)
    return outputs, row


def _live_owner(heaps, node):
    # Ownership tracking across melds: walk the owner pointer when melding,
    # otherwise the unique heap of the trace run.
    owner = node.owner
    if owner is not None and owner.size >= 0 and not owner.discarded:
        return owner
    # owner retired: the node now lives in whichever live heap absorbed it
    for h in heaps:
        if h.size >= 0 and not h.discarded and _contains(h, node):
            return h
    return None


def _contains(heap, node):
    x = node
    while x.parent is not None:
        x = x.parent
    r = heap.root
    while r is not None:
        if r is x:
            return True
        r = r.right
    return False


# ---------------------------------------------------------------------------
# Dijkstra benchmark

def random_graph(n_vertices, n_edges, seed):
    """Connected undirected graph with integer weights as adjacency lists."""
    rng = random.Random(seed)
    adj = [[] for _ in range(n_vertices)]

    def add(u, v):
        w = rng.randrange(1, 1_000_000)
        adj[u].append((v, w))
        adj[v].append((u, w))

    for v in range(1, n_vertices):
        add(rng.randrange(v), v)
    for _ in range(max(n_edges - (n_vertices - 1), 0)):
        u = rng.randrange(n_vertices)
        v = rng.randrange(n_vertices)
        if u != v:
            add(u, v)
    return adj


def dijkstra_reference(adj, source=0):
    """Plain lazy-deletion Dijkstra used as the independent oracle."""
    import heapq
    dist = [None] * len(adj)
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if dist[u] is not None:
            continue
        dist[u] = d
        for v, w in adj[u]:
            if dist[v] is None:
                heapq.heappush(heap, (d + w, v))
    return dist


def bench_dijkstra(n_vertices, n_edges, seed, variant="nomeld",
                   policy=AMORTIZED, run_id=None):
    """Dijkstra with decrease-key on the heap under test.

    Returns (metrics_row, checksum); raises on a mismatch with the naive
    reference, whose checksum is recomputed every run.
    """
    adj = random_graph(n_vertices, n_edges, seed)
    started = time.perf_counter()
    heap = make_heap(policy, variant)
    dist = [None] * n_vertices
    handle = {}
    best = {}
    vertex_of = {}
    x = heap.insert(0)
    handle[0] = x
    best[0] = 0
    vertex_of[x.uid] = 0
    while heap.size > 0:
        d, uid = heap.delete_min()
        u = vertex_of.pop(uid)
        del handle[u]
        dist[u] = d
        for v, w in adj[u]:
            if dist[v] is not None:
                continue
            nd = d + w
            node = handle.get(v)
            if node is None:
                node = heap.insert(nd)
                handle[v] = node
                best[v] = nd
                vertex_of[node.uid] = v
            elif nd < best[v]:
                heap.decrease_key(node, nd)
                best[v] = nd
    checksum = sum(d for d in dist if d is not None)
    wall = time.perf_counter() - started
    ref = dijkstra_reference(adj)
    ref_checksum = sum(d for d in ref if d is not None)
    if dist != ref or checksum != ref_checksum:
        raise AssertionError(
            "dijkstra checksum %d disagrees with reference %d (seed %d)"
            % (checksum, ref_checksum, seed))
    rid = run_id or ("dijkstra-%d" % seed)
    row = metrics_row(rid, variant, policy, heap.counters.snapshot(),
                      wall, heap.size)
    return row, checksum
