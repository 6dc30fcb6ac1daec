"""Bitset backtracking kernel for binary constraint search over graph targets.

This is the package's hot path. The same kernel body runs in two modes:

* jitted with numba ``@njit`` (default), or
* interpreted over the identical numpy arrays when numba is unavailable or
  the environment variable ``LINEHOM_NO_NUMBA`` is set to a non-empty value
  other than ``0``.

Both modes execute the same statements, so outcome kinds, witnesses and node
counts are identical; see ``benchmarks/bench_kernels.py`` for the speed gap.

The search maintains one bitset domain per source variable, assigns variables
in a fixed order, and re-establishes arc consistency after every assignment
(supports checked against the target adjacency bitsets for edge constraints,
singleton elimination for not-equal constraints). Search state lives entirely
in preallocated arrays so a run can be suspended every ``chunk`` assignments,
letting the driver enforce wall-clock limits without giving up deterministic
node accounting.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

_env = os.environ.get("LINEHOM_NO_NUMBA", "").strip()
_DISABLED = _env not in ("", "0")
if not _DISABLED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


ARC_EDGE = 0
ARC_NEQ = 1

RUNNING = 0
FOUND = 1
EXHAUSTED = 2
NODE_LIMIT = 3

ST_DEPTH = 0
ST_TRAIL_LEN = 1
ST_EPOCH = 2
ST_NODES = 3
ST_NODE_LIMIT = 4

CHUNK = 250_000 if NUMBA_ENABLED else 2_500

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S8 = np.uint64(8)
_S16 = np.uint64(16)
_S32 = np.uint64(32)
_L32 = np.uint64(0xFFFFFFFF)
_L16 = np.uint64(0xFFFF)
_L8 = np.uint64(0xFF)
_L4 = np.uint64(0xF)
_L2 = np.uint64(0x3)
_L1 = np.uint64(0x1)


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    x = x + (x >> _S8)
    x = x + (x >> _S16)
    x = x + (x >> _S32)
    return int(x & np.uint64(0x7F))


@njit(cache=True)
def _ctz(x):
    n = 0
    if x & _L32 == _U0:
        n += 32
        x >>= _S32
    if x & _L16 == _U0:
        n += 16
        x >>= _S16
    if x & _L8 == _U0:
        n += 8
        x >>= _S8
    if x & _L4 == _U0:
        n += 4
        x >>= _S4
    if x & _L2 == _U0:
        n += 2
        x >>= _S2
    if x & _L1 == _U0:
        n += 1
    return n


@njit(cache=True)
def _next_member(dom, u, start, n_words):
    """Smallest domain member of u that is >= start, or -1."""
    if start < 0:
        start = 0
    w = start >> 6
    if w >= n_words:
        return -1
    bits = dom[u, w] >> np.uint64(start & 63)
    if bits != _U0:
        return start + _ctz(bits)
    for wi in range(w + 1, n_words):
        if dom[u, wi] != _U0:
            return (wi << 6) + _ctz(dom[u, wi])
    return -1


@njit(cache=True)
def _single_member(dom, u, n_words):
    """The sole member of u's domain, or -1 when the size is not one."""
    found = -1
    for w in range(n_words):
        x = dom[u, w]
        if x == _U0:
            continue
        if found != -1:
            return -1
        if x & (x - _U1) != _U0:
            return -1
        found = (w << 6) + _ctz(x)
    return found


@njit(cache=True)
def _domain_size(dom, u, n_words):
    total = 0
    for w in range(n_words):
        total += _popcount(dom[u, w])
    return total


@njit(cache=True)
def _save_word(dom, stamp, trail_var, trail_word, trail_old, state, epoch, u, w):
    if stamp[u, w] != epoch:
        stamp[u, w] = epoch
        t = state[ST_TRAIL_LEN]
        trail_var[t] = u
        trail_word[t] = w
        trail_old[t] = dom[u, w]
        state[ST_TRAIL_LEN] = t + 1


@njit(cache=True)
def _undo_to(dom, trail_var, trail_word, trail_old, state, mark):
    t = state[ST_TRAIL_LEN]
    while t > mark:
        t -= 1
        dom[trail_var[t], trail_word[t]] = trail_old[t]
    state[ST_TRAIL_LEN] = mark


@njit(cache=True)
def _revise(dom, tgt_adj, n_words, u, v, kind, stamp,
            trail_var, trail_word, trail_old, state, epoch):
    """Prune u's domain against v. Returns 1 changed, 0 unchanged, -1 wiped."""
    changed = False
    if kind == ARC_EDGE:
        for w in range(n_words):
            du = dom[u, w]
            if du == _U0:
                continue
            keep = _U0
            bits = du
            while bits != _U0:
                b = _ctz(bits)
                bit = _U1 << np.uint64(b)
                bits ^= bit
                x = (w << 6) + b
                for wj in range(n_words):
                    if tgt_adj[x, wj] & dom[v, wj] != _U0:
                        keep |= bit
                        break
            if keep != du:
                _save_word(dom, stamp, trail_var, trail_word, trail_old, state, epoch, u, w)
                dom[u, w] = keep
                changed = True
    else:
        y = _single_member(dom, v, n_words)
        if y >= 0:
            w = y >> 6
            bit = _U1 << np.uint64(y & 63)
            if dom[u, w] & bit != _U0:
                _save_word(dom, stamp, trail_var, trail_word, trail_old, state, epoch, u, w)
                dom[u, w] = dom[u, w] & ~bit
                changed = True
    if not changed:
        return 0
    for w in range(n_words):
        if dom[u, w] != _U0:
            return 1
    return -1


@njit(cache=True)
def _propagate(dom, tgt_adj, n_words, arc_u, arc_v, arc_kind,
               watch_ptr, watch_idx, queue, in_queue, stamp,
               trail_var, trail_word, trail_old, state, epoch, seed_var):
    """Arc-consistency fixpoint. ``seed_var < 0`` seeds every arc (root call);
    otherwise only arcs watching the variable whose domain just shrank."""
    n_arcs = arc_u.shape[0]
    cap = n_arcs + 1
    qhead = 0
    qtail = 0
    if seed_var < 0:
        for a in range(n_arcs):
            queue[qtail] = a
            in_queue[a] = 1
            qtail += 1
    else:
        for idx in range(watch_ptr[seed_var], watch_ptr[seed_var + 1]):
            a = watch_idx[idx]
            if in_queue[a] == 0:
                queue[qtail] = a
                in_queue[a] = 1
                qtail = (qtail + 1) % cap
    while qhead != qtail:
        a = queue[qhead]
        qhead = (qhead + 1) % cap
        in_queue[a] = 0
        r = _revise(dom, tgt_adj, n_words, arc_u[a], arc_v[a], arc_kind[a],
                    stamp, trail_var, trail_word, trail_old, state, epoch)
        if r == -1:
            while qhead != qtail:
                in_queue[queue[qhead]] = 0
                qhead = (qhead + 1) % cap
            return False
        if r == 1:
            pruned = arc_u[a]
            cause = arc_v[a]
            for idx in range(watch_ptr[pruned], watch_ptr[pruned + 1]):
                b = watch_idx[idx]
                if arc_u[b] != cause and in_queue[b] == 0:
                    queue[qtail] = b
                    in_queue[b] = 1
                    qtail = (qtail + 1) % cap
    return True


@njit(cache=True)
def _search(dom, tgt_adj, n_words, order, cur_val,
            trail_var, trail_word, trail_old, trail_mark, stamp,
            arc_u, arc_v, arc_kind, watch_ptr, watch_idx, queue, in_queue,
            state, chunk):
    n_src = order.shape[0]
    steps = 0
    while True:
        depth = state[ST_DEPTH]
        if depth == n_src:
            return FOUND
        var = order[depth]
        nxt = _next_member(dom, var, cur_val[depth] + 1, n_words)
        if nxt < 0:
            if depth == 0:
                return EXHAUSTED
            state[ST_DEPTH] = depth - 1
            _undo_to(dom, trail_var, trail_word, trail_old, state, trail_mark[depth - 1])
            continue
        if state[ST_NODES] >= state[ST_NODE_LIMIT]:
            return NODE_LIMIT
        if steps >= chunk:
            return RUNNING
        state[ST_NODES] += 1
        steps += 1
        cur_val[depth] = nxt
        trail_mark[depth] = state[ST_TRAIL_LEN]
        state[ST_EPOCH] += 1
        epoch = state[ST_EPOCH]
        wsel = nxt >> 6
        bsel = _U1 << np.uint64(nxt & 63)
        for w in range(n_words):
            new = bsel if w == wsel else _U0
            if dom[var, w] != new:
                _save_word(dom, stamp, trail_var, trail_word, trail_old, state, epoch, var, w)
                dom[var, w] = new
        ok = _propagate(dom, tgt_adj, n_words, arc_u, arc_v, arc_kind,
                        watch_ptr, watch_idx, queue, in_queue, stamp,
                        trail_var, trail_word, trail_old, state, epoch, var)
        if ok:
            state[ST_DEPTH] = depth + 1
            if depth + 1 < n_src:
                cur_val[depth + 1] = -1
        else:
            _undo_to(dom, trail_var, trail_word, trail_old, state, trail_mark[depth])


# ---------------------------------------------------------------------------
# driver


def pack_bool_matrix(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean (rows, bits) matrix into little-endian uint64 words."""
    rows, bits = mask.shape
    n_words = max(1, (bits + 63) // 64)
    padded = np.zeros((rows, n_words * 64), dtype=bool)
    padded[:, :bits] = mask
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view(np.uint64).copy()


@dataclass
class KernelResult:
    status: str  # "found" | "none" | "node_limit" | "time_limit"
    assignment: np.ndarray | None
    nodes: int


_WARMED = False


def _warm_up() -> None:
    """Trigger jit compilation on a toy instance so it never eats a budget."""
    global _WARMED
    if _WARMED:
        return
    _WARMED = True
    mask = np.ones((2, 2), dtype=bool)
    adj = np.array([[False, True], [True, False]])
    solve_csp(2, adj, [(0, 1, ARC_EDGE)], mask, np.array([0, 1], dtype=np.int32),
              node_limit=16, time_limit=60.0, _warm=False)


def solve_csp(n_tgt: int, tgt_adj_bool: np.ndarray, constraints, allowed: np.ndarray,
              order: np.ndarray, node_limit: int, time_limit: float,
              _warm: bool = True) -> KernelResult:
    """Run the search for one connected block of variables.

    ``constraints`` is an iterable of ``(u, v, kind)`` with u, v variable
    indices; each becomes two directed revision arcs. ``allowed`` is the
    boolean (n_vars, n_tgt) candidate matrix after unary filtering and pins.
    ``order`` is the fixed assignment order. The node limit is exact and
    deterministic; the time limit is checked between chunks of assignments
    and is therefore approximate.
    """
    if _warm:
        _warm_up()
    n_src = allowed.shape[0]
    if n_src == 0:
        return KernelResult("found", np.zeros(0, dtype=np.int64), 0)
    if n_tgt == 0 or not allowed.any(axis=1).all():
        return KernelResult("none", None, 0)

    deadline = time.monotonic() + time_limit
    n_words = max(1, (n_tgt + 63) // 64)
    dom = pack_bool_matrix(allowed)
    tgt_adj = pack_bool_matrix(tgt_adj_bool)

    pairs = [(int(u), int(v), int(k)) for u, v, k in constraints]
    arcs = []
    for u, v, k in pairs:
        arcs.append((u, v, k))
        arcs.append((v, u, k))
    n_arcs = len(arcs)
    arc_u = np.array([a[0] for a in arcs], dtype=np.int32).reshape(n_arcs)
    arc_v = np.array([a[1] for a in arcs], dtype=np.int32).reshape(n_arcs)
    arc_kind = np.array([a[2] for a in arcs], dtype=np.int32).reshape(n_arcs)

    watch_lists: list[list[int]] = [[] for _ in range(n_src)]
    for i, (u, v, k) in enumerate(arcs):
        watch_lists[v].append(i)
    watch_ptr = np.zeros(n_src + 1, dtype=np.int32)
    for v in range(n_src):
        watch_ptr[v + 1] = watch_ptr[v] + len(watch_lists[v])
    watch_idx = np.array([i for lst in watch_lists for i in lst], dtype=np.int32).reshape(
        watch_ptr[-1]
    )

    order = np.asarray(order, dtype=np.int32)
    cur_val = np.full(n_src, -1, dtype=np.int64)
    trail_cap = (n_src + 2) * n_src * n_words + 64
    trail_var = np.zeros(trail_cap, dtype=np.int32)
    trail_word = np.zeros(trail_cap, dtype=np.int32)
    trail_old = np.zeros(trail_cap, dtype=np.uint64)
    trail_mark = np.zeros(n_src + 1, dtype=np.int64)
    stamp = np.full((n_src, n_words), -1, dtype=np.int64)
    queue = np.zeros(n_arcs + 1, dtype=np.int32)
    in_queue = np.zeros(n_arcs + 1, dtype=np.int8)
    state = np.zeros(8, dtype=np.int64)
    state[ST_NODE_LIMIT] = node_limit

    ok = _propagate(dom, tgt_adj, n_words, arc_u, arc_v, arc_kind,
                    watch_ptr, watch_idx, queue, in_queue, stamp,
                    trail_var, trail_word, trail_old, state, 0, -1)
    if not ok:
        return KernelResult("none", None, 0)
    state[ST_TRAIL_LEN] = 0  # root pruning is permanent for this run

    while True:
        status = _search(dom, tgt_adj, n_words, order, cur_val,
                         trail_var, trail_word, trail_old, trail_mark, stamp,
                         arc_u, arc_v, arc_kind, watch_ptr, watch_idx,
                         queue, in_queue, state, CHUNK)
        nodes = int(state[ST_NODES])
        if status == FOUND:
            assignment = np.zeros(n_src, dtype=np.int64)
            for depth in range(n_src):
                assignment[order[depth]] = cur_val[depth]
            return KernelResult("found", assignment, nodes)
        if status == EXHAUSTED:
            return KernelResult("none", None, nodes)
        if status == NODE_LIMIT:
            return KernelResult("node_limit", None, nodes)
        if time.monotonic() > deadline:
            return KernelResult("time_limit", None, nodes)
