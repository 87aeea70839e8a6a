"""Independent reference implementations used to cross-check the package.

Nothing here imports ``fourslot``: the transition relation is transcribed
afresh over a nested-tuple state, explored depth-first, and the
linearizability oracle enumerates merges of the two threads' operations.
"""

from itertools import combinations

_W = ("a-2", "a-1", "a", "a+1", "a+2")
_R = ("b-3", "b-2", "b-1", "b", "b+1")
NO_STAMP = -1

# state: (wpc, rpc, wp, wi, rp, ri, r, l, LI, D, wtm, rtm, y, rounds)
#   LI = ((val0, tm0), (val1, tm1)); D = ((tm00, tm01), (tm10, tm11))


def initial(stamped):
    if stamped:
        li = ((0, 0), (0, 1))
        d = ((0, NO_STAMP), (1, NO_STAMP))
        rtm = 0
    else:
        li = ((0, NO_STAMP), (0, NO_STAMP))
        d = ((NO_STAMP, NO_STAMP), (NO_STAMP, NO_STAMP))
        rtm = NO_STAMP
    return (0, 0, 1, 0, 0, 0, 0, 1, li, d, 1, rtm, NO_STAMP, 0)


def _set(tup, k, v):
    return tup[:k] + (v,) + tup[k + 1:]


def writer_step(st, stamped, bound, mutation=None):
    wpc, rpc, wp, wi, rp, ri, r, l, li, d, wtm, rtm, y, rounds = st
    here = _W[wpc]
    if mutation == "swap-a+1-a+2" and here in ("a+1", "a+2"):
        here = "a+2" if here == "a+1" else "a+1"
    if here == "a-2":
        if wtm >= bound + 1:
            return None
        wtm, wp = wtm + 1, 1 - r
    elif here == "a-1":
        wi = 1 - li[wp][0]
    elif here == "a":
        if stamped:
            d = _set(d, wp, _set(d[wp], wi, wtm))
    elif here == "a+1":
        li = _set(li, wp, (wi, wtm if stamped else NO_STAMP))
    else:
        l = wp
    return ((wpc + 1) % 5, rpc, wp, wi, rp, ri, r, l, li, d, wtm, rtm, y, rounds)


def reader_step(st, stamped, bound, mutation=None):
    wpc, rpc, wp, wi, rp, ri, r, l, li, d, wtm, rtm, y, rounds = st
    here = _R[rpc]
    if here == "b-3":
        if rounds >= bound:
            return None
        rounds += 1
        if mutation == "swap-b-3-b-2":
            r = rp
        else:
            rp = l
    elif here == "b-2":
        if mutation == "swap-b-3-b-2":
            rp = l
        elif mutation != "drop-b-2":
            r = rp
    elif here == "b-1":
        ri = li[rp][0]
        if stamped:
            rtm = li[rp][1]
    elif here == "b":
        if stamped:
            rtm = y = d[rp][ri]
    return (wpc, (rpc + 1) % 5, wp, wi, rp, ri, r, l, li, d, wtm, rtm, y, rounds)


def reachable(stamped, bound, mutation=None):
    """Depth-first reachability; returns (state set, transition count)."""
    start = initial(stamped)
    seen = {start}
    stack = [start]
    edges = 0
    while stack:
        st = stack.pop()
        for step in (writer_step, reader_step):
            nxt = step(st, stamped, bound, mutation)
            if nxt is None:
                continue
            edges += 1
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen, edges


def as_fields(st):
    """The oracle state in the package's field naming, as a plain dict."""
    wpc, rpc, wp, wi, rp, ri, r, l, li, d, wtm, rtm, y, rounds = st
    return {
        "alpha": _W[wpc], "beta": _R[rpc], "wp": wp, "wi": wi, "rp": rp, "ri": ri,
        "reading": r, "latest": l, "li0": li[0][0], "li1": li[1][0],
        "lt0": li[0][1], "lt1": li[1][1], "d00": d[0][0], "d01": d[0][1],
        "d10": d[1][0], "d11": d[1][1], "wtm": wtm, "rtm": rtm, "y": y, "rround": rounds,
    }


# -- linearizability -----------------------------------------------------------

def linearizable(writes, reads, initial_value):
    """Brute-force atomicity check for one writer and one reader.

    ``writes``/``reads`` are lists of ``(invoke, ret, value)`` in program
    order.  Every merge of the two sequences is tried; a merge is a valid
    linearization when it respects real-time order and each read returns
    the value of the latest write before it.
    """
    n, m = len(writes), len(reads)
    for write_slots in combinations(range(n + m), n):
        order, wi, ri = [], 0, 0
        chosen = set(write_slots)
        for pos in range(n + m):
            if pos in chosen:
                order.append(("w", writes[wi]))
                wi += 1
            else:
                order.append(("r", reads[ri]))
                ri += 1
        if _legal(order, initial_value):
            return True
    return False


def _legal(order, initial_value):
    # real time: nothing placed later may have returned before an earlier op was invoked
    for i, (_, a) in enumerate(order):
        for _, b in order[i + 1:]:
            if b[1] < a[0]:
                return False
    value = initial_value
    for kind, op in order:
        if kind == "w":
            value = op[2]
        elif op[2] != value:
            return False
    return True
