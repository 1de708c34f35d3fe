"""LTL to deterministic parity automata.

The pipeline is

    formula --tableau--> generalized Buchi --degeneralize--> Nbw
            --Safra/Piterman trees--> Dpw

Letters are bitmasks over the automaton's own proposition tuple ``ap``;
bit ``k`` set means ``ap[k]`` holds. Parity acceptance is min-even.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .ltl import LassoWord, LtlFormula, Next, Not, Or, Prop, TrueF, Until

DEFAULT_MAX_STATES = 10 ** 6


class AutomatonTooLarge(RuntimeError):
    """Raised when a construction exceeds its state cap."""


def letter_mask(ap: tuple[str, ...], props: Iterable[str]) -> int:
    props = set(props)
    return sum(1 << k for k, p in enumerate(ap) if p in props)


def mask_props(ap: tuple[str, ...], mask: int) -> frozenset[str]:
    return frozenset(p for k, p in enumerate(ap) if mask >> k & 1)


@dataclass(frozen=True)
class Nbw:
    ap: tuple[str, ...]
    n_states: int
    initial: frozenset[int]
    delta: tuple[tuple[frozenset[int], ...], ...]  # delta[q][letter]
    accepting: frozenset[int]

    @property
    def alphabet(self) -> range:
        return range(1 << len(self.ap))

    def post(self, states: Iterable[int], letter: int) -> frozenset[int]:
        out: set[int] = set()
        for q in states:
            out |= self.delta[q][letter]
        return frozenset(out)


@dataclass(frozen=True)
class Dpw:
    ap: tuple[str, ...]
    n_states: int
    initial: int
    delta: tuple[tuple[int, ...], ...]  # delta[q][letter], total
    priority: tuple[int, ...]

    @property
    def alphabet(self) -> range:
        return range(1 << len(self.ap))

    def step(self, q: int, props: Iterable[str]) -> int:
        return self.delta[q][letter_mask(self.ap, props)]

    @property
    def states(self) -> range:
        return range(self.n_states)


# ---------------------------------------------------------------------------
# Tableau construction
#
# Internal formulas are in negation normal form, encoded as tuples:
#   ("t",) ("f",) ("p", name) ("np", name) ("and", a, b) ("or", a, b)
#   ("X", a) ("U", a, b) ("R", a, b)

def _nnf(f: LtlFormula, positive: bool = True) -> tuple:
    if isinstance(f, TrueF):
        return ("t",) if positive else ("f",)
    if isinstance(f, Prop):
        return ("p", f.name) if positive else ("np", f.name)
    if isinstance(f, Not):
        return _nnf(f.arg, not positive)
    if isinstance(f, Or):
        op = "or" if positive else "and"
        return _mk(op, _nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Next):
        inner = _nnf(f.arg, positive)
        return ("X", inner)
    if isinstance(f, Until):
        op = "U" if positive else "R"
        return (op, _nnf(f.left, positive), _nnf(f.right, positive))
    raise TypeError(f)


def _mk(op: str, a: tuple, b: tuple) -> tuple:
    if op == "and":
        if a == ("f",) or b == ("f",):
            return ("f",)
        if a == ("t",):
            return b
        if b == ("t",):
            return a
    else:
        if a == ("t",) or b == ("t",):
            return ("t",)
        if a == ("f",):
            return b
        if b == ("f",):
            return a
    return (op, a, b)


def _untils(g: tuple, acc: set):
    if g[0] == "U":
        acc.add(g)
    for sub in g[1:]:
        if isinstance(sub, tuple):
            _untils(sub, acc)


def _expand(todo: list, pos: frozenset, negs: frozenset, nxt: frozenset, postponed: frozenset, out: list):
    """Enumerate one-step covers of the conjunction ``todo``."""
    if not todo:
        out.append((pos, negs, nxt, postponed))
        return
    g, rest = todo[0], todo[1:]
    kind = g[0]
    if kind == "t":
        _expand(rest, pos, negs, nxt, postponed, out)
    elif kind == "f":
        return
    elif kind == "p":
        if g[1] not in negs:
            _expand(rest, pos | {g[1]}, negs, nxt, postponed, out)
    elif kind == "np":
        if g[1] not in pos:
            _expand(rest, pos, negs | {g[1]}, nxt, postponed, out)
    elif kind == "and":
        _expand([g[1], g[2]] + rest, pos, negs, nxt, postponed, out)
    elif kind == "or":
        _expand([g[1]] + rest, pos, negs, nxt, postponed, out)
        _expand([g[2]] + rest, pos, negs, nxt, postponed, out)
    elif kind == "X":
        n2 = nxt if g[1] == ("t",) else nxt | {g[1]}
        _expand(rest, pos, negs, n2, postponed, out)
    elif kind == "U":
        _expand([g[2]] + rest, pos, negs, nxt, postponed, out)
        _expand([g[1]] + rest, pos, negs, nxt | {g}, postponed | {g}, out)
    elif kind == "R":
        _expand([g[1], g[2]] + rest, pos, negs, nxt, postponed, out)
        _expand([g[2]] + rest, pos, negs, nxt | {g}, postponed, out)
    else:
        raise ValueError(g)


def ltl_to_nbw(f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> Nbw:
    """Tableau translation followed by counter degeneralization.

    The alphabet is 2^AP for the formula's own propositions.
    """
    ap = tuple(sorted(f.props))
    root = _nnf(f)
    acc_sets: set = set()
    _untils(root, acc_sets)
    untils = sorted(acc_sets, key=repr)
    k = len(untils)
    letters = range(1 << len(ap))
    empty = frozenset()

    # generalized automaton: states are obligation sets
    init = frozenset() if root == ("t",) else frozenset([root])
    index = {init: 0}
    order = [init]
    gtrans: list[list[tuple[int, int, int]]] = []  # (letter, target, acc bits)
    i = 0
    while i < len(order):
        obligations = order[i]
        covers: list = []
        _expand(sorted(obligations, key=repr), empty, empty, empty, empty, covers)
        edges = []
        for pos, negs, nxt, postponed in covers:
            pm = letter_mask(ap, pos)
            nm = letter_mask(ap, negs)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                if len(order) > max_states:
                    raise AutomatonTooLarge(f"tableau exceeds {max_states} states")
            acc = sum(1 << j for j, u in enumerate(untils) if u not in postponed)
            for letter in letters:
                if letter & pm == pm and letter & nm == 0:
                    edges.append((letter, index[nxt], acc))
        gtrans.append(edges)
        i += 1

    # degeneralize: state (g, level), accepting iff level == k
    full = (1 << k) - 1

    def advance(level: int, acc: int) -> int:
        j = 0 if level == k else level
        while j < k and acc >> j & 1:
            j += 1
        return j

    nindex = {(0, 0): 0}
    norder = [(0, 0)]
    ndelta: list[list[set]] = []
    i = 0
    while i < len(norder):
        g, level = norder[i]
        row = [set() for _ in letters]
        for letter, tgt, acc in gtrans[g]:
            key = (tgt, advance(level, acc & full))
            if key not in nindex:
                nindex[key] = len(norder)
                norder.append(key)
                if len(norder) > max_states:
                    raise AutomatonTooLarge(f"Buchi automaton exceeds {max_states} states")
            row[letter].add(nindex[key])
        ndelta.append(row)
        i += 1
    accepting = frozenset(q for q, (_, level) in enumerate(norder) if level == k)
    nbw = Nbw(ap, len(norder), frozenset([0]),
              tuple(tuple(frozenset(s) for s in row) for row in ndelta), accepting)
    return _prune_nbw(nbw)


def _prune_nbw(a: Nbw) -> Nbw:
    """Drop states that cannot reach an accepting cycle."""
    succ = [set().union(*row) if row else set() for row in a.delta]
    sccs = strongly_connected(range(a.n_states), lambda q: succ[q])
    good: set[int] = set()
    for comp in sccs:
        cs = set(comp)
        nontrivial = len(comp) > 1 or comp[0] in succ[comp[0]]
        if nontrivial and cs & a.accepting:
            good |= cs
    pred: list[set] = [set() for _ in range(a.n_states)]
    for q in range(a.n_states):
        for r in succ[q]:
            pred[r].add(q)
    live = set(good)
    stack = list(good)
    while stack:
        r = stack.pop()
        for q in pred[r]:
            if q not in live:
                live.add(q)
                stack.append(q)
    keep = sorted(live)
    remap = {q: i for i, q in enumerate(keep)}
    delta = tuple(
        tuple(frozenset(remap[r] for r in a.delta[q][letter] if r in remap) for letter in a.alphabet)
        for q in keep
    )
    return Nbw(a.ap, len(keep), frozenset(remap[q] for q in a.initial if q in remap),
               delta, frozenset(remap[q] for q in a.accepting if q in remap))


def strongly_connected(nodes: Iterable[int], succ) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(succ(root))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(succ(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


# ---------------------------------------------------------------------------
# Determinization with compact Safra trees (Piterman's naming discipline)
#
# A tree is a tuple of nodes (name, label, children) with children ordered
# oldest first. Names are kept contiguous 1..m, so a name only changes when a
# smaller name is removed.

def _tree_step(tree, letter: int, a: Nbw):
    """One Safra step; returns (new tree or None, min removed name, min marked name)."""
    removed: list[int] = []
    marked: list[int] = []
    acc = a.accepting

    names = []
    _collect_names(tree, names)
    next_name = [max(names) + 1]

    def move(node):
        name, label, kids = node
        new_label = a.post(label, letter)
        new_kids = [move(c) for c in kids]
        hit = new_label & acc
        if hit:
            new_kids.append([next_name[0], hit, []])
            next_name[0] += 1
        return [name, new_label, new_kids]

    root = move(tree)

    def merge(node, blocked):
        node[1] = node[1] - blocked
        used = set(blocked)
        kept = []
        for c in node[2]:
            c[1] = c[1] & node[1]
            merge(c, frozenset(used))
            used |= c[1]
        node[2] = kept_nonempty(node[2])
        return node

    def kept_nonempty(kids):
        out = []
        for c in kids:
            if c[1]:
                out.append(c)
            else:
                _collect_names_list(c, removed)
        return out

    merge(root, frozenset())
    if not root[1]:
        return None, 1, None

    def collapse(node):
        if node[2]:
            union = frozenset().union(*(c[1] for c in node[2]))
            if union == node[1]:
                for c in node[2]:
                    _collect_names_list(c, removed)
                node[2] = []
                marked.append(node[0])
                return
            for c in node[2]:
                collapse(c)

    collapse(root)

    live = []
    _collect_names_list(root, live)
    rename = {old: i + 1 for i, old in enumerate(sorted(live))}
    # fresh nodes removed in the same step never held a name in the old tree
    old_names = set(names)
    e = min((r for r in removed if r in old_names), default=None)
    f = min(marked, default=None)

    def freeze(node):
        return (rename[node[0]], frozenset(node[1]), tuple(freeze(c) for c in node[2]))

    return freeze(root), e, f


def _collect_names(tree, out: list):
    out.append(tree[0])
    for c in tree[2]:
        _collect_names(c, out)


def _collect_names_list(node, out: list):
    out.append(node[0])
    for c in node[2]:
        _collect_names_list(c, out)


def determinize_to_dpw(a: Nbw, max_states: int = DEFAULT_MAX_STATES) -> Dpw:
    """Safra/Piterman determinization of a Buchi automaton.

    DPW states are pairs (tree, priority of the step that produced it). A step
    whose lowest event is the mark of node ``f`` emits ``2f``; one whose lowest
    event is the removal (or renaming) of node ``e`` emits ``2e - 1``; a quiet
    step emits the largest odd priority.
    """
    n = max(a.n_states, 1)
    quiet = 2 * n + 1
    letters = list(a.alphabet)
    init_tree = (1, a.initial, ()) if a.initial else None

    index = {(init_tree, quiet): 0}
    order = [(init_tree, quiet)]
    delta: list[list[int]] = []
    cache: dict = {}
    i = 0
    while i < len(order):
        tree, _ = order[i]
        row = []
        for letter in letters:
            if tree is None:
                key = (None, quiet)
            else:
                ck = (tree, letter)
                if ck not in cache:
                    new, e, f = _tree_step(tree, letter, a)
                    if new is None:
                        cache[ck] = (None, quiet)
                    elif f is not None and (e is None or f < e):
                        cache[ck] = (new, 2 * f)
                    elif e is not None:
                        cache[ck] = (new, 2 * e - 1)
                    else:
                        cache[ck] = (new, quiet)
                key = cache[ck]
            if key not in index:
                index[key] = len(order)
                order.append(key)
                if len(order) > max_states:
                    raise AutomatonTooLarge(f"parity automaton exceeds {max_states} states")
            row.append(index[key])
        delta.append(row)
        i += 1
    prio = [p for _, p in order]
    return _normalize(Dpw(a.ap, len(order), 0, tuple(tuple(r) for r in delta), tuple(prio)))


def compress_priorities(prios: Iterable[int]) -> dict[int, int]:
    """Monotone, parity-preserving map onto the smallest possible range."""
    mapping: dict[int, int] = {}
    current = None
    for p in sorted(set(prios)):
        if current is None:
            current = p % 2
        elif current % 2 != p % 2:
            current += 1
        mapping[p] = current
    return mapping


def _normalize(d: Dpw) -> Dpw:
    m = compress_priorities(d.priority)
    return Dpw(d.ap, d.n_states, d.initial, d.delta, tuple(m[p] for p in d.priority))


def _renumber(d: Dpw, rep: list[int]) -> Dpw:
    """Quotient by ``rep`` (state -> representative), keeping reachable classes in BFS order."""
    start = rep[d.initial]
    index = {start: 0}
    order = [start]
    rows = []
    i = 0
    while i < len(order):
        q = order[i]
        row = []
        for t in d.delta[q]:
            t = rep[t]
            if t not in index:
                index[t] = len(order)
                order.append(t)
            row.append(index[t])
        rows.append(tuple(row))
        i += 1
    return Dpw(d.ap, len(order), 0, tuple(rows), tuple(d.priority[q] for q in order))


def _bisimulation_quotient(d: Dpw) -> Dpw:
    block = list(d.priority)
    count = len(set(block))
    while True:
        ids: dict = {}
        new = [ids.setdefault((block[q], tuple(block[t] for t in d.delta[q])), len(ids)) for q in d.states]
        if len(ids) == count:
            break
        block, count = new, len(ids)
    first: dict[int, int] = {}
    for q in d.states:
        first.setdefault(block[q], q)
    return _renumber(d, [first[block[q]] for q in d.states])


def _merge_transient(d: Dpw) -> Dpw:
    """Redirect states visited at most once to a state with the same successors.

    Such a state's own priority never matters, and no new cycle can arise:
    a path between two states with equal rows would put both on a cycle.
    """
    cyclic = set()
    for comp in strongly_connected(d.states, lambda q: set(d.delta[q])):
        if len(comp) > 1 or comp[0] in d.delta[comp[0]]:
            cyclic.update(comp)
    groups: dict[tuple, list[int]] = {}
    for q in d.states:
        groups.setdefault(d.delta[q], []).append(q)
    rep = list(d.states)
    for members in groups.values():
        keep = next((q for q in members if q in cyclic), members[0])
        for q in members:
            if q not in cyclic:
                rep[q] = keep
    return _renumber(d, rep)


def reduce_dpw(d: Dpw) -> Dpw:
    """Language-preserving state reduction (not a full minimization)."""
    while True:
        smaller = _merge_transient(_bisimulation_quotient(d))
        if smaller.n_states == d.n_states:
            return _normalize(smaller)
        d = smaller


@lru_cache(maxsize=4096)
def _ltl_to_dpw_cached(f: LtlFormula, max_states: int) -> Dpw:
    return reduce_dpw(determinize_to_dpw(ltl_to_nbw(f, max_states), max_states))


def ltl_to_dpw(f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> Dpw:
    return _ltl_to_dpw_cached(f, max_states)


def complement_dpw(d: Dpw) -> Dpw:
    """Same automaton with every priority shifted by one."""
    return Dpw(d.ap, d.n_states, d.initial, d.delta, tuple(p + 1 for p in d.priority))


def dpw_accepts_lasso(d: Dpw, w: LassoWord) -> bool:
    q = d.initial
    for letter in w.prefix:
        q = d.step(q, letter)
    # iterate over (state, cycle position) until a pair repeats
    seen: dict[tuple[int, int], int] = {}
    trail: list[int] = []
    pos = 0
    while (q, pos) not in seen:
        seen[(q, pos)] = len(trail)
        trail.append(q)
        q = d.step(q, w.cycle[pos])
        pos = (pos + 1) % len(w.cycle)
    loop = trail[seen[(q, pos)]:]
    return min(d.priority[s] for s in loop) % 2 == 0


def dpw_to_hoa(d: Dpw, name: str = "") -> str:
    """Render in the Hanoi Omega-Automata format (state-based min-even parity)."""
    top = max(d.priority) if d.priority else 0
    n_sets = top + 1

    def acc(k: int) -> str:
        if k == top:
            return f"Inf({k})" if k % 2 == 0 else f"Fin({k})"
        inner = acc(k + 1)
        if k % 2 == 0:
            return f"Inf({k}) | ({inner})"
        return f"Fin({k}) & ({inner})"

    lines = [
        "HOA: v1",
        f'name: "{name}"' if name else None,
        f"States: {d.n_states}",
        f"Start: {d.initial}",
        f"AP: {len(d.ap)}" + "".join(f' "{p}"' for p in d.ap),
        f"acc-name: parity min even {n_sets}",
        f"Acceptance: {n_sets} {acc(0)}",
        "properties: deterministic complete state-acc",
        "--BODY--",
    ]
    lines = [x for x in lines if x is not None]
    for q in d.states:
        lines.append(f"State: {q} {{{d.priority[q]}}}")
        for letter in d.alphabet:
            if d.ap:
                lab = "&".join(str(k) if letter >> k & 1 else f"!{k}" for k in range(len(d.ap)))
            else:
                lab = "t"
            lines.append(f"[{lab}] {d.delta[q][letter]}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
