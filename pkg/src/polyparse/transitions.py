"""Arc-hybrid transitions with SWAP, and the static-dynamic training oracle.

Nodes are token indices ``1..n``; the artificial root is node ``0`` and sits
at the end of the buffer.  Gold trees are passed as head lists where
``heads[i]`` is the head of token ``i`` and ``heads[0]`` is a placeholder.

SWAP is decided statically from the projective order of the gold tree.  The
other transitions are supervised with arc-hybrid dynamic-oracle costs.  While
swaps are pending, costs are taken on the configuration the swaps lead to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

ROOT = 0
SHIFT, LEFT, RIGHT, SWAP = "SHIFT", "LEFT-ARC", "RIGHT-ARC", "SWAP"
KINDS = (SHIFT, LEFT, RIGHT, SWAP)
# preference among zero-cost options on the static path
STATIC_PREFERENCE = (LEFT, RIGHT, SHIFT)


class TransitionError(ValueError):
    """A transition was applied or costed where it is not allowed."""


@dataclass(frozen=True)
class Transition:
    kind: str
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transition kind {self.kind!r}")
        if self.kind in (SHIFT, SWAP) and self.label is not None:
            raise ValueError(f"{self.kind} carries no label")

    def __str__(self) -> str:
        return self.kind if self.label is None else f"{self.kind}:{self.label}"


@dataclass
class Configuration:
    stack: list[int]
    buffer: list[int]
    heads: list[int]
    labels: list[str | None] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.heads) - 1

    @property
    def arcs(self) -> set[tuple[int, str | None, int]]:
        return {(h, self.labels[d], d) for d, h in enumerate(self.heads) if d > 0 and h >= 0}

    def is_terminal(self) -> bool:
        return not self.stack and self.buffer == [ROOT]

    def copy(self) -> "Configuration":
        return Configuration(list(self.stack), list(self.buffer), list(self.heads), list(self.labels))

    def key(self) -> tuple:
        return tuple(self.stack), tuple(self.buffer)


def initial_config(n: int) -> Configuration:
    """Start state for a sentence of ``n`` tokens."""
    if n < 1:
        raise TransitionError("cannot parse an empty sentence")
    return Configuration([], list(range(1, n + 1)) + [ROOT], [-1] * (n + 1), [None] * (n + 1))


def legal_transitions(c: Configuration) -> list[str]:
    if c.is_terminal():
        raise TransitionError("no transitions from a terminal configuration")
    out = []
    front = c.buffer[0] if c.buffer else None
    if front is not None and front != ROOT:
        out.append(SHIFT)
    if c.stack and c.buffer:
        out.append(LEFT)
    if len(c.stack) >= 2:
        out.append(RIGHT)
    if c.stack and front is not None and front != ROOT and c.stack[-1] < front:
        out.append(SWAP)
    return out


def _why_illegal(c: Configuration, kind: str) -> str:
    if kind == SHIFT:
        return "SHIFT needs a non-root buffer front"
    if kind == LEFT:
        return "LEFT-ARC needs a non-empty stack"
    if kind == RIGHT:
        return "RIGHT-ARC needs at least two stack items"
    return "SWAP needs a stack top preceding a non-root buffer front in the sentence"


def apply_inplace(c: Configuration, t: Transition) -> None:
    if c.is_terminal() or t.kind not in legal_transitions(c):
        raise TransitionError(f"{t} is illegal here: {_why_illegal(c, t.kind)}")
    if t.kind == SHIFT:
        c.stack.append(c.buffer.pop(0))
    elif t.kind == LEFT:
        dep = c.stack.pop()
        c.heads[dep] = c.buffer[0]
        c.labels[dep] = t.label
    elif t.kind == RIGHT:
        dep = c.stack.pop()
        c.heads[dep] = c.stack[-1]
        c.labels[dep] = t.label
    else:
        c.buffer.insert(1, c.stack.pop())


def apply(c: Configuration, t: Transition) -> Configuration:
    out = c.copy()
    apply_inplace(out, t)
    return out


def max_steps(n: int) -> int:
    """Longest possible legal transition sequence for ``n`` tokens.

    Every pair of tokens can be swapped at most once and each swap costs one
    extra SHIFT, so the length is at most ``2n + 2 * n(n-1)/2 = n(n+1)``.
    The bound is attained.
    """
    return n * (n + 1)


# ---------------------------------------------------------------------------
# oracle


def projective_order(heads: Sequence[int]) -> list[int]:
    """Rank of every node under an in-order traversal of the gold tree.

    Dependents left of their head are visited before it and right dependents
    after, each side in sentence order.  ``ranks[0]`` (the root) is 0, tokens
    get ranks ``1..n``.  The ranks are the identity for projective trees.
    """
    n = len(heads) - 1
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for d in range(1, n + 1):
        children[heads[d]].append(d)
    ranks = [0] * (n + 1)
    counter = 0
    # iterative in-order walk; root has only right dependents
    stack: list[tuple[int, bool]] = [(ROOT, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            if node != ROOT:
                counter += 1
                ranks[node] = counter
            continue
        left = [k for k in children[node] if k < node]
        right = [k for k in children[node] if k > node]
        for k in reversed(right):
            stack.append((k, False))
        stack.append((node, True))
        for k in reversed(left):
            stack.append((k, False))
    return ranks


def dynamic_cost(
    c: Configuration, kind: str, gold_heads: Sequence[int], ranks: Sequence[int] | None = None
) -> int:
    """Gold arcs made unreachable by taking ``kind`` (labels ignored).

    Without ``ranks`` (or when no swap is pending) this is the closed-form
    arc-hybrid cost.  With ``ranks`` and pending swaps the configuration is
    first mapped to the one the swaps will produce, with the buffer in
    projective order and stack items still due to be swapped moved back into
    it, and the cost is the drop in reachable gold arcs there.
    """
    if c.is_terminal() or kind not in legal_transitions(c):
        raise TransitionError(f"{kind} is illegal here: {_why_illegal(c, kind)}")
    if kind == SWAP:
        raise TransitionError("SWAP is decided statically and has no dynamic cost")
    if ranks is not None and _has_pending(c, ranks):
        return _reordered_cost(c, kind, gold_heads, ranks)
    stack, buf = c.stack, c.buffer
    if kind == LEFT:
        s0 = stack[-1]
        cost = sum(1 for d in buf if gold_heads[d] == s0)
        if len(stack) > 1 and gold_heads[s0] == stack[-2]:
            cost += 1
        if gold_heads[s0] in buf[1:]:
            cost += 1
        return cost
    if kind == RIGHT:
        s0 = stack[-1]
        return sum(1 for x in buf if gold_heads[x] == s0 or gold_heads[s0] == x)
    b = buf[0]
    cost = sum(1 for d in stack if gold_heads[d] == b)
    if gold_heads[b] in stack[:-1]:
        cost += 1
    return cost


def _min_buffer_rank(c: Configuration, ranks: Sequence[int]) -> float:
    return min((ranks[x] for x in c.buffer if x != ROOT), default=float("inf"))


def _has_pending(c: Configuration, ranks: Sequence[int]) -> bool:
    """Some stack or buffer item is out of projective order."""
    buf = [ranks[x] for x in c.buffer if x != ROOT]
    if c.stack and buf and ranks[c.stack[-1]] > min(buf):
        return True
    return any(a > b for a, b in zip(buf, buf[1:]))


def _reordered(c: Configuration, ranks: Sequence[int]) -> tuple[list[int], set[int]]:
    m = _min_buffer_rank(c, ranks)
    k = len(c.stack)
    while k > 0 and ranks[c.stack[k - 1]] > m:
        k -= 1
    return c.stack[:k], set(c.stack[k:]) | set(c.buffer)


def _reachable(stack: list[int], buffer: set[int], gold_heads: Sequence[int]) -> int:
    below = {x: stack[i - 1] for i, x in enumerate(stack) if i > 0}
    on_stack = set(stack)
    count = 0
    for d in stack:
        h = gold_heads[d]
        if h in buffer or below.get(d) == h:
            count += 1
    for d in buffer:
        if d != ROOT:
            h = gold_heads[d]
            if h in buffer or h in on_stack:
                count += 1
    return count


def _reordered_cost(c: Configuration, kind: str, gold_heads: Sequence[int], ranks: Sequence[int]) -> int:
    before = _reachable(*_reordered(c, ranks), gold_heads)
    nxt = apply(c, Transition(kind))
    made = 0
    if kind in (LEFT, RIGHT):
        dep = c.stack[-1]
        made = int(nxt.heads[dep] == gold_heads[dep])
    return before - _reachable(*_reordered(nxt, ranks), gold_heads) - made


def swap_due(c: Configuration, ranks: Sequence[int]) -> bool:
    """The static SWAP decision: the stack top belongs after the buffer front."""
    if not c.stack or not c.buffer or c.buffer[0] == ROOT:
        return False
    s0, b = c.stack[-1], c.buffer[0]
    return s0 < b and ranks[s0] > ranks[b]


def oracle_next(
    c: Configuration,
    gold_heads: Sequence[int],
    gold_labels: Sequence[str | None],
    ranks: Sequence[int],
) -> list[Transition]:
    """Optimal next transitions; never empty for reachable configurations."""
    if swap_due(c, ranks):
        return [Transition(SWAP)]
    costs = {k: dynamic_cost(c, k, gold_heads, ranks) for k in legal_transitions(c) if k != SWAP}
    best = min(costs.values())
    out = []
    for kind in STATIC_PREFERENCE:
        if costs.get(kind) == best:
            if kind == SHIFT:
                out.append(Transition(SHIFT))
            else:
                out.append(Transition(kind, gold_labels[c.stack[-1]]))
    return out


def static_sequence(gold_heads: Sequence[int], gold_labels: Sequence[str | None]) -> list[Transition]:
    """Deterministic gold derivation: SWAP when due, else LEFT-ARC > RIGHT-ARC > SHIFT."""
    n = len(gold_heads) - 1
    ranks = projective_order(gold_heads)
    c = initial_config(n)
    seq = []
    while not c.is_terminal():
        t = oracle_next(c, gold_heads, gold_labels, ranks)[0]
        apply_inplace(c, t)
        seq.append(t)
        if len(seq) > max_steps(n):
            raise TransitionError("static oracle failed to terminate")
    return seq


def run(n: int, transitions: Iterable[Transition]) -> Configuration:
    c = initial_config(n)
    for t in transitions:
        apply_inplace(c, t)
    return c


def trace_lines(gold_heads: Sequence[int], gold_labels: Sequence[str | None]) -> list[str]:
    """Oracle trace, one ``step, stack, buffer, transition, cost`` line per step."""
    n = len(gold_heads) - 1
    ranks = projective_order(gold_heads)
    c = initial_config(n)
    lines = []
    step = 0
    while not c.is_terminal():
        t = oracle_next(c, gold_heads, gold_labels, ranks)[0]
        cost = 0 if t.kind == SWAP else dynamic_cost(c, t.kind, gold_heads, ranks)
        stack = " ".join(map(str, c.stack)) or "-"
        buf = " ".join("ROOT" if x == ROOT else str(x) for x in c.buffer)
        lines.append(f"{step}\t{stack}\t{buf}\t{t}\t{cost}")
        apply_inplace(c, t)
        step += 1
    return lines
