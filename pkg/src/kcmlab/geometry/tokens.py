"""The East token game: fewest simultaneous tokens needed to reach distance n."""
from __future__ import annotations

from collections import deque

from ..errors import SizeCap

MAX_N = 24


def _moves(state: int, n: int):
    yield state ^ 1
    for j in range(1, n):
        if state >> (j - 1) & 1:
            yield state ^ (1 << j)


def reachable(n: int, budget: int) -> bool:
    """Whether a token can be placed at n using at most `budget` tokens at any time."""
    target = 1 << (n - 1)
    seen = bytearray(1 << n)
    seen[0] = 1
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for t in _moves(s, n):
            if seen[t] or t.bit_count() > budget:
                continue
            if t & target:
                return True
            seen[t] = 1
            queue.append(t)
    return False


def east_min_tokens(n: int) -> int:
    """Minimum over legal move sequences of the maximum simultaneous token count.

    Breadth-first search over token sets (bit masks of [n]) is run with an
    increasing cap on the token count; the first cap under which some state
    containing n is reachable is the answer.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_N:
        raise SizeCap(f"n = {n} exceeds the BFS cap {MAX_N}")
    for budget in range(1, n + 1):
        if reachable(n, budget):
            return budget
    raise AssertionError("unreachable")  # n tokens always suffice
