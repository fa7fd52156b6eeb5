"""Minimum set cover over small universes encoded as integer bitmasks.

Used by the doubling-constant computation, where each covering instance has
at most a few dozen elements. Sets and the universe are plain Python ints.
"""

from __future__ import annotations


def prune_sets(universe: int, sets: list[int]) -> list[int]:
    """Restrict sets to the universe, drop empties, duplicates and dominated sets."""
    restricted = sorted({s & universe for s in sets if s & universe},
                        key=lambda s: -s.bit_count())
    kept: list[int] = []
    for s in restricted:
        if not any(s & k == s for k in kept):
            kept.append(s)
    return kept


def greedy_cover(universe: int, sets: list[int]) -> list[int]:
    """Classical greedy cover; returns indices into ``sets``.

    Raises ValueError when the sets do not cover the universe.
    """
    uncovered = universe
    chosen = []
    while uncovered:
        best, gain = -1, 0
        for idx, s in enumerate(sets):
            g = (s & uncovered).bit_count()
            if g > gain:
                best, gain = idx, g
        if best < 0:
            raise ValueError("sets do not cover the universe")
        chosen.append(best)
        uncovered &= ~sets[best]
    return chosen


def min_cover_size(universe: int, sets: list[int], upper: int | None = None) -> int:
    """Exact minimum number of sets covering ``universe``.

    Depth-first branch and bound. The greedy solution is the initial
    incumbent; branching is on the uncovered element with the fewest
    covering sets, and nodes are pruned with the ceil(|uncovered| / max
    set size) bound.
    """
    sets = prune_sets(universe, sets)
    if universe == 0:
        return 0
    greedy = len(greedy_cover(universe, sets))
    best = greedy if upper is None else min(upper, greedy)

    covering: dict[int, list[int]] = {}
    bits = universe
    while bits:
        low = bits & -bits
        e = low.bit_length() - 1
        covering[e] = [s for s in sets if s >> e & 1]
        bits ^= low
    max_size = max(s.bit_count() for s in sets)

    def search(uncovered: int, depth: int) -> None:
        nonlocal best
        if uncovered == 0:
            best = min(best, depth)
            return
        if depth + -(-uncovered.bit_count() // max_size) >= best:
            return
        pivot, options = -1, None
        bits = uncovered
        while bits:
            low = bits & -bits
            e = low.bit_length() - 1
            if options is None or len(covering[e]) < len(options):
                pivot, options = e, covering[e]
            bits ^= low
        for s in sorted(options, key=lambda s: -(s & uncovered).bit_count()):
            search(uncovered & ~s, depth + 1)
            if depth + 1 >= best:
                return

    search(universe, 0)
    return best
