"""Disjoint-set forest with path halving and union by size."""

from __future__ import annotations


class UnionFind:
    """Disjoint sets over the integers ``0 .. n-1``.

    ``find`` is amortised O(alpha(n)). Set sizes are kept at the roots and
    exposed through :meth:`size`.
    """

    __slots__ = ("parent", "_size", "sets")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self._size = [1] * n
        self.sets = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if already together."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self._size[ra] += self._size[rb]
        self.sets -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def size(self, x: int) -> int:
        return self._size[self.find(x)]

    def labels(self) -> list[int]:
        """Dense component ids, numbered by each set's smallest element."""
        out = [0] * len(self.parent)
        ids: dict[int, int] = {}
        for v in range(len(self.parent)):
            r = self.find(v)
            if r not in ids:
                ids[r] = len(ids)
            out[v] = ids[r]
        return out
