"""Canonical partitions of ``{0, ..., k-1}`` in restricted-growth form.

A partition is stored as its restricted-growth string (RGS): position ``i``
carries the label of its block, labels are numbered in order of first
appearance.  Two partitions are equal iff their RGS are equal, so partitions
can be hashed, sorted and used as dictionary keys directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterator, Sequence

MAX_SIZE = 12


class PartitionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Partition:
    rgs: tuple[int, ...]

    def __post_init__(self) -> None:
        top = -1
        for label in self.rgs:
            if not isinstance(label, int) or label < 0 or label > top + 1:
                raise PartitionError(f"not a restricted-growth string: {self.rgs!r}")
            top = max(top, label)

    @classmethod
    def from_labels(cls, labels: Sequence[Hashable]) -> Partition:
        """Canonical partition induced by arbitrary block labels."""
        seen: dict[Hashable, int] = {}
        return cls(tuple(seen.setdefault(x, len(seen)) for x in labels))

    @classmethod
    def parse(cls, text: str) -> Partition:
        text = text.strip().strip("[]")
        if not text:
            return cls(())
        try:
            return cls(tuple(int(x) for x in text.split(",")))
        except ValueError as exc:
            raise PartitionError(f"bad partition text {text!r}") from exc

    @property
    def size(self) -> int:
        return len(self.rgs)

    @property
    def n_blocks(self) -> int:
        return max(self.rgs) + 1 if self.rgs else 0

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for i, label in enumerate(self.rgs):
            out[label].append(i)
        return out

    def together(self, i: int, j: int) -> bool:
        return self.rgs[i] == self.rgs[j]

    def spanning_pairs(self) -> list[tuple[int, int]]:
        """Pairs ``(min(block), j)`` whose equalities generate the partition."""
        return [(b[0], j) for b in self.blocks() for j in b[1:]]

    def coarsens(self, other: Partition) -> bool:
        return coarsens(self, other)

    def meet(self, other: Partition) -> Partition:
        return meet(self, other)

    def merge(self, a: int, b: int) -> Partition:
        """Coarsening obtained by fusing blocks ``a`` and ``b``."""
        lo, hi = min(a, b), max(a, b)
        return Partition.from_labels([lo if x == hi else x for x in self.rgs])

    def __str__(self) -> str:
        return ",".join(map(str, self.rgs))


def _check_sizes(p: Partition, q: Partition) -> None:
    if p.size != q.size:
        raise PartitionError(f"size mismatch: {p.size} vs {q.size}")


def coarsens(p: Partition, q: Partition) -> bool:
    """True iff every block of ``q`` lies inside a block of ``p``."""
    _check_sizes(p, q)
    image: dict[int, int] = {}
    for a, b in zip(q.rgs, p.rgs):
        if image.setdefault(a, b) != b:
            return False
    return True


def meet(p: Partition, q: Partition) -> Partition:
    """Common refinement: ``i`` and ``j`` together iff together in both."""
    _check_sizes(p, q)
    return Partition.from_labels(list(zip(p.rgs, q.rgs)))


def join(p: Partition, q: Partition) -> Partition:
    """Finest common coarsening."""
    _check_sizes(p, q)
    parent = list(range(p.size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (p, q):
        for i, j in part.spanning_pairs():
            parent[find(j)] = find(i)
    return Partition.from_labels([find(i) for i in range(p.size)])


def induced_pattern(p: Partition, index_map: Sequence[int]) -> Partition:
    """Pattern of positions ``index_map`` under ``p``."""
    for i in index_map:
        if not 0 <= i < p.size:
            raise PartitionError(f"index {i} out of range for size {p.size}")
    return Partition.from_labels([p.rgs[i] for i in index_map])


def pattern_of(values: Sequence[Hashable]) -> Partition:
    """Equality pattern of a tuple: positions with equal entries share a block."""
    return Partition.from_labels(values)


@lru_cache(maxsize=None)
def _enumerate(k: int) -> tuple[Partition, ...]:
    out: list[Partition] = []

    def extend(prefix: list[int], top: int) -> None:
        if len(prefix) == k:
            out.append(Partition(tuple(prefix)))
            return
        for label in range(top + 2):
            prefix.append(label)
            extend(prefix, max(top, label))
            prefix.pop()

    extend([], -1)
    return tuple(out)


def all_partitions(k: int, cap: int = MAX_SIZE) -> list[Partition]:
    """All partitions of ``{0..k-1}`` in lexicographic RGS order (Bell(k) many).

    ``k = 0`` yields the single empty partition; this is what sentences compile to.
    """
    if k < 0:
        raise PartitionError("negative size")
    if k > cap:
        raise PartitionError(f"size {k} exceeds enumeration cap {cap}")
    return list(_enumerate(k))


def coarsenings(p: Partition) -> Iterator[Partition]:
    """Every partition coarsening ``p`` (including ``p`` itself)."""
    for q in all_partitions(p.n_blocks):
        yield Partition.from_labels([q.rgs[label] for label in p.rgs])


def extensions(p: Partition) -> list[Partition]:
    """The ways to add one new position: join an existing block or open a fresh one."""
    return [Partition(p.rgs + (label,)) for label in range(p.n_blocks + 1)]


def top(k: int) -> Partition:
    return Partition((0,) * k)


def bottom(k: int) -> Partition:
    return Partition(tuple(range(k)))
