"""The permutation-type interface: apply a permutation, compute support.

Domain classes implement ``perm_apply``/``support`` themselves; the
module-level ``apply``/``supp`` extend the action pointwise to tuples and
lists and give atoms-free primitives (ints, strings, booleans, None) the
trivial action with empty support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol, TypeVar, runtime_checkable

from .atoms import Atom, Permutation
from .namesets import NameSet, union_all

T = TypeVar("T")


@runtime_checkable
class PermValue(Protocol):
    def perm_apply(self, p: Permutation) -> Any: ...

    def support(self) -> NameSet: ...


def apply(p: Permutation, t):
    """p . t for any permutation value."""
    if hasattr(t, "perm_apply"):
        return t.perm_apply(p)
    if isinstance(t, tuple):
        return tuple(apply(p, x) for x in t)
    if isinstance(t, list):
        return [apply(p, x) for x in t]
    if t is None or isinstance(t, (bool, int, str)):
        return t
    raise TypeError(f"no permutation action for {type(t).__name__}")


def supp(t) -> NameSet:
    if hasattr(t, "support"):
        return t.support()
    if isinstance(t, (tuple, list)):
        return union_all(*(supp(x) for x in t))
    if t is None or isinstance(t, (bool, int, str)):
        return NameSet.empty()
    raise TypeError(f"no support for {type(t).__name__}")


def is_fresh(a: Atom, t) -> bool:
    """a # t."""
    return not supp(t).member(a)


@dataclass(frozen=True)
class IndexedFamily:
    """A map from naturals to values with finite support: an explicit
    prefix of entries and a default for every index past it.

    Trailing entries equal to the default are dropped, so equality of
    families is equality of the functions they denote.
    """

    entries: tuple
    default: Any

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        while entries and entries[-1] == self.default:
            entries = entries[:-1]
        object.__setattr__(self, "entries", entries)

    def get(self, n: int):
        return self.entries[n] if n < len(self.entries) else self.default

    def parts(self) -> tuple:
        return self.entries + (self.default,)

    def perm_apply(self, p: Permutation) -> IndexedFamily:
        return IndexedFamily(tuple(apply(p, e) for e in self.entries), apply(p, self.default))

    def support(self) -> NameSet:
        return union_all(*(supp(x) for x in self.parts()))

    # Pointwise locally nameless structure; indices are not levels here,
    # so there is no shift.
    def open_at(self, i: int, x: Atom) -> IndexedFamily:
        from .binding import open_at

        return IndexedFamily(tuple(open_at(i, x, e) for e in self.entries), open_at(i, x, self.default))

    def close_at(self, i: int, x: Atom) -> IndexedFamily:
        from .binding import close_at

        return IndexedFamily(tuple(close_at(i, x, e) for e in self.entries), close_at(i, x, self.default))

    def lc_at(self, i: int) -> bool:
        from .binding import lc_at

        return all(lc_at(i, e) for e in self.parts())


@dataclass(frozen=True)
class FiniteTermSet:
    """A finite set of permutation values (hashable, canonical, duplicate-free)."""

    elements: frozenset = field(default=frozenset())

    @classmethod
    def of(cls, elems: Iterable) -> FiniteTermSet:
        return cls(frozenset(elems))

    def perm_apply(self, p: Permutation) -> FiniteTermSet:
        return FiniteTermSet(frozenset(apply(p, e) for e in self.elements))

    def support(self) -> NameSet:
        return union_all(*(supp(e) for e in self.elements))

    def open_at(self, i: int, x: Atom) -> FiniteTermSet:
        from .binding import open_at

        return FiniteTermSet(frozenset(open_at(i, x, e) for e in self.elements))

    def close_at(self, i: int, x: Atom) -> FiniteTermSet:
        from .binding import close_at

        return FiniteTermSet(frozenset(close_at(i, x, e) for e in self.elements))

    def lc_at(self, i: int) -> bool:
        from .binding import lc_at

        return all(lc_at(i, e) for e in self.elements)
