"""The locally nameless interface: opening, closing, local closure.

A locally nameless value implements ``open_at``, ``close_at`` and
``lc_at`` (levels are plain naturals).  Pairs, lists and the containers
from ``permtypes`` are instances pointwise, with no level shift — only
genuine binders (in the process syntax) shift the level.

``lc`` is the everyday decision procedure lc_at(0).  ``lc_cofinite``
decides the inductive definition instead, checking each binder body at a
fresh witness plus a few extra fresh atoms; the two must agree, and that
agreement is a tested property, not an assumption.
"""

from __future__ import annotations

from .atoms import Atom


def open_at(i: int, x: Atom, t):
    """Replace dangling index i by the free atom x."""
    if hasattr(t, "open_at"):
        return t.open_at(i, x)
    if isinstance(t, tuple):
        return tuple(open_at(i, x, e) for e in t)
    if isinstance(t, list):
        return [open_at(i, x, e) for e in t]
    raise TypeError(f"not a locally nameless value: {type(t).__name__}")


def close_at(i: int, x: Atom, t):
    """Replace the free atom x by the bound index i."""
    if hasattr(t, "close_at"):
        return t.close_at(i, x)
    if isinstance(t, tuple):
        return tuple(close_at(i, x, e) for e in t)
    if isinstance(t, list):
        return [close_at(i, x, e) for e in t]
    raise TypeError(f"not a locally nameless value: {type(t).__name__}")


def open0(t, x: Atom):
    return open_at(0, x, t)


def close0(t, x: Atom):
    return close_at(0, x, t)


def lc_at(i: int, t) -> bool:
    """No dangling indices at or above level i."""
    if hasattr(t, "lc_at"):
        return t.lc_at(i)
    if isinstance(t, (tuple, list)):
        return all(lc_at(i, e) for e in t)
    raise TypeError(f"not a locally nameless value: {type(t).__name__}")


def lc(t) -> bool:
    return lc_at(0, t)


def lc_cofinite(t, extra: int = 3) -> bool:
    """Local closure by the inductive binder-by-binder definition."""
    if hasattr(t, "lc_cofinite"):
        return t.lc_cofinite(extra)
    if isinstance(t, (tuple, list)):
        return all(lc_cofinite(e, extra) for e in t)
    from .permtypes import FiniteTermSet, IndexedFamily

    if isinstance(t, IndexedFamily):
        return all(lc_cofinite(e, extra) for e in t.parts())
    if isinstance(t, FiniteTermSet):
        return all(lc_cofinite(e, extra) for e in t.elements)
    raise TypeError(f"not a locally nameless value: {type(t).__name__}")
