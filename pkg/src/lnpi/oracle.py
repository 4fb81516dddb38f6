"""Brute-force support oracle.

The definition of support quantifies over all atoms: a is in supp(t)
when infinitely many b satisfy (a b)t != t.  For the values the test
generators build, whether (a b)t != t is eventually periodic in b:
every explicitly stored index is below 12, and the periodic bases a
value combines have moduli whose lcm is at most 30 (single bases are
canonical with modulus <= 6).  Past index 12 the outcome therefore
depends only on b's residue class, and the window 13..63 contains a
full period, so probing it decides the infinite set exactly.  Keeping
candidate atoms below the threshold means b == a never falls inside
the window, so skipping it costs nothing.
"""

from __future__ import annotations

from .atoms import Atom, swap
from .namesets import NameSet
from .permtypes import apply

THRESHOLD = 12
PROBE = 64


def in_supp(a: Atom, t) -> bool:
    """Does the definition put a in supp(t)?"""
    return any(
        b != a.index and apply(swap(a, Atom(b)), t) != t
        for b in range(THRESHOLD + 1, PROBE)
    )


def supp_disagreements(t, computed: NameSet, candidates: int = THRESHOLD) -> list[int]:
    """Indices below `candidates` where the structural supp disagrees
    with the definition; empty means agreement on the window."""
    return [
        i
        for i in range(candidates)
        if computed.member(Atom(i)) != in_supp(Atom(i), t)
    ]
