"""Seeded random generators for the property suites.

Everything draws from a caller-supplied ``random.Random`` so runs are
reproducible from a single seed.  Atom indices stay small (< 12 for
terms, < 16 for sets) to keep the brute-force support oracle sound; see
``oracle``.
"""

from __future__ import annotations

import random

from .atoms import Atom, Permutation, compose, identity, swap
from .lts import Action, BoundOutput, Config, Input, Output, Tau
from .namesets import NameSet, fresh, union_all
from .permtypes import FiniteTermSet, IndexedFamily
from .pisyntax import Bound, Free, Inp, Nil, Out, Par, Rep, Res, Sum, Term, free_names

ATOM_POOL = 10  # term atoms are drawn from indices 0..9


def rand_atom(rng: random.Random, hi: int = ATOM_POOL) -> Atom:
    return Atom(rng.randrange(hi))


def rand_perm(rng: random.Random, hi: int = ATOM_POOL, max_swaps: int = 4) -> Permutation:
    p = identity()
    for _ in range(rng.randrange(max_swaps + 1)):
        p = compose(swap(rand_atom(rng, hi), rand_atom(rng, hi)), p)
    return p


def rand_nameset(rng: random.Random, hi: int = 16) -> NameSet:
    kind = rng.randrange(4)
    exc = [rng.randrange(hi) for _ in range(rng.randrange(4))]
    if kind == 0:
        return NameSet.finite(Atom(a) for a in exc)
    if kind == 1:
        return NameSet.cofinite(Atom(a) for a in exc)
    modulus = rng.randrange(2, 7)
    residues = frozenset(r for r in range(modulus) if rng.random() < 0.5)
    base = NameSet(modulus, residues)
    for a in exc:
        one = NameSet.finite([Atom(a)])
        base = base.union(one) if rng.random() < 0.5 else base.difference(one)
    return base


def rand_finite_nameset(rng: random.Random, hi: int = 16, size: int = 3) -> NameSet:
    return NameSet.finite(Atom(rng.randrange(hi)) for _ in range(rng.randrange(size + 1)))


def rand_term(rng: random.Random, pool: tuple[Atom, ...] | None = None, depth: int = 3) -> Term:
    """A locally closed term; binders close over a throwaway fresh atom."""
    if pool is None:
        pool = tuple(Atom(i) for i in range(4))
    if depth == 0 or rng.random() < 0.15:
        return Nil()
    # Prefixes and compositions dominate so most terms can actually step.
    match rng.choice("ioopprsm"):
        case "i":
            b = fresh(union_all(NameSet.finite(pool)))
            body = rand_term(rng, pool + (b,), depth - 1)
            return Inp(Free(rng.choice(pool)), body.close_at(0, b))
        case "o":
            return Out(
                Free(rng.choice(pool)),
                Free(rng.choice(pool)),
                rand_term(rng, pool, depth - 1),
            )
        case "p":
            return Par(rand_term(rng, pool, depth - 1), rand_term(rng, pool, depth - 1))
        case "r":
            b = fresh(union_all(NameSet.finite(pool)))
            body = rand_term(rng, pool + (b,), depth - 1)
            return Res(body.close_at(0, b))
        case "s":
            return Rep(rand_term(rng, pool, depth - 1))
        case "m":
            entries = tuple(rand_term(rng, pool, depth - 1) for _ in range(rng.randrange(3)))
            return Sum(IndexedFamily(entries, rand_term(rng, pool, depth - 1)))
    raise AssertionError


def rand_open_term(rng: random.Random, depth: int = 3) -> Term:
    """A term that may dangle indices: some leaves are raw Bound names."""
    t = rand_term(rng, depth=depth)
    if rng.random() < 0.7:
        k = rng.randrange(3)
        t = Par(t, Out(Bound(k), Bound(k), Nil())) if rng.random() < 0.5 else Inp(Bound(k), t)
    return t


def rand_family(rng: random.Random, item, size: int = 3) -> IndexedFamily:
    return IndexedFamily(tuple(item(rng) for _ in range(rng.randrange(size + 1))), item(rng))


def rand_term_set(rng: random.Random, size: int = 3) -> FiniteTermSet:
    return FiniteTermSet.of(rand_term(rng, depth=2) for _ in range(rng.randrange(size + 1)))


def rand_action(rng: random.Random, hi: int = ATOM_POOL) -> Action:
    match rng.randrange(4):
        case 0:
            return Tau()
        case 1:
            return Input(rand_atom(rng, hi), rand_atom(rng, hi))
        case 2:
            return Output(rand_atom(rng, hi), rand_atom(rng, hi))
        case _:
            c = rand_atom(rng, hi)
            return BoundOutput(c, Atom((c.index + 1 + rng.randrange(hi - 1)) % hi if hi > 1 else c.index + 1))


def _comm_pair(rng: random.Random) -> Term:
    """A parallel pair that can communicate, extrude, or both."""
    pool = tuple(Atom(i) for i in range(4))
    c = rng.choice(pool)
    if rng.random() < 0.5:
        b = fresh(NameSet.finite(pool))
        cont = rand_term(rng, pool + (b,), depth=1)
        sender: Term = Res(Out(Free(c), Bound(0), cont).close_at(0, b))
    else:
        sender = Out(Free(c), Free(rng.choice(pool)), rand_term(rng, pool, depth=1))
    b2 = fresh(NameSet.finite(pool))
    receiver = Inp(Free(c), rand_term(rng, pool + (b2,), depth=1).close_at(0, b2))
    left, right = (sender, receiver) if rng.random() < 0.5 else (receiver, sender)
    out = Par(left, right)
    if rng.random() < 0.3:
        out = Par(out, rand_term(rng, pool, depth=1))
    return out


def rand_config(rng: random.Random, depth: int = 3) -> Config:
    """A well-formed configuration; the environment covers the free names
    of the process most of the time, plus a few extras."""
    proc = _comm_pair(rng) if rng.random() < 0.3 else rand_term(rng, depth=depth)
    env = free_names(proc)
    if rng.random() < 0.25 and not env.is_empty():
        kept = [a for a in env.atoms() if rng.random() < 0.5]
        env = NameSet.finite(kept)
    for _ in range(rng.randrange(3)):
        env = env.union(NameSet.finite([rand_atom(rng)]))
    return Config(env, proc)
