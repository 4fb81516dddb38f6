"""Randomized property suites.

Four suites back the ``selftest`` command: the permutation-action laws,
the binder axioms with their derived lemmas, the support lemmas with the
brute-force oracle, and the transition-system lemmas.  Each suite takes
a case count and a seed and reports a ``SuiteResult``; failures carry a
short description of the violated law and the offending value.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import gen, oracle
from .atoms import Atom, compose, identity, swap
from .binding import close_at, lc_at, lc_cofinite, open_at
from .lts import (
    BoundOutput,
    Config,
    ExtrusionClash,
    Tau,
    check,
    extr,
    normalize_transition,
    step,
    weaken,
)
from .namesets import NameSet, fresh, union_all
from .permtypes import FiniteTermSet, IndexedFamily, apply, is_fresh, supp
from .pisyntax import Free, Out, Par, Rep, Sum, free_names

MAX_FAILURES = 10


@dataclass
class SuiteResult:
    name: str
    cases: int
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def that(self, cond: bool, label: str) -> None:
        self.checks += 1
        if not cond and len(self.failures) < MAX_FAILURES:
            self.failures.append(label)


# ------------- permutation-action laws -------------


def _law_instances(rng: random.Random):
    yield "atom", gen.rand_atom(rng)
    yield "permutation", gen.rand_perm(rng)
    yield "pair", (gen.rand_atom(rng), gen.rand_nameset(rng))
    yield "list", [gen.rand_atom(rng) for _ in range(rng.randrange(4))]
    yield "nameset", gen.rand_nameset(rng)
    yield "family", gen.rand_family(rng, gen.rand_atom)
    yield "term", gen.rand_term(rng, depth=2)
    yield "action", gen.rand_action(rng)
    yield "config", gen.rand_config(rng, depth=2)


def perm_laws(cases: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    out = SuiteResult("perm-laws", cases)
    for _ in range(cases):
        p1, p2 = gen.rand_perm(rng), gen.rand_perm(rng)
        for label, v in _law_instances(rng):
            out.that(apply(identity(), v) == v, f"{label}: identity action changed {v!r}")
            out.that(
                apply(p1, apply(p2, v)) == apply(compose(p1, p2), v),
                f"{label}: composition law failed on {v!r} with {p1!r}, {p2!r}",
            )
    return out


# ------------- binder axioms -------------


def _min_lc_level(v) -> int:
    for i in range(24):
        if lc_at(i, v):
            return i
    raise AssertionError(f"no dangling bound below level 24 in {v!r}")


def _ln_instances(rng: random.Random):
    term = gen.rand_open_term if rng.random() < 0.5 else gen.rand_term
    yield "term", term(rng, depth=2)
    yield "pair", (term(rng, depth=1), term(rng, depth=1))
    yield "list", tuple(term(rng, depth=1) for _ in range(rng.randrange(3)))
    yield "family", gen.rand_family(rng, lambda r: term(r, depth=1))
    yield "termset", FiniteTermSet.of(term(rng, depth=1) for _ in range(rng.randrange(3)))


def binder_axioms(cases: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    out = SuiteResult("binder-axioms", cases)
    tl1_hits = 0
    for _ in range(cases):
        for label, v in _ln_instances(rng):
            k = _min_lc_level(v)
            x = gen.rand_atom(rng)
            y = gen.rand_atom(rng)
            i = rng.randrange(k + 2)

            out.that(
                lc_at(i, open_at(i, x, v)) == lc_at(i + 1, v),
                f"{label} lcat_open at {i} on {v!r}",
            )
            out.that(lc_cofinite(v) == lc_at(0, v), f"{label} lc_iff_lc_at on {v!r}")

            lo = k + rng.randrange(2)
            hi = lo + rng.randrange(2)
            out.that(open_at(hi, x, v) == v, f"{label} open_id at {lo}<={hi} on {v!r}")
            out.that(
                open_at(hi, x, close_at(hi, x, v)) == v,
                f"{label} open_close at {lo}<={hi} on {v!r}",
            )

            f = fresh(supp(v).union(NameSet.finite([y])))
            out.that(
                is_fresh(f, open_at(i, y, v)),
                f"{label} open_supp: {f!r} captured opening {v!r} with {y!r}",
            )
            out.that(close_at(i, f, v) == v, f"{label} close_id with fresh {f!r} on {v!r}")
            out.that(
                close_at(i, f, open_at(i, f, v)) == v,
                f"{label} close_open with fresh {f!r} on {v!r}",
            )
            out.that(
                is_fresh(x, close_at(i, x, v)),
                f"{label} close_supp: {x!r} still in support after closing {v!r}",
            )

            p = gen.rand_perm(rng)
            out.that(
                apply(p, open_at(i, x, v)) == open_at(i, p(x), apply(p, v)),
                f"{label} open equivariance on {v!r}",
            )
            out.that(
                apply(p, close_at(i, x, v)) == close_at(i, p(x), apply(p, v)),
                f"{label} close equivariance on {v!r}",
            )
            out.that(lc_at(i, apply(p, v)) == lc_at(i, v), f"{label} lc_at equivariance on {v!r}")
            out.that(lc_cofinite(apply(p, v)) == lc_cofinite(v), f"{label} lc equivariance on {v!r}")

            # Renaming invariance: an equivariant predicate cannot tell
            # two fresh atoms apart.
            f2 = fresh(supp(v).union(NameSet.finite([f])))
            out.that(
                lc_cofinite(open_at(0, f, v)) == lc_cofinite(open_at(0, f2, v)),
                f"{label} fresh-renaming invariance of lc on {v!r}",
            )
            out.that(
                lc_at(1, open_at(0, f, v)) == lc_at(1, open_at(0, f2, v)),
                f"{label} fresh-renaming invariance of lc_at(1) on {v!r}",
            )

            # First technical lemma: an index that vanishes under another
            # opening was never there.
            j = (i + 1 + rng.randrange(3)) % 4
            if i != j:
                if open_at(i, x, open_at(j, y, v)) == open_at(j, y, v):
                    tl1_hits += 1
                    out.that(
                        open_at(i, x, v) == v,
                        f"{label} vanishing-index lemma at {i},{j} on {v!r}",
                    )
                z = gen.rand_atom(rng)
                xf = fresh(supp(v).union(NameSet.finite([z])))
                out.that(
                    open_at(i, xf, open_at(j, y, close_at(j, z, v)))
                    == open_at(j, y, close_at(j, z, open_at(i, xf, v))),
                    f"{label} open/close commutation at {i},{j} on {v!r}",
                )
    out.that(tl1_hits > 0, "vanishing-index lemma was never exercised")
    return out


# ------------- support lemmas -------------


def support_lemmas(cases: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    out = SuiteResult("support-lemmas", cases)
    fresh_swap_hits = 0
    for _ in range(cases):
        # Constructor support distributes over fields.
        sub1, sub2 = gen.rand_term(rng, depth=1), gen.rand_term(rng, depth=1)
        a, b = gen.rand_atom(rng), gen.rand_atom(rng)
        out.that(
            free_names(Par(sub1, sub2)) == free_names(sub1).union(free_names(sub2)),
            f"support of a composition is not the union on {sub1!r} | {sub2!r}",
        )
        out.that(
            free_names(Out(Free(a), Free(b), sub1))
            == union_all(NameSet.finite([a, b]), free_names(sub1)),
            "support of an output prefix is not the union of its fields",
        )
        out.that(free_names(Rep(sub1)) == free_names(sub1), "replication changed support")
        fam = IndexedFamily((sub1,), sub2)
        out.that(
            supp(Sum(fam)) == supp(sub1).union(supp(sub2)),
            "support of a sum is not the union of its branches",
        )
        out.that(supp((a, b)) == NameSet.finite([a, b]), "pair support is not the field union")

        # Set union: support is subadditive, exactly additive in the
        # finite case.
        s1, s2 = gen.rand_nameset(rng), gen.rand_nameset(rng)
        out.that(
            s1.union(s2).support().subset_of(s1.support().union(s2.support())),
            f"union support exceeded the component supports on {s1!r}, {s2!r}",
        )
        f1, f2 = gen.rand_finite_nameset(rng), gen.rand_finite_nameset(rng)
        out.that(
            f1.union(f2).support() == f1.support().union(f2.support()),
            f"finite union support is not the union on {f1!r}, {f2!r}",
        )
        ts1, ts2 = gen.rand_term_set(rng), gen.rand_term_set(rng)
        both = FiniteTermSet(ts1.elements | ts2.elements)
        out.that(
            supp(both) == supp(ts1).union(supp(ts2)),
            "finite term-set union support is not the union",
        )

        # Indexed families: the member-support union is contained in the
        # family support, with equality at finite support.
        fam2 = gen.rand_family(rng, lambda r: gen.rand_nameset(r))
        members = union_all(*(supp(x) for x in fam2.parts()))
        out.that(members.subset_of(supp(fam2)), f"member supports escaped the family on {fam2!r}")
        if supp(fam2).is_finite():
            out.that(members == supp(fam2), f"finite family support is not the member union on {fam2!r}")

        # A swap of a fresh atom with a supporting atom must move the value.
        for v in (gen.rand_term(rng, depth=2), gen.rand_nameset(rng), gen.rand_perm(rng)):
            s = supp(v)
            if s.is_empty() or s.complement().is_empty():
                continue
            fa = fresh(s)
            inside = s.enumerate(1)[0]
            fresh_swap_hits += 1
            out.that(
                apply(swap(fa, inside), v) != v,
                f"swapping fresh {fa!r} with supporting {inside!r} fixed {v!r}",
            )

        # Representable support: finite or everything, and any fresh atom
        # forces the finite case.
        for _, v in _law_instances(rng):
            s = supp(v)
            out.that(
                s.is_finite() or s == NameSet.all_atoms(),
                f"support is neither finite nor full on {v!r}",
            )
            if any(not s.member(Atom(k)) for k in range(80)):
                out.that(s.is_finite(), f"a fresh atom exists but support is infinite on {v!r}")

        # Equivariant operations keep support finite, and supp itself is
        # equivariant.
        p = gen.rand_perm(rng)
        t = gen.rand_term(rng, depth=2)
        i = rng.randrange(2)
        out.that(free_names(open_at(i, a, t)).is_finite(), "opening broke finite support")
        out.that(free_names(close_at(i, a, t)).is_finite(), "closing broke finite support")
        out.that(f1.union(f2).support().is_finite(), "finite union broke finite support")
        out.that(f1.inter(s1).support().is_finite(), "intersection with finite broke finite support")
        for _, v in _law_instances(rng):
            out.that(supp(apply(p, v)) == apply(p, supp(v)), f"supp is not equivariant on {v!r}")

        # The structural computation matches the definition sampled over
        # the probe window.
        for v in (
            gen.rand_atom(rng),
            gen.rand_perm(rng),
            gen.rand_term(rng, depth=2),
            gen.rand_nameset(rng, hi=12),
            (gen.rand_atom(rng), gen.rand_nameset(rng, hi=12)),
            gen.rand_family(rng, gen.rand_atom),
        ):
            bad = oracle.supp_disagreements(v, supp(v))
            out.that(not bad, f"supp disagrees with the definition at {bad} on {v!r}")
    out.that(fresh_swap_hits > 0, "fresh-versus-supporting swap was never exercised")
    return out


# ------------- transition-system lemmas -------------


def lts_lemmas(cases: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    out = SuiteResult("lts-lemmas", cases)
    for _ in range(cases):
        cfg = gen.rand_config(rng, depth=3)
        small = step(cfg, 1)
        result = step(cfg, 2)
        for t, d in result.results:
            try:
                check(d, extra_witnesses=3)
            except Exception as e:  # noqa: BLE001 - any failure is a finding
                out.that(False, f"enumerated derivation failed its own check: {e}")
                continue
            out.that(True, "soundness")
            out.that(lc_at(0, t.dst.proc), f"destination not locally closed: {t.dst.proc!r}")
            out.that(lc_cofinite(t.dst.proc), f"destination fails inductive closure: {t.dst.proc!r}")
            out.that(t.dst.env.is_finite(), "destination environment not finite")
            out.that(t.src.env.subset_of(t.dst.env), "environment shrank across a step")
            if isinstance(t.action, Tau):
                out.that(t.dst.env == t.src.env, "a silent step leaked knowledge")
            if isinstance(t.action, BoundOutput):
                n = t.action.name
                out.that(not t.src.env.member(n), f"extruded {n!r} was already known")
                out.that(is_fresh(n, t.src.proc), f"extruded {n!r} was already free in the source")

            xe = gen.rand_finite_nameset(rng)
            if extr(t.action).inter(xe).is_empty():
                wd = weaken(d, xe, extra_witnesses=1)
                out.that(
                    wd.conclusion.src.env == t.src.env.union(xe)
                    and wd.conclusion.dst.env == t.dst.env.union(xe),
                    "weakening did not extend both environments",
                )
            else:
                try:
                    weaken(d, xe, extra_witnesses=1)
                    out.that(False, "weakening over the extruded name was not rejected")
                except ExtrusionClash:
                    out.that(True, "extrusion clash rejected")

        # More fuel only adds transitions; a complete result is stable.
        small_t = set(small.transitions())
        big_t = set(result.transitions())
        out.that(small_t <= big_t, f"raising fuel dropped transitions on {cfg!r}")
        if small.complete:
            out.that(small_t == big_t, f"complete result changed with more fuel on {cfg!r}")

        # Stepping commutes with renaming, up to canonical witnesses.
        p = gen.rand_perm(rng)
        direct = [t for t, _ in step(Config(cfg.env.perm_apply(p), apply(p, cfg.proc)), 2).results]
        mapped = sorted(
            (normalize_transition(t.perm_apply(p)) for t in result.transitions()),
            key=lambda t: t.key(),
        )
        out.that(
            sorted(direct, key=lambda t: t.key()) == mapped,
            f"stepping does not commute with {p!r} on {cfg!r}",
        )
    return out


SUITES = {
    "perm-laws": perm_laws,
    "binder-axioms": binder_axioms,
    "support-lemmas": support_lemmas,
    "lts-lemmas": lts_lemmas,
}


def run_suite(name: str, cases: int, seed: int) -> SuiteResult:
    return SUITES[name](cases, seed)
