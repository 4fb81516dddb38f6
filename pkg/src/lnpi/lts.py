"""Environmental labelled transition system with explicit derivations.

Configurations pair a process with the finite set of channels the
observer knows.  The enumerator returns every transition derivable under
a finite policy (inputs range over the environment plus one canonical
fresh representative; restriction, extrusion and close witnesses are
picked least-fresh) together with a derivation tree that an independent
checker validates node by node.  Cofinite premises are recorded as an
avoid set plus the witness they were derived at; the checker re-derives
them at extra fresh witnesses as equivariance evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .atoms import Atom, Permutation, swap
from .namesets import NameSet, fresh, union_all
from .permtypes import is_fresh
from .pisyntax import (
    Bound,
    Free,
    Inp,
    Nil,
    Out,
    Par,
    Rep,
    Res,
    Sum,
    Term,
    free_names,
    term_atom_list,
    term_from_json,
    term_key,
    term_lc_at,
    term_size,
)


class IllFormedConfig(Exception):
    """Environment not finite, or process not locally closed."""


class ExtrusionClash(Exception):
    """Weakening would add the extruded name to the environment."""


class InternalWitnessClash(Exception):
    """Re-derivation after weakening failed; signals an enumerator bug."""


class NotFreshAtStart(Exception):
    """Trace renaming requires both atoms fresh for the start configuration."""


class NoSuchTransition(Exception):
    def __init__(self, index: int, action):
        super().__init__(f"no enumerated transition matches {action!r} at step {index}")
        self.index = index


@dataclass(frozen=True)
class CheckError(Exception):
    reason: str  # WitnessInL | FreshnessViolated | EnvMismatch | RuleShape
    path: tuple[int, ...]  # premise indices from the root
    message: str

    def __str__(self) -> str:
        where = "/".join(map(str, self.path)) or "root"
        return f"{self.reason} at {where}: {self.message}"


# ------------- actions -------------


class Action:
    def perm_apply(self, p: Permutation) -> Action:
        match self:
            case Tau():
                return self
            case Input(c, n):
                return Input(p(c), p(n))
            case Output(c, n):
                return Output(p(c), p(n))
            case BoundOutput(c, n):
                return BoundOutput(p(c), p(n))
        raise TypeError(f"not an action: {self!r}")

    def support(self) -> NameSet:
        if isinstance(self, Tau):
            return NameSet.empty()
        return NameSet.finite([self.chan, self.name])

    def to_json(self) -> dict:
        match self:
            case Tau():
                return {"tag": "tau"}
            case Input(c, n):
                return {"tag": "in", "c": c.index, "n": n.index}
            case Output(c, n):
                return {"tag": "out", "c": c.index, "n": n.index}
            case BoundOutput(c, n):
                return {"tag": "bout", "c": c.index, "n": n.index}
        raise TypeError(f"not an action: {self!r}")

    def key(self):
        data = self.to_json()
        return (data["tag"], data.get("c", -1), data.get("n", -1))


@dataclass(frozen=True)
class Tau(Action):
    pass


@dataclass(frozen=True)
class Input(Action):
    chan: Atom
    name: Atom


@dataclass(frozen=True)
class Output(Action):
    chan: Atom
    name: Atom


@dataclass(frozen=True)
class BoundOutput(Action):
    chan: Atom
    name: Atom  # the extruded name; never equals the channel


def action_from_json(data: dict) -> Action:
    match data["tag"]:
        case "tau":
            return Tau()
        case "in":
            return Input(Atom(data["c"]), Atom(data["n"]))
        case "out":
            return Output(Atom(data["c"]), Atom(data["n"]))
        case "bout":
            return BoundOutput(Atom(data["c"]), Atom(data["n"]))
    raise ValueError(f"unknown action tag: {data['tag']!r}")


def extr(a: Action) -> NameSet:
    """The names the action turns from bound to free."""
    if isinstance(a, BoundOutput):
        return NameSet.finite([a.name])
    return NameSet.empty()


# ------------- configurations, transitions, derivations -------------


@dataclass(frozen=True)
class Config:
    env: NameSet
    proc: Term

    def perm_apply(self, p: Permutation) -> Config:
        return Config(self.env.perm_apply(p), self.proc.perm_apply(p))

    def support(self) -> NameSet:
        return self.env.union(free_names(self.proc))

    def key(self):
        return (_nameset_key(self.env), term_key(self.proc))

    def to_json(self) -> dict:
        return {"env": self.env.to_json(), "proc": self.proc.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> Config:
        return cls(NameSet.from_json(data["env"]), term_from_json(data["proc"]))


def _nameset_key(s: NameSet):
    return (s.modulus, tuple(sorted(s.residues)), s.exceptions)


@dataclass(frozen=True)
class Transition:
    src: Config
    action: Action
    dst: Config

    def perm_apply(self, p: Permutation) -> Transition:
        return Transition(self.src.perm_apply(p), self.action.perm_apply(p), self.dst.perm_apply(p))

    def support(self) -> NameSet:
        return union_all(self.src.support(), self.action.support(), self.dst.support())

    def key(self):
        return (self.action.key(), self.dst.key())

    def to_json(self) -> dict:
        return {"src": self.src.to_json(), "action": self.action.to_json(), "dst": self.dst.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> Transition:
        return cls(
            Config.from_json(data["src"]),
            action_from_json(data["action"]),
            Config.from_json(data["dst"]),
        )


@dataclass(frozen=True)
class Cofinite:
    avoid: NameSet  # the finite set the quantified name must stay out of
    witness: Atom

    def perm_apply(self, p: Permutation) -> Cofinite:
        return Cofinite(self.avoid.perm_apply(p), p(self.witness))

    def support(self) -> NameSet:
        return self.avoid.union(NameSet.finite([self.witness]))


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Transition
    premises: tuple[Derivation, ...] = ()
    cofinite: Cofinite | None = None
    side: int | Atom | None = None  # Sum: entry index; Open: extruded atom

    def perm_apply(self, p: Permutation) -> Derivation:
        return Derivation(
            self.rule,
            self.conclusion.perm_apply(p),
            tuple(q.perm_apply(p) for q in self.premises),
            self.cofinite.perm_apply(p) if self.cofinite else None,
            p(self.side) if isinstance(self.side, Atom) else self.side,
        )

    def support(self) -> NameSet:
        parts = [self.conclusion.support()]
        parts += [q.support() for q in self.premises]
        if self.cofinite:
            parts.append(self.cofinite.support())
        if isinstance(self.side, Atom):
            parts.append(NameSet.finite([self.side]))
        return union_all(*parts)

    def to_json(self) -> dict:
        side = self.side
        if isinstance(side, Atom):
            side = {"atom": side.index}
        return {
            "rule": self.rule,
            "conclusion": self.conclusion.to_json(),
            "premises": [q.to_json() for q in self.premises],
            "cofinite": (
                {"L": self.cofinite.avoid.to_json(), "witness": self.cofinite.witness.index}
                if self.cofinite
                else None
            ),
            "side": side,
        }

    @classmethod
    def from_json(cls, data: dict) -> Derivation:
        cof = data.get("cofinite")
        side = data.get("side")
        if isinstance(side, dict):
            side = Atom(side["atom"])
        return cls(
            data["rule"],
            Transition.from_json(data["conclusion"]),
            tuple(cls.from_json(q) for q in data["premises"]),
            Cofinite(NameSet.from_json(cof["L"]), Atom(cof["witness"])) if cof else None,
            side,
        )


@dataclass(frozen=True)
class TraceStep:
    action: Action
    config: Config
    deriv: Derivation

    def perm_apply(self, p: Permutation) -> TraceStep:
        return TraceStep(self.action.perm_apply(p), self.config.perm_apply(p), self.deriv.perm_apply(p))


@dataclass(frozen=True)
class Trace:
    start: Config
    steps: tuple[TraceStep, ...] = ()

    def to_json(self) -> dict:
        return {
            "start": self.start.to_json(),
            "steps": [
                {"action": s.action.to_json(), "config": s.config.to_json(), "deriv": s.deriv.to_json()}
                for s in self.steps
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> Trace:
        return cls(
            Config.from_json(data["start"]),
            tuple(
                TraceStep(
                    action_from_json(s["action"]),
                    Config.from_json(s["config"]),
                    Derivation.from_json(s["deriv"]),
                )
                for s in data["steps"]
            ),
        )


@dataclass(frozen=True)
class StepResult:
    results: tuple[tuple[Transition, Derivation], ...]
    complete: bool  # False when fuel cut off a replication unfolding

    def transitions(self) -> list[Transition]:
        return [t for t, _ in self.results]


# ------------- the enumerator -------------


def step(cfg: Config, fuel: int = 8) -> StepResult:
    """All transitions of cfg derivable under the enumeration policy."""
    if not cfg.env.is_finite():
        raise IllFormedConfig("environment must be a finite set")
    if not term_lc_at(0, cfg.proc):
        raise IllFormedConfig("process must be locally closed")
    derivs, complete = _derivs(cfg.env, cfg.proc, fuel, NameSet.empty())
    base = cfg.support()
    pairs = [_canonicalize(d, base) for d in derivs]
    pairs.sort(key=lambda td: (td[1].rule, td[0].key(), json.dumps(td[1].to_json(), sort_keys=True)))
    return StepResult(tuple(pairs), complete)


def _derivs(env: NameSet, proc: Term, fuel: int, avoid: NameSet) -> tuple[list[Derivation], bool]:
    src = Config(env, proc)
    match proc:
        case Nil():
            return [], True

        case Out(Free(c), Free(m), cont):
            if not env.member(c):
                return [], True
            dst = Config(env.union(NameSet.finite([m])), cont)
            return [Derivation("Out", Transition(src, Output(c, m), dst))], True

        case Inp(Free(c), body):
            if not env.member(c):
                return [], True
            rep = fresh(union_all(env, free_names(proc), avoid))
            out = []
            for n in list(env.atoms()) + [rep]:
                dst = Config(env.union(NameSet.finite([n])), body.open_at(0, n))
                out.append(Derivation("Inp", Transition(src, Input(c, n), dst)))
            return out, True

        case Sum(f):
            # Witnesses picked inside one branch must still avoid the other
            # branches: they stay visible in the source of the conclusion.
            sum_avoid = avoid.union(free_names(proc))
            out, complete = [], True
            for k, entry in enumerate(f.parts()):  # default witnessed at index = entry count
                inner, ok = _derivs(env, entry, fuel, sum_avoid)
                complete = complete and ok
                for d in inner:
                    concl = Transition(src, d.conclusion.action, d.conclusion.dst)
                    out.append(Derivation("Sum", concl, (d,), side=k))
            return out, complete

        case Par(left, right):
            return _par_derivs(env, proc, left, right, fuel, avoid)

        case Res(body):
            return _res_derivs(env, proc, body, fuel, avoid)

        case Rep(body):
            if fuel == 0:
                return [], False
            inner, complete = _derivs(env, Par(body, Rep(body)), fuel - 1, avoid)
            out = [
                Derivation("Rep", Transition(src, d.conclusion.action, d.conclusion.dst), (d,))
                for d in inner
            ]
            return out, complete

        case Out() | Inp():  # channel is a dangling index; unreachable from lc configs
            return [], True

    raise TypeError(f"not a term: {proc!r}")


def _par_derivs(env, proc, left, right, fuel, avoid):
    src = Config(env, proc)
    fn_l, fn_r = free_names(left), free_names(right)
    out: list[Derivation] = []

    left_plain, c1 = _derivs(env, left, fuel, avoid.union(fn_r))
    for d in left_plain:
        t = d.conclusion
        dst = Config(t.dst.env, Par(t.dst.proc, right))
        out.append(Derivation("Par-L", Transition(src, t.action, dst), (d,)))
    right_plain, c2 = _derivs(env, right, fuel, avoid.union(fn_l))
    for d in right_plain:
        t = d.conclusion
        dst = Config(t.dst.env, Par(left, t.dst.proc))
        out.append(Derivation("Par-R", Transition(src, t.action, dst), (d,)))

    # Communication premises run with the sibling's free names added to the
    # environment: each component is the other's observer.
    env_l = env.union(fn_r)
    env_r = env.union(fn_l)
    left_comm, c3 = _derivs(env_l, left, fuel, avoid.union(fn_r))
    right_comm, c4 = _derivs(env_r, right, fuel, avoid.union(fn_l))
    complete = c1 and c2 and c3 and c4

    outs_l = [d for d in left_comm if isinstance(d.conclusion.action, Output)]
    outs_r = [d for d in right_comm if isinstance(d.conclusion.action, Output)]
    ins_l = [d for d in left_comm if isinstance(d.conclusion.action, Input)]
    ins_r = [d for d in right_comm if isinstance(d.conclusion.action, Input)]
    bouts_l = [d for d in left_comm if isinstance(d.conclusion.action, BoundOutput)]
    bouts_r = [d for d in right_comm if isinstance(d.conclusion.action, BoundOutput)]

    for do in outs_l:
        for di in ins_r:
            if do.conclusion.action.chan == di.conclusion.action.chan and (
                do.conclusion.action.name == di.conclusion.action.name
            ):
                dst = Config(env, Par(do.conclusion.dst.proc, di.conclusion.dst.proc))
                out.append(Derivation("Comm-L", Transition(src, Tau(), dst), (do, di)))
    for do in outs_r:
        for di in ins_l:
            if do.conclusion.action.chan == di.conclusion.action.chan and (
                do.conclusion.action.name == di.conclusion.action.name
            ):
                dst = Config(env, Par(di.conclusion.dst.proc, do.conclusion.dst.proc))
                out.append(Derivation("Comm-R", Transition(src, Tau(), dst), (di, do)))

    close_avoid = union_all(env, fn_l, fn_r, avoid)
    for do in bouts_l:
        a = do.conclusion.action
        inner, ok = _derivs(env_r.union(NameSet.finite([a.name])), right, fuel,
                            union_all(avoid, fn_l, NameSet.finite([a.name])))
        complete = complete and ok
        for di in inner:
            if di.conclusion.action == Input(a.chan, a.name):
                q = Par(
                    do.conclusion.dst.proc.close_at(0, a.name),
                    di.conclusion.dst.proc.close_at(0, a.name),
                )
                dst = Config(env, Res(q))
                out.append(
                    Derivation("Close-L", Transition(src, Tau(), dst), (do, di),
                               Cofinite(close_avoid, a.name))
                )
    for do in bouts_r:
        a = do.conclusion.action
        inner, ok = _derivs(env_l.union(NameSet.finite([a.name])), left, fuel,
                            union_all(avoid, fn_r, NameSet.finite([a.name])))
        complete = complete and ok
        for di in inner:
            if di.conclusion.action == Input(a.chan, a.name):
                q = Par(
                    di.conclusion.dst.proc.close_at(0, a.name),
                    do.conclusion.dst.proc.close_at(0, a.name),
                )
                dst = Config(env, Res(q))
                out.append(
                    Derivation("Close-R", Transition(src, Tau(), dst), (di, do),
                               Cofinite(close_avoid, a.name))
                )
    return out, complete


def _res_derivs(env, proc, body, fuel, avoid):
    src = Config(env, proc)
    avoid_here = union_all(free_names(proc), env, avoid)
    w = fresh(avoid_here)
    inner, complete = _derivs(env, body.open_at(0, w), fuel, avoid.union(NameSet.finite([w])))
    out = []
    for d in inner:
        t = d.conclusion
        a = t.action
        if isinstance(a, Output) and a.name == w and a.chan != w:
            # The restricted name escapes: the binder is opened, not re-closed.
            out.append(Derivation("Open", Transition(src, BoundOutput(a.chan, w), t.dst), (d,), side=w))
        elif not a.support().member(w) and not t.dst.env.member(w):
            dst = Config(t.dst.env, Res(t.dst.proc.close_at(0, w)))
            out.append(Derivation("Res", Transition(src, a, dst), (d,), Cofinite(avoid_here, w)))
    return out, complete


# ------------- canonical witnesses -------------


def _visible_fresh(t: Transition, base: NameSet) -> list[Atom]:
    seen: list[Atom] = []
    order = []
    a = t.action
    if not isinstance(a, Tau):
        order += [a.chan, a.name]
    order += term_atom_list(t.dst.proc)
    if t.dst.env.is_finite():
        order += list(t.dst.env.atoms())
    for x in order:
        if not base.member(x) and x not in seen:
            seen.append(x)
    return seen


def _fresh_targets(base: NameSet, k: int) -> list[Atom]:
    out: list[Atom] = []
    n = 0
    while len(out) < k:
        if not base.member(Atom(n)):
            out.append(Atom(n))
        n += 1
    return out


def _renaming(sources: list[Atom], targets: list[Atom]) -> Permutation:
    pairs = {s.index: t.index for s, t in zip(sources, targets)}
    extra_src = sorted(set(pairs) - set(pairs.values()))
    extra_tgt = sorted(set(pairs.values()) - set(pairs))
    # Complete the injection to a bijection on its carrier.
    pairs.update(zip(extra_tgt, extra_src))
    return Permutation(tuple(pairs.items()))


def normalize_transition(t: Transition) -> Transition:
    """Rename the fresh atoms visible in the conclusion to least-fresh order."""
    base = t.src.support()
    sources = _visible_fresh(t, base)
    if not sources:
        return t
    targets = _fresh_targets(base, len(sources))
    if sources == targets:
        return t
    return t.perm_apply(_renaming(sources, targets))


def _canonicalize(d: Derivation, base: NameSet) -> tuple[Transition, Derivation]:
    sources = _visible_fresh(d.conclusion, base)
    if sources:
        targets = _fresh_targets(base, len(sources))
        if sources != targets:
            d = d.perm_apply(_renaming(sources, targets))
    return d.conclusion, d


# ------------- the checker -------------


def check(d: Derivation, extra_witnesses: int = 0) -> None:
    """Validate every node; raises CheckError on the first violation."""
    _check(d, extra_witnesses, ())


def _fail(reason: str, path: tuple[int, ...], message: str):
    raise CheckError(reason, path, message)


def _require_config(cfg: Config, path, what: str) -> None:
    if not cfg.env.is_finite():
        _fail("RuleShape", path, f"{what} environment is not finite")
    if not term_lc_at(0, cfg.proc):
        _fail("RuleShape", path, f"{what} process is not locally closed")


def _premise_count(d: Derivation, n: int, path) -> None:
    if len(d.premises) != n:
        _fail("RuleShape", path, f"rule {d.rule} expects {n} premise(s), got {len(d.premises)}")


def _extra_fresh(d: Derivation, k: int) -> list[Atom]:
    taken = d.support()
    out: list[Atom] = []
    n = 0
    while len(out) < k:
        if not taken.member(Atom(n)):
            out.append(Atom(n))
        n += 1
    return out


def _check_cofinite_node(d: Derivation, path) -> tuple[NameSet, Atom]:
    if d.cofinite is None:
        _fail("RuleShape", path, f"rule {d.rule} needs a cofinite witness record")
    w = d.cofinite.witness
    if d.cofinite.avoid.member(w):
        _fail("WitnessInL", path, f"witness {w!r} lies in the avoid set")
    if d.conclusion.support().member(w):
        _fail("FreshnessViolated", path, f"witness {w!r} occurs in the conclusion")
    return d.cofinite.avoid, w


def _check(d: Derivation, extra: int, path: tuple[int, ...]) -> None:
    t = d.conclusion
    _require_config(t.src, path, "source")
    _require_config(t.dst, path, "destination")
    if isinstance(t.action, BoundOutput) and t.action.chan == t.action.name:
        _fail("RuleShape", path, "bound output must extrude a name other than its channel")
    env, proc = t.src.env, t.src.proc

    match d.rule:
        case "Out":
            _premise_count(d, 0, path)
            if not (isinstance(proc, Out) and isinstance(proc.chan, Free) and isinstance(proc.msg, Free)):
                _fail("RuleShape", path, "source process is not a free output prefix")
            c, m = proc.chan.atom, proc.msg.atom
            if t.action != Output(c, m):
                _fail("RuleShape", path, "action does not match the output prefix")
            if not env.member(c):
                _fail("EnvMismatch", path, "output channel unknown to the observer")
            if t.dst.env != env.union(NameSet.finite([m])):
                _fail("EnvMismatch", path, "destination environment must add the emitted name")
            if t.dst.proc != proc.cont:
                _fail("RuleShape", path, "destination process must be the continuation")

        case "Inp":
            _premise_count(d, 0, path)
            if not (isinstance(proc, Inp) and isinstance(proc.chan, Free)):
                _fail("RuleShape", path, "source process is not an input prefix")
            c = proc.chan.atom
            if not isinstance(t.action, Input) or t.action.chan != c:
                _fail("RuleShape", path, "action does not match the input prefix")
            n = t.action.name  # any name: the checker is permissive here
            if not env.member(c):
                _fail("EnvMismatch", path, "input channel unknown to the observer")
            if t.dst.env != env.union(NameSet.finite([n])):
                _fail("EnvMismatch", path, "destination environment must add the received name")
            if t.dst.proc != proc.body.open_at(0, n):
                _fail("RuleShape", path, "destination process must be the body opened with the name")

        case "Sum":
            _premise_count(d, 1, path)
            if not isinstance(proc, Sum):
                _fail("RuleShape", path, "source process is not a sum")
            if not isinstance(d.side, int) or d.side < 0:
                _fail("RuleShape", path, "sum derivation must record its entry index")
            p = d.premises[0].conclusion
            want = Transition(Config(env, proc.procs.get(d.side)), t.action, t.dst)
            if p != want:
                _fail("RuleShape", path, "premise must step the selected branch to the same result")
            _check(d.premises[0], extra, path + (0,))

        case "Par-L" | "Par-R":
            _premise_count(d, 1, path)
            if not isinstance(proc, Par):
                _fail("RuleShape", path, "source process is not a parallel composition")
            mine, other = (proc.left, proc.right) if d.rule == "Par-L" else (proc.right, proc.left)
            p = d.premises[0].conclusion
            if p.src != Config(env, mine):
                _fail("RuleShape", path, "premise must start from the stepping component")
            if p.action != t.action:
                _fail("RuleShape", path, "premise action must match the conclusion")
            if p.dst.env != t.dst.env:
                _fail("EnvMismatch", path, "conclusion environment must come from the premise")
            want = Par(p.dst.proc, other) if d.rule == "Par-L" else Par(other, p.dst.proc)
            if t.dst.proc != want:
                _fail("RuleShape", path, "non-stepping component must be preserved")
            if isinstance(t.action, BoundOutput) and not is_fresh(t.action.name, other):
                _fail("FreshnessViolated", path, "extruded name occurs free in the sibling")
            _check(d.premises[0], extra, path + (0,))

        case "Res":
            if not (isinstance(proc, Res) and isinstance(t.dst.proc, Res)):
                _fail("RuleShape", path, "restriction must step to a restriction")
            _premise_count(d, 1, path)
            avoid, w = _check_cofinite_node(d, path)
            want = Transition(
                Config(env, proc.body.open_at(0, w)),
                t.action,
                Config(t.dst.env, t.dst.proc.body.open_at(0, w)),
            )
            _check_at_witness(d, want, extra, path)

        case "Open":
            _premise_count(d, 1, path)
            if d.cofinite is not None:
                _fail("RuleShape", path, "extrusion is witnessed at one name, not cofinitely")
            if not isinstance(proc, Res):
                _fail("RuleShape", path, "source process is not a restriction")
            if not isinstance(t.action, BoundOutput):
                _fail("RuleShape", path, "extrusion must be a bound output")
            n = t.action.name
            if d.side != n:
                _fail("RuleShape", path, "extruded atom must be recorded as side data")
            if env.member(n):
                _fail("FreshnessViolated", path, "extruded name already known to the observer")
            if not is_fresh(n, proc.body):
                _fail("FreshnessViolated", path, "extruded name occurs free under the binder")
            if t.dst.env != env.union(NameSet.finite([n])):
                _fail("EnvMismatch", path, "destination environment must add the extruded name")
            p = d.premises[0].conclusion
            want = Transition(
                Config(env, proc.body.open_at(0, n)), Output(t.action.chan, n), t.dst
            )
            if p != want:
                _fail("RuleShape", path, "premise must output the opened name to the same result")
            _check(d.premises[0], extra, path + (0,))

        case "Comm-L" | "Comm-R":
            _premise_count(d, 2, path)
            if not isinstance(proc, Par):
                _fail("RuleShape", path, "source process is not a parallel composition")
            if t.action != Tau():
                _fail("RuleShape", path, "communication is silent")
            if t.dst.env != env:
                _fail("EnvMismatch", path, "silent steps leak nothing to the observer")
            pl, pr = d.premises[0].conclusion, d.premises[1].conclusion
            env_l = env.union(free_names(proc.right))
            env_r = env.union(free_names(proc.left))
            if pl.src != Config(env_l, proc.left) or pr.src != Config(env_r, proc.right):
                _fail("EnvMismatch", path, "premises must extend the environment with sibling names")
            sender, receiver = (pl, pr) if d.rule == "Comm-L" else (pr, pl)
            if not isinstance(sender.action, Output) or not isinstance(receiver.action, Input):
                _fail("RuleShape", path, "communication needs one output and one input premise")
            if (sender.action.chan, sender.action.name) != (receiver.action.chan, receiver.action.name):
                _fail("RuleShape", path, "premise actions must agree on channel and name")
            if t.dst.proc != Par(pl.dst.proc, pr.dst.proc):
                _fail("RuleShape", path, "destination must combine both premise results")
            _check(d.premises[0], extra, path + (0,))
            _check(d.premises[1], extra, path + (1,))

        case "Close-L" | "Close-R":
            _premise_count(d, 2, path)
            if not isinstance(proc, Par):
                _fail("RuleShape", path, "source process is not a parallel composition")
            if t.action != Tau():
                _fail("RuleShape", path, "scope-closing communication is silent")
            if t.dst.env != env:
                _fail("EnvMismatch", path, "silent steps leak nothing to the observer")
            avoid, w = _check_cofinite_node(d, path)
            pl, pr = d.premises[0].conclusion, d.premises[1].conclusion
            extruder, receiver = (pl, pr) if d.rule == "Close-L" else (pr, pl)
            ext_proc, recv_proc = (
                (proc.left, proc.right) if d.rule == "Close-L" else (proc.right, proc.left)
            )
            if not isinstance(extruder.action, BoundOutput) or extruder.action.name != w:
                _fail("RuleShape", path, "extruding premise must emit the cofinite witness")
            if receiver.action != Input(extruder.action.chan, w):
                _fail("RuleShape", path, "receiving premise must input the extruded name")
            env_ext = env.union(free_names(recv_proc))
            env_recv = env.union(free_names(ext_proc)).union(NameSet.finite([w]))
            if extruder.src != Config(env_ext, ext_proc):
                _fail("EnvMismatch", path, "extruder premise environment is wrong")
            if receiver.src != Config(env_recv, recv_proc):
                _fail("EnvMismatch", path, "receiver premise environment must already hold the name")
            cl = pl.dst.proc.close_at(0, w)
            cr = pr.dst.proc.close_at(0, w)
            if t.dst.proc != Res(Par(cl, cr)):
                _fail("RuleShape", path, "destination must re-bind the extruded name over both results")
            _check_close_witnesses(d, extra, path)

        case "Rep":
            _premise_count(d, 1, path)
            if not isinstance(proc, Rep):
                _fail("RuleShape", path, "source process is not a replication")
            p = d.premises[0].conclusion
            want = Transition(Config(env, Par(proc.body, Rep(proc.body))), t.action, t.dst)
            if p != want:
                _fail("RuleShape", path, "premise must step one unfolding to the same result")
            _check(d.premises[0], extra, path + (0,))

        case _:
            _fail("RuleShape", path, f"unknown rule {d.rule!r}")


def _check_at_witness(d: Derivation, want: Transition, extra: int, path) -> None:
    # Restriction: the stored premise must match the opened template, and the
    # same must be re-derivable at further fresh witnesses (equivariance
    # evidence for the cofinite quantifier).
    p = d.premises[0]
    if p.conclusion != want:
        _fail("RuleShape", path, "premise does not match the opened conclusion at the witness")
    _check(p, extra, path + (0,))
    w = d.cofinite.witness
    t = d.conclusion
    env, proc = t.src.env, t.src.proc
    for w2 in _extra_fresh(d, extra):
        moved = p.perm_apply(swap(w, w2))
        want2 = Transition(
            Config(env, proc.body.open_at(0, w2)),
            t.action,
            Config(t.dst.env, t.dst.proc.body.open_at(0, w2)),
        )
        if moved.conclusion != want2:
            _fail("FreshnessViolated", path, f"premise is not re-derivable at fresh witness {w2!r}")
        _check(moved, 0, path + (0,))


def _check_close_witnesses(d: Derivation, extra: int, path) -> None:
    _check(d.premises[0], extra, path + (0,))
    _check(d.premises[1], extra, path + (1,))
    w = d.cofinite.witness
    for w2 in _extra_fresh(d, extra):
        sw = swap(w, w2)
        moved = Derivation(
            d.rule,
            d.conclusion,  # fixed: w and w2 are both fresh for it
            tuple(q.perm_apply(sw) for q in d.premises),
            Cofinite(d.cofinite.avoid, w2),
            d.side,
        )
        try:
            _check(moved, 0, path)
        except CheckError as e:
            _fail("FreshnessViolated", path, f"premises not re-derivable at witness {w2!r}: {e}")


# ------------- weakening -------------


def weaken(d: Derivation, extra_env: NameSet, extra_witnesses: int = 1) -> Derivation:
    """Add extra_env to every environment in the derivation.

    Follows the inductive proof: every avoid set grows by extra_env, and
    any cofinite witness that clashes with the new environment is renamed
    to a fresher atom before the environments are extended.
    """
    if not extra_env.is_finite():
        raise ValueError("weakening environment must be finite")
    if not extr(d.conclusion.action).inter(extra_env).is_empty():
        raise ExtrusionClash("the extruded name cannot be already known")
    out = _weaken(d, extra_env)
    try:
        check(out, extra_witnesses)
    except CheckError as e:
        raise InternalWitnessClash(str(e)) from e
    return out


def _weaken(d: Derivation, xe: NameSet) -> Derivation:
    if d.cofinite and xe.member(d.cofinite.witness):
        w = d.cofinite.witness
        w2 = fresh(d.support().union(xe))
        d = d.perm_apply(swap(w, w2))
    t = d.conclusion
    concl = Transition(
        Config(t.src.env.union(xe), t.src.proc), t.action, Config(t.dst.env.union(xe), t.dst.proc)
    )
    cof = Cofinite(d.cofinite.avoid.union(xe), d.cofinite.witness) if d.cofinite else None
    return Derivation(d.rule, concl, tuple(_weaken(p, xe) for p in d.premises), cof, d.side)


# ------------- traces -------------


def replay(start: Config, actions: list[Action], fuel: int = 8) -> Trace:
    """Drive `start` through the listed actions.

    A requested action whose name is fresh for the current configuration
    may match the enumerator's canonical fresh witness up to renaming;
    of several matches the one with the smallest destination wins.
    """
    cfg = start
    steps: list[TraceStep] = []
    for idx, want in enumerate(actions):
        result = step(cfg, fuel)
        cands = [(t, dv) for t, dv in result.results if t.action == want]
        if not cands and isinstance(want, (Input, BoundOutput)):
            base = cfg.support()
            if not base.member(want.name):
                for t, dv in result.results:
                    a = t.action
                    if type(a) is type(want) and a.chan == want.chan and not base.member(a.name):
                        sw = swap(a.name, want.name)
                        t2, dv2 = t.perm_apply(sw), dv.perm_apply(sw)
                        if t2.action == want and t2.src == cfg:
                            cands.append((t2, dv2))
        if not cands:
            raise NoSuchTransition(idx, want)
        t, dv = min(cands, key=lambda td: (term_size(td[0].dst.proc), td[0].key()))
        steps.append(TraceStep(want, t.dst, dv))
        cfg = t.dst
    return Trace(start, tuple(steps))


def rename_trace(t: Trace, n: Atom, m: Atom, extra_witnesses: int = 1) -> Trace:
    if n == m:
        return t
    base = t.start.support()
    if base.member(n) or base.member(m):
        raise NotFreshAtStart(f"{n!r} and {m!r} must both be fresh for the start configuration")
    sw = swap(n, m)
    steps = tuple(s.perm_apply(sw) for s in t.steps)
    for s in steps:
        check(s.deriv, extra_witnesses)
    return Trace(t.start, steps)


# ------------- the freshness counterexample -------------


@dataclass(frozen=True)
class ExtrusionCounterexample:
    config: Config
    transition: Transition
    derivation: Derivation
    atom: Atom  # fresh for the source process, free in the destination


def extrusion_counterexample() -> ExtrusionCounterexample:
    """Refutes "bound output preserves freshness": extrusion turns a fresh
    name into a free one, so the naive convention cannot be an invariant."""
    a0 = Atom(0)
    proc = Res(Out(Free(a0), Bound(0), Out(Bound(0), Bound(0), Nil())))
    cfg = Config(NameSet.finite([a0]), proc)
    for t, dv in step(cfg, 1).results:
        if isinstance(t.action, BoundOutput):
            m = t.action.name
            assert is_fresh(m, proc) and free_names(t.dst.proc).member(m)
            check(dv, 2)
            return ExtrusionCounterexample(cfg, t, dv, m)
    raise AssertionError("extrusion transition not enumerated")
