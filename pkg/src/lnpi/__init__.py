"""Locally nameless pi-calculus with an environmental transition system.

Names are atoms, binders are de Bruijn indices, and every data type
carries a permutation action with computable support.  The ``lts``
module enumerates observer-indexed transitions with checkable
derivation trees; the ``cli`` module wraps everything for the shell.
"""

from .atoms import Atom, Permutation, compose, identity, swap
from .binding import close0, close_at, lc, lc_at, lc_cofinite, open0, open_at
from .lts import (
    Action,
    BoundOutput,
    CheckError,
    Config,
    Derivation,
    ExtrusionClash,
    IllFormedConfig,
    Input,
    NoSuchTransition,
    NotFreshAtStart,
    Output,
    StepResult,
    Tau,
    Trace,
    Transition,
    check,
    extr,
    extrusion_counterexample,
    rename_trace,
    replay,
    step,
    weaken,
)
from .namesets import AllNamesAvoided, Exhausted, NameSet, fresh, supp_of_set, union_all
from .parsing import ParseError, parse, print_term, render_nameset
from .permtypes import FiniteTermSet, IndexedFamily, PermValue, apply, is_fresh, supp
from .pisyntax import (
    Bound,
    Free,
    Inp,
    Name,
    Nil,
    Out,
    Par,
    Rep,
    Res,
    Sum,
    Term,
    free_names,
    par_factors,
    term_lc,
    term_size,
)

__all__ = [
    "Action",
    "AllNamesAvoided",
    "Atom",
    "Bound",
    "BoundOutput",
    "CheckError",
    "Config",
    "Derivation",
    "Exhausted",
    "ExtrusionClash",
    "FiniteTermSet",
    "Free",
    "IllFormedConfig",
    "IndexedFamily",
    "Inp",
    "Input",
    "Name",
    "NameSet",
    "Nil",
    "NoSuchTransition",
    "NotFreshAtStart",
    "Out",
    "Output",
    "Par",
    "ParseError",
    "PermValue",
    "Permutation",
    "Rep",
    "Res",
    "StepResult",
    "Sum",
    "Tau",
    "Term",
    "Trace",
    "Transition",
    "apply",
    "check",
    "close0",
    "close_at",
    "compose",
    "extr",
    "extrusion_counterexample",
    "free_names",
    "fresh",
    "identity",
    "is_fresh",
    "lc",
    "lc_at",
    "lc_cofinite",
    "open0",
    "open_at",
    "par_factors",
    "parse",
    "print_term",
    "rename_trace",
    "render_nameset",
    "replay",
    "step",
    "supp",
    "supp_of_set",
    "swap",
    "term_lc",
    "term_size",
    "union_all",
    "weaken",
]
