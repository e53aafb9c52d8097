"""Chase-based query answering for sticky, weakly-sticky and jointly-weakly-sticky Datalog+ programs."""

from .chase import ChaseResult, ChaseStep, DerivationRelation, StickinessVerdict, check_s_stickiness, classic_chase, derives
from .classes import (
    BOTTOM,
    EXISTS,
    RANK,
    ClassReport,
    Marking,
    SelectionFunction,
    classify,
    is_jointly_weakly_sticky,
    is_sticky,
    is_syn_sch,
    is_weakly_sticky,
    mark_variables,
    oracle,
    select,
    selection,
)
from .errors import (
    ArityMismatch,
    ExistentialInBody,
    NotInClass,
    ParseError,
    StickyChaseError,
    UnboundVariable,
    UnknownAtom,
    UnknownPosition,
    UnsafeHeadVariable,
    UnsafeQuery,
)
from .graphs import (
    build_dg,
    build_edg,
    finite_existential_positions,
    finite_rank_positions,
    is_jointly_acyclic,
    is_weakly_acyclic,
    rank_table,
)
from .magic import MagicProgram, default_sips, magicd_plus, random_sips
from .model import (
    Atom,
    ConjunctiveQuery,
    Instance,
    Position,
    Program,
    Rule,
    Term,
    atom,
    const,
    evaluate_cq,
    freeze_nulls,
    frozen,
    is_pi_homomorphic,
    isomorphic,
    null,
    var,
)
from .parser import parse_instance, parse_positions, parse_program, parse_query, render_instance, render_program
from .qa import AnswerSet, ChaseState, oracle_answers, proof_height_bound, qchase, resume, schqa

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
