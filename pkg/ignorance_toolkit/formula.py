"""Formulas of the ignorance language: AST, parser, printer and structural helpers.

Primitive modalities are ``nabla`` (ignorance whether), ``bullet`` (ignorance of
the fact) and ``box`` (neighborhood necessity). ``delta``, ``circ`` and
``diamond`` abbreviate ``~nabla``, ``~bullet`` and ``~box~``.

Operator precedence, tightest first: unary operators, ``&``, ``|``, ``->``
(right associative), ``<->`` (right associative).
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import ClassVar, Final

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken

from .errors import FormulaSyntaxError

__all__ = [
    "And",
    "Atom",
    "Binary",
    "Bot",
    "Box",
    "Bullet",
    "Circ",
    "Delta",
    "Diamond",
    "Formula",
    "Fragment",
    "Iff",
    "Imp",
    "MetaVar",
    "Modality",
    "Nabla",
    "Not",
    "Or",
    "Top",
    "Unary",
    "atoms",
    "conjunction",
    "expand_defined",
    "metavariables",
    "modal_depth",
    "modalities",
    "parse",
    "render",
    "replace_atoms",
    "size",
    "subformulas",
    "substitute",
]

NAME_PATTERN: Final = re.compile(r"[a-z][a-z0-9_]*")


class Formula:
    """Base class of every formula node. Nodes are immutable values."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str

    def __post_init__(self) -> None:
        if not NAME_PATTERN.fullmatch(self.name):
            raise ValueError(f"Invalid atom name: {self.name!r}")


@dataclass(frozen=True, slots=True)
class MetaVar(Formula):
    """Schema placeholder, written ``?phi`` in scripts."""

    name: str

    def __post_init__(self) -> None:
        if not NAME_PATTERN.fullmatch(self.name):
            raise ValueError(f"Invalid metavariable name: {self.name!r}")


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Unary(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class Binary(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Not(Unary):
    pass


@dataclass(frozen=True, slots=True)
class Nabla(Unary):
    pass


@dataclass(frozen=True, slots=True)
class Bullet(Unary):
    pass


@dataclass(frozen=True, slots=True)
class Box(Unary):
    pass


@dataclass(frozen=True, slots=True)
class Delta(Unary):
    """Sugar for ``Not(Nabla(x))``."""


@dataclass(frozen=True, slots=True)
class Circ(Unary):
    """Sugar for ``Not(Bullet(x))``."""


@dataclass(frozen=True, slots=True)
class Diamond(Unary):
    """Sugar for ``Not(Box(Not(x)))``."""


@dataclass(frozen=True, slots=True)
class And(Binary):
    pass


@dataclass(frozen=True, slots=True)
class Or(Binary):
    pass


@dataclass(frozen=True, slots=True)
class Imp(Binary):
    pass


@dataclass(frozen=True, slots=True)
class Iff(Binary):
    pass


# --------------------------------------------------------------------------
# Modalities and fragments
# --------------------------------------------------------------------------


class Modality(StrEnum):
    NABLA = "nabla"
    BULLET = "bullet"
    BOX = "box"


_MODALITY_OF: Final[dict[type[Unary], Modality]] = {
    Nabla: Modality.NABLA,
    Delta: Modality.NABLA,
    Bullet: Modality.BULLET,
    Circ: Modality.BULLET,
    Box: Modality.BOX,
    Diamond: Modality.BOX,
}

_SYMBOL: Final[dict[Modality, str]] = {
    Modality.NABLA: "∇",
    Modality.BULLET: "•",
    Modality.BOX: "□",
}


@dataclass(frozen=True, slots=True)
class Fragment:
    """A sublanguage given by the modalities it may use.

    The empty fragment is the propositional language.
    """

    modalities: frozenset[Modality]

    NAMED: ClassVar[dict[str, tuple[Modality, ...]]] = {
        "propositional": (),
        "nabla": (Modality.NABLA,),
        "bullet": (Modality.BULLET,),
        "nabla-bullet": (Modality.NABLA, Modality.BULLET),
        "box": (Modality.BOX,),
        "nabla-bullet-box": (Modality.NABLA, Modality.BULLET, Modality.BOX),
    }

    @classmethod
    def of(cls, *mods: Modality) -> Fragment:
        return cls(frozenset(mods))

    @classmethod
    def from_name(cls, name: str) -> Fragment:
        """Build a fragment from ``nabla``, ``bullet``, ``nabla-bullet``, ``box`` etc.

        Raises:
            ValueError: if ``name`` is not a known fragment name
        """
        key = name.strip().lower()
        if key not in cls.NAMED:
            known = ", ".join(cls.NAMED)
            raise ValueError(f"Unknown fragment {name!r}; expected one of: {known}")
        return cls(frozenset(cls.NAMED[key]))

    @property
    def name(self) -> str:
        for name, mods in self.NAMED.items():
            if frozenset(mods) == self.modalities:
                return name
        return "-".join(m.value for m in self.ordered())

    @property
    def label(self) -> str:
        inner = ",".join(_SYMBOL[m] for m in self.ordered())
        return f"L({inner})" if inner else "L(PL)"

    def ordered(self) -> tuple[Modality, ...]:
        return tuple(m for m in Modality if m in self.modalities)

    def admits(self, f: Formula) -> bool:
        """True iff every modality occurring in ``f`` belongs to the fragment."""
        return modalities(f) <= self.modalities

    def __str__(self) -> str:
        return self.label


# --------------------------------------------------------------------------
# Structural helpers
# --------------------------------------------------------------------------


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Unary):
        return (f.operand,)
    if isinstance(f, Binary):
        return (f.left, f.right)
    return ()


def _map_children(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    if isinstance(f, Unary):
        return type(f)(fn(f.operand))
    if isinstance(f, Binary):
        return type(f)(fn(f.left), fn(f.right))
    return f


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield the subformulas of ``f`` in post-order (children before parents)."""
    for child in children(f):
        yield from subformulas(child)
    yield f


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def metavariables(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, MetaVar))


def modalities(f: Formula) -> frozenset[Modality]:
    return frozenset(_MODALITY_OF[type(g)] for g in subformulas(f) if type(g) in _MODALITY_OF)


def modal_depth(f: Formula) -> int:
    """Maximum nesting of modal operators (sugar counts as its modality)."""
    inner = max((modal_depth(c) for c in children(f)), default=0)
    return inner + 1 if type(f) in _MODALITY_OF else inner


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def expand_defined(f: Formula) -> Formula:
    """Rewrite ``delta``, ``circ`` and ``diamond`` into primitive connectives."""
    match f:
        case Delta(x):
            return Not(Nabla(expand_defined(x)))
        case Circ(x):
            return Not(Bullet(expand_defined(x)))
        case Diamond(x):
            return Not(Box(Not(expand_defined(x))))
        case _:
            return _map_children(f, expand_defined)


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Replace metavariables by formulas; unmapped metavariables are kept."""
    if isinstance(f, MetaVar):
        return mapping.get(f.name, f)
    return _map_children(f, lambda g: substitute(g, mapping))


def replace_atoms(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    if isinstance(f, Atom):
        return mapping.get(f.name, f)
    return _map_children(f, lambda g: replace_atoms(g, mapping))


def conjunction(parts: list[Formula]) -> Formula:
    """Left-nested conjunction of ``parts``; the empty conjunction is ``Top``."""
    if not parts:
        return Top()
    result = parts[0]
    for part in parts[1:]:
        result = And(result, part)
    return result


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------

_BINARY_PREC: Final[dict[type[Binary], int]] = {Iff: 0, Imp: 1, Or: 2, And: 3}
_BINARY_OP: Final[dict[type[Binary], str]] = {Iff: "<->", Imp: "->", Or: "|", And: "&"}
_UNARY_PREC: Final = 4
_RIGHT_ASSOC: Final[frozenset[type[Binary]]] = frozenset({Iff, Imp})
_UNARY_KEYWORD: Final[dict[type[Unary], str]] = {
    Nabla: "nabla",
    Bullet: "bullet",
    Box: "box",
    Delta: "delta",
    Circ: "circ",
    Diamond: "diamond",
}


def _prec(f: Formula) -> int:
    if isinstance(f, Binary):
        return _BINARY_PREC[type(f)]
    return _UNARY_PREC


def render(f: Formula) -> str:
    """Print ``f`` in ASCII concrete syntax with minimal parentheses."""
    match f:
        case Atom(name):
            return name
        case MetaVar(name):
            return f"?{name}"
        case Top():
            return "true"
        case Bot():
            return "false"
        case Not(x):
            return "~" + _wrap(x, _prec(x) < _UNARY_PREC)
        case Unary(x):
            return f"{_UNARY_KEYWORD[type(f)]} " + _wrap(x, _prec(x) < _UNARY_PREC)
        case Binary(left, right):
            prec = _BINARY_PREC[type(f)]
            if type(f) in _RIGHT_ASSOC:
                left_paren, right_paren = _prec(left) <= prec, _prec(right) < prec
            else:
                left_paren, right_paren = _prec(left) < prec, _prec(right) <= prec
            op = _BINARY_OP[type(f)]
            return f"{_wrap(left, left_paren)} {op} {_wrap(right, right_paren)}"
    raise TypeError(f"Not a formula: {f!r}")


def _wrap(f: Formula, paren: bool) -> str:
    text = render(f)
    return f"({text})" if paren else text


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

GRAMMAR: Final = r"""
?start: equiv

?equiv: impl
      | impl "<->" equiv       -> iff
      | impl "↔" equiv         -> iff

?impl: disj
     | disj "->" impl          -> imp
     | disj "→" impl           -> imp

?disj: conj
     | disj "|" conj           -> or_
     | disj "∨" conj           -> or_

?conj: unary
     | conj "&" unary          -> and_
     | conj "∧" unary          -> and_

?unary: "~" unary              -> not_
      | "¬" unary              -> not_
      | "nabla" unary          -> nabla
      | "∇" unary              -> nabla
      | "bullet" unary         -> bullet
      | "•" unary              -> bullet
      | "box" unary            -> box
      | "□" unary              -> box
      | "diamond" unary        -> diamond
      | "◇" unary              -> diamond
      | "delta" unary          -> delta
      | "Δ" unary              -> delta
      | "circ" unary           -> circ
      | "∘" unary              -> circ
      | primary

?primary: "true"               -> top
        | "top"                -> top
        | "⊤"                  -> top
        | "false"              -> bot
        | "bot"                -> bot
        | "⊥"                  -> bot
        | NAME                 -> atom
        | METAVAR              -> metavar
        | "(" equiv ")"

NAME: /[a-z][a-z0-9_]*/
METAVAR: /\?[a-z][a-z0-9_]*/

%import common.WS
%ignore WS
"""


@v_args(inline=True)
class _ToFormula(Transformer[Token, Formula]):
    def iff(self, left: Formula, right: Formula) -> Formula:
        return Iff(left, right)

    def imp(self, left: Formula, right: Formula) -> Formula:
        return Imp(left, right)

    def or_(self, left: Formula, right: Formula) -> Formula:
        return Or(left, right)

    def and_(self, left: Formula, right: Formula) -> Formula:
        return And(left, right)

    def not_(self, x: Formula) -> Formula:
        return Not(x)

    def nabla(self, x: Formula) -> Formula:
        return Nabla(x)

    def bullet(self, x: Formula) -> Formula:
        return Bullet(x)

    def box(self, x: Formula) -> Formula:
        return Box(x)

    def diamond(self, x: Formula) -> Formula:
        return Diamond(x)

    def delta(self, x: Formula) -> Formula:
        return Delta(x)

    def circ(self, x: Formula) -> Formula:
        return Circ(x)

    def top(self) -> Formula:
        return Top()

    def bot(self) -> Formula:
        return Bot()

    def atom(self, token: Token) -> Formula:
        return Atom(str(token))

    def metavar(self, token: Token) -> Formula:
        return MetaVar(str(token)[1:])


_PARSER: Final = Lark(GRAMMAR, parser="lalr", transformer=_ToFormula())


def _spelling(terminal: str) -> str:
    if terminal == "$END":
        return "end of input"
    try:
        pattern = _PARSER.get_terminal(terminal).pattern
    except KeyError:
        return terminal
    if terminal in ("NAME", "METAVAR"):
        return "atom" if terminal == "NAME" else "metavariable"
    return repr(pattern.value)


def _end_position(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _syntax_error(text: str, exc: UnexpectedInput) -> FormulaSyntaxError:
    line = exc.line if isinstance(exc.line, int) and exc.line > 0 else None
    column = exc.column if isinstance(exc.column, int) and exc.column > 0 else None
    if line is None or column is None:
        line, column = _end_position(text)

    expected: set[str] = set()
    if isinstance(exc, UnexpectedToken):
        expected = {_spelling(t) for t in exc.expected}
        if exc.token.type == "$END":
            line, column = _end_position(text)
            message = "Unexpected end of input"
        else:
            message = f"Unexpected token {str(exc.token)!r}"
    elif isinstance(exc, UnexpectedCharacters):
        expected = {_spelling(t) for t in exc.allowed or ()}
        message = f"Unexpected character {exc.char!r}"
    else:
        expected = {_spelling(t) for t in getattr(exc, "expected", ()) or ()}
        message = "Unexpected end of input"
    return FormulaSyntaxError(message, line=line, column=column, expected=expected)


def parse(text: str, *, keep_sugar: bool = False) -> Formula:
    """Parse ``text`` into a formula.

    Args:
        text: formula in the concrete syntax (ASCII keywords or Unicode aliases)
        keep_sugar: keep ``delta``/``circ``/``diamond`` nodes instead of expanding them

    Returns:
        The formula AST.

    Raises:
        FormulaSyntaxError: with line, column and the set of expected tokens
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as exc:
        raise _syntax_error(text, exc) from None
    if not isinstance(tree, Formula):  # pragma: no cover - grammar always yields a node
        raise FormulaSyntaxError("Empty formula", line=1, column=1)
    return tree if keep_sugar else expand_defined(tree)
