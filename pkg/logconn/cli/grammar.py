"""Text form of scalars, rational functions and matrices.

Scalars and rational functions share one grammar: sums and products of
integers, ``zeta`` (the generator of the job's field) and ``z``, with integer
powers and parentheses. Printing goes through the ``__str__`` of the engine
types, which emit exactly this grammar.
"""
import logging
from functools import lru_cache

from parglare import Grammar, Parser
from parglare.exceptions import SyntaxError as ParseError

from ..core.errors import FieldDivisionError, GrammarError
from ..core.field import field_make
from ..core.ratcalc import P1Point, Poly, RatFun

EXPRESSION_GRAMMAR = r"""
Expr: Expr '+' Term
    | Expr '-' Term
    | Term;
Term: Term '*' Unary
    | Term '/' Unary
    | Unary;
Unary: '-' Unary
     | Power;
Power: Atom '^' Exponent
     | Atom;
Exponent: NUMBER
        | '-' NUMBER;
Atom: NUMBER
    | ZETA
    | VAR
    | '(' Expr ')';

terminals
NUMBER: /\d+/;
ZETA: 'zeta' {15};
VAR: 'z';
"""

INFINITY = "inf"


def _build_actions(ctx):
    def number(_, value):
        return int(value)

    def atom_number(_, nodes):
        return RatFun.constant(ctx, nodes[0])

    def power(_, nodes):
        base, _caret, exponent = nodes
        return base ** exponent

    return {
        "NUMBER": number,
        "ZETA": lambda _, value: RatFun.constant(ctx, ctx.zeta()),
        "VAR": lambda _, value: RatFun.variable(ctx),
        "Atom": [
            atom_number,
            lambda _, nodes: nodes[0],
            lambda _, nodes: nodes[0],
            lambda _, nodes: nodes[1],
        ],
        "Exponent": [
            lambda _, nodes: nodes[0],
            lambda _, nodes: -nodes[1],
        ],
        "Power": [
            power,
            lambda _, nodes: nodes[0],
        ],
        "Unary": [
            lambda _, nodes: -nodes[1],
            lambda _, nodes: nodes[0],
        ],
        "Term": [
            lambda _, nodes: nodes[0] * nodes[2],
            lambda _, nodes: nodes[0] / nodes[2],
            lambda _, nodes: nodes[0],
        ],
        "Expr": [
            lambda _, nodes: nodes[0] + nodes[2],
            lambda _, nodes: nodes[0] - nodes[2],
            lambda _, nodes: nodes[0],
        ],
    }


@lru_cache(maxsize=None)
def _grammar():
    return Grammar.from_string(EXPRESSION_GRAMMAR)


@lru_cache(maxsize=16)
def expression_parser(order):
    """One parser per field order; the actions close over the field"""
    ctx = field_make(order)
    logging.debug(f"building expression parser for N={order}")
    return Parser(_grammar(), actions=_build_actions(ctx))


def _position(error):
    location = getattr(error, "location", None)
    return getattr(location, "start_position", None)


def parse_ratfun(text, ctx):
    if not isinstance(text, str):
        text = str(text)
    if not text.strip():
        raise GrammarError("empty expression", 0)
    try:
        return expression_parser(ctx.order).parse(text)
    except ParseError as e:
        position = _position(e)
        raise GrammarError(f"syntax error at position {position} in {text!r}", position)
    except FieldDivisionError as e:
        raise GrammarError(f"zero denominator in {text!r}: {e}")


def parse_scalar(text, ctx):
    value = parse_ratfun(text, ctx)
    if not value.is_constant():
        raise GrammarError(f"{text!r} depends on z, a scalar was expected")
    return value.constant_value()


def parse_point(text, ctx):
    if isinstance(text, str) and text.strip() == INFINITY:
        return P1Point.infinity()
    return P1Point.finite(parse_scalar(text, ctx))


def parse_matrix(rows, ctx, scalar=False):
    if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
        raise GrammarError(f"a matrix must be a non-empty list of rows, got {rows!r}")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise GrammarError("matrix rows have different lengths")
    parse = parse_scalar if scalar else parse_ratfun
    return [[parse(entry, ctx) for entry in row] for row in rows]


def format_scalar(value):
    return str(value)


def format_ratfun(value):
    if isinstance(value, Poly):
        value = RatFun(value, reduced=True)
    return str(value)


def format_point(point):
    return str(point)


def format_matrix(m):
    rows, cols = m.shape
    return [[str(m[i, j]) for j in range(cols)] for i in range(rows)]
