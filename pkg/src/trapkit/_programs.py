"""Expression grammar, AST, and compilation to flat stack programs.

Grammar (payoff expressions):

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := atom ("^" atom)?
    atom   := NUMBER | IDENT | FUNC "(" expr ("," expr)* ")" | "(" expr ")" | "-" atom
    IDENT  := x1 | x2 | x3   (bounded by the field dimension)
    FUNC   := abs | min | max | sqrt

Predicates (used for domains and closed region sets) are conjunctions of
non-strict comparisons; strict comparisons are rejected so that every
predicate set is closed by construction:

    pred := cmp ("&" cmp)*
    cmp  := expr ("<=" | ">=") expr

Numbers are decimal literals (an optional exponent suffix is accepted).

Arithmetic never raises and never produces NaN or -inf: after every
operation, NaN and -inf collapse to +inf, the absorbing "infeasible"
value of the extended-real codomain.  Division by zero and square roots
of negatives therefore evaluate to +inf.
"""

import re
from dataclasses import dataclass, field

import numpy as np

# Opcodes shared by the NumPy executor and the compiled kernel.
OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_POW = 6
OP_NEG = 7
OP_ABS = 8
OP_SQRT = 9
OP_MIN2 = 10
OP_MAX2 = 11

_FUNCS = {"abs": 1, "sqrt": 1, "min": 2, "max": 2}  # value = minimum arity
_UNARY_FUNCS = {"abs", "sqrt"}

MAX_STACK = 64

# Comparison codes for predicate conjuncts.
CMP_LE = 0
CMP_GE = 1


class ParseError(ValueError):
    """Syntax/semantic error in an expression, with a source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(
    r"""
    (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|==|!=|[-+*/^(),&<>])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        tokens.append((kind, m.group(), i))
        i = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        if dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2, or 3, got {dim}")
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value:
            shown = val if val else "end of input"
            raise ParseError(f"expected {value!r}, found {shown!r}", pos)
        return self.advance()

    # expr := term (("+"|"-") term)*
    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    # factor := atom ("^" atom)?   (single, non-associative power)
    def factor(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            node = ("pow", node, self.atom())
        return node

    def atom(self):
        kind, val, pos = self.peek()
        if val == "-":
            self.advance()
            return ("neg", self.atom())
        if val == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "num":
            self.advance()
            return ("num", float(val))
        if kind == "ident":
            self.advance()
            if self.peek()[1] == "(":
                return self._call(val, pos)
            return ("var", self._axis(val, pos))
        shown = val if val else "end of input"
        raise ParseError(f"unexpected {shown!r}", pos)

    def _axis(self, name: str, pos: int) -> int:
        m = re.fullmatch(r"x([123])", name)
        if m is None:
            raise ParseError(f"unknown identifier {name!r}", pos)
        axis = int(m.group(1)) - 1
        if axis >= self.dim:
            raise ParseError(
                f"identifier {name!r} exceeds dimension {self.dim}", pos
            )
        return axis

    def _call(self, name: str, pos: int):
        if name not in _FUNCS:
            raise ParseError(f"unknown function {name!r}", pos)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if name in _UNARY_FUNCS:
            if len(args) != 1:
                raise ParseError(
                    f"function {name!r} expects 1 argument, got {len(args)}", pos
                )
            return (name, args[0])
        if len(args) < 2:
            raise ParseError(
                f"function {name!r} expects at least 2 arguments, got {len(args)}",
                pos,
            )
        # Fold n-ary min/max into binary chains.
        node = args[0]
        for a in args[1:]:
            node = (name, node, a)
        return node

    # pred := cmp ("&" cmp)*
    def pred(self):
        conjuncts = [self.cmp()]
        while self.peek()[1] == "&":
            self.advance()
            conjuncts.append(self.cmp())
        return conjuncts

    def cmp(self):
        lhs = self.expr()
        kind, val, pos = self.peek()
        if val in ("<", ">", "==", "!="):
            raise ParseError(
                f"comparison {val!r} would define a non-closed set; use <= or >=",
                pos,
            )
        if val not in ("<=", ">="):
            shown = val if val else "end of input"
            raise ParseError(f"expected '<=' or '>=', found {shown!r}", pos)
        self.advance()
        rhs = self.expr()
        return (lhs, CMP_LE if val == "<=" else CMP_GE, rhs)

    def finish(self, node):
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return node


def parse_expr(text: str, dim: int):
    """Parse an expression into an AST; raises ParseError on bad input."""
    p = _Parser(text, dim)
    return p.finish(p.expr())


def parse_pred(text: str, dim: int):
    """Parse a closed-set predicate (conjunction of non-strict comparisons)."""
    p = _Parser(text, dim)
    return p.finish(p.pred())


def unparse(node) -> str:
    """Render an AST back to source text (fully parenthesized)."""
    tag = node[0]
    if tag == "num":
        v = node[1]
        return repr(v) if v >= 0 else f"({v!r})"
    if tag == "var":
        return f"x{node[1] + 1}"
    if tag == "neg":
        return f"(-{unparse(node[1])})"
    if tag in ("abs", "sqrt"):
        return f"{tag}({unparse(node[1])})"
    if tag in ("min", "max"):
        return f"{tag}({unparse(node[1])}, {unparse(node[2])})"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[tag]
    return f"({unparse(node[1])} {sym} {unparse(node[2])})"


@dataclass(eq=False)
class Program:
    """Flat postfix form of an expression AST, executable by either backend."""

    codes: np.ndarray  # int32
    operands: np.ndarray  # float64; value for CONST, axis index for VAR
    stack_size: int


_TAG_TO_OP = {
    "add": OP_ADD,
    "sub": OP_SUB,
    "mul": OP_MUL,
    "div": OP_DIV,
    "pow": OP_POW,
    "min": OP_MIN2,
    "max": OP_MAX2,
}


_UNARY_OPS = {"neg": OP_NEG, "abs": OP_ABS, "sqrt": OP_SQRT}


def _const_value(ast):
    """Literal value of a (possibly negated) numeric leaf, else None."""
    if ast[0] == "num":
        return ast[1]
    if ast[0] == "neg":
        inner = _const_value(ast[1])
        return None if inner is None else -inner
    return None


def _lower(ast):
    """Strength-reduce constant powers so both backends run the identical
    IEEE sequence (libm pow and NumPy's vectorized pow differ by an ulp on
    some inputs).  x^k for integer 1<=|k|<=16 becomes a product chain,
    x^0.5 becomes sqrt; other powers keep the pow opcode."""
    tag = ast[0]
    if tag in ("num", "var"):
        return ast
    if tag in ("neg", "abs", "sqrt"):
        return (tag, _lower(ast[1]))
    if tag == "pow":
        base = _lower(ast[1])
        exp = _const_value(ast[2])
        if exp is not None:
            if exp == 0.5:
                return ("sqrt", base)
            if float(exp).is_integer() and 1 <= abs(exp) <= 16:
                chain = base
                for _ in range(int(abs(exp)) - 1):
                    chain = ("mul", chain, base)
                if exp < 0:
                    return ("div", ("num", 1.0), chain)
                return chain
        return ("pow", base, _lower(ast[2]))
    return (tag, _lower(ast[1]), _lower(ast[2]))


def compile_ast(node) -> Program:
    codes: list[int] = []
    operands: list[float] = []

    def emit(ast) -> int:
        # returns the stack depth needed to evaluate this subtree
        tag = ast[0]
        if tag == "num":
            codes.append(OP_CONST)
            operands.append(ast[1])
            return 1
        if tag == "var":
            codes.append(OP_VAR)
            operands.append(float(ast[1]))
            return 1
        if tag in _UNARY_OPS:
            d = emit(ast[1])
            codes.append(_UNARY_OPS[tag])
            operands.append(0.0)
            return d
        dl = emit(ast[1])
        dr = emit(ast[2])
        codes.append(_TAG_TO_OP[tag])
        operands.append(0.0)
        return max(dl, 1 + dr)

    depth = emit(_lower(node))
    if depth > MAX_STACK:
        raise ValueError(f"expression too deep (stack {depth} > {MAX_STACK})")
    return Program(
        codes=np.asarray(codes, dtype=np.int32),
        operands=np.asarray(operands, dtype=np.float64),
        stack_size=depth,
    )


@dataclass(eq=False)
class Predicate:
    """Conjunction of non-strict comparisons between two compiled programs."""

    conjuncts: list  # list of (Program, cmp_code, Program)
    text: str = field(default="")

    @classmethod
    def parse(cls, text: str, dim: int) -> "Predicate":
        tree = parse_pred(text, dim)
        return cls(
            conjuncts=[(compile_ast(l), c, compile_ast(r)) for (l, c, r) in tree],
            text=text,
        )
