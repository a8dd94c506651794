"""Formula syntax tree, text format, derived-operator expansion and validation.

Text format (whitespace-insensitive)::

    phi := true | false | ident | @int | ident cmp num
         | !phi | phi & phi | phi | phi
         | phi U[a, b] phi | phi S[a, b] phi | (F|G|O|H)[a, b] phi
         | phi reach(f)[cmp r] phi | escape(f)[cmp r] phi
         | somewhere(f)[cmp r] phi | everywhere(f)[cmp r] phi
         | phi surround(f)[cmp r] phi | ( phi )

Prefix operators bind tightest, then ``&``, then ``|``, then the binary
temporal/spatial operators, which do not chain without brackets.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Union

from .space import DistanceFunction, default_distance_functions

CMP_OPS = ("<", "<=", ">", ">=")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """``kind`` is one of ``unbound``, ``closure``, ``type``."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


# ----------------------------------------------------------------------------
# distance predicates

@dataclass(frozen=True)
class DistancePredicate:
    op: str
    bound: float

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        if math.isnan(self.bound):
            raise ValueError("NaN distance bound")
        object.__setattr__(self, "bound", float(self.bound))

    def __call__(self, d) -> bool:
        op, r = self.op, self.bound
        if op == "<=":
            return d <= r
        if op == "<":
            return d < r
        if op == ">=":
            return d >= r
        return d > r

    @property
    def is_upper_bound(self) -> bool:
        return self.op in ("<", "<=")

    def complement(self) -> "DistancePredicate":
        flip = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
        return DistancePredicate(flip[self.op], self.bound)

    def __str__(self):
        return f"{self.op} {_fmt_bound(self.bound)}"


def _fmt_num(x: float) -> str:
    return repr(float(x))


def _fmt_bound(x: float) -> str:
    if x == math.inf:
        return "infinity"
    if x == -math.inf:
        return "-infinity"
    return _fmt_num(x)


def closure_samples(pred: DistancePredicate) -> list[float]:
    r = pred.bound
    pts = [0.0, 0.5, 1.0, 2.0, 3.0, 10.0, 1e6, math.inf]
    if math.isfinite(r):
        pts += [r, r - 1.0, r + 1.0, r - 1e-9, r + 1e-9, r / 2.0, 2.0 * r]
    return sorted({p for p in pts if p >= 0.0})


def is_reach_closed(pred: DistancePredicate, df: DistanceFunction) -> bool:
    """Sampled check: preferred (shorter) distances keep satisfying ``pred``."""
    sr = df.semiring
    pts = closure_samples(pred)
    return all(pred(y) for x in pts if pred(x) for y in pts if sr.choose(x, y) == y)


def is_escape_closed(pred: DistancePredicate, df: DistanceFunction) -> bool:
    """Sampled check: less preferred (longer) distances keep satisfying ``pred``."""
    sr = df.semiring
    pts = closure_samples(pred)
    return all(pred(y) for x in pts if pred(x) for y in pts if sr.choose(x, y) == x)


# ----------------------------------------------------------------------------
# syntax tree

@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atomic:
    name: str


@dataclass(frozen=True)
class Cmp:
    channel: str
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("comparison thresholds must be finite")
        object.__setattr__(self, "threshold", float(self.threshold))


@dataclass(frozen=True)
class At:
    loc: int


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


def _check_interval(a, b):
    if not (0 <= a <= b) or not math.isfinite(b):
        raise ValueError(f"interval [{a}, {b}] must satisfy 0 <= a <= b < inf")


@dataclass(frozen=True)
class _Temporal2:
    left: "Formula"
    a: float
    b: float
    right: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class Until(_Temporal2):
    pass


@dataclass(frozen=True)
class Since(_Temporal2):
    pass


@dataclass(frozen=True)
class _Temporal1:
    a: float
    b: float
    arg: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class Eventually(_Temporal1):
    pass


@dataclass(frozen=True)
class Globally(_Temporal1):
    pass


@dataclass(frozen=True)
class Once(_Temporal1):
    pass


@dataclass(frozen=True)
class Historically(_Temporal1):
    pass


@dataclass(frozen=True)
class Reach:
    dist: str
    pred: DistancePredicate
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Surround:
    dist: str
    pred: DistancePredicate
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Escape:
    dist: str
    pred: DistancePredicate
    arg: "Formula"


@dataclass(frozen=True)
class Somewhere:
    dist: str
    pred: DistancePredicate
    arg: "Formula"


@dataclass(frozen=True)
class Everywhere:
    dist: str
    pred: DistancePredicate
    arg: "Formula"


Formula = Union[
    TrueF, Atomic, Cmp, At, Not, And, Or, Until, Since, Eventually, Globally, Once,
    Historically, Reach, Escape, Somewhere, Everywhere, Surround,
]

CORE_KINDS = (TrueF, Atomic, Cmp, At, Not, And, Until, Since, Reach, Escape)
DERIVED_KINDS = (Or, Eventually, Globally, Once, Historically, Somewhere, Everywhere, Surround)
SPATIAL_KINDS = (Reach, Escape, Somewhere, Everywhere, Surround)


def children(phi) -> tuple:
    if isinstance(phi, (TrueF, Atomic, Cmp, At)):
        return ()
    if isinstance(phi, (Not, _Temporal1, Escape, Somewhere, Everywhere)):
        return (phi.arg,)
    return (phi.left, phi.right)


def walk(phi) -> Iterator:
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def depth(phi) -> int:
    kids = children(phi)
    return 1 + (max(depth(k) for k in kids) if kids else 0)


# ----------------------------------------------------------------------------
# printing

def to_text(phi) -> str:
    """Canonical text; binary operators are always bracketed."""
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, Atomic):
        return phi.name
    if isinstance(phi, Cmp):
        return f"{phi.channel} {phi.op} {_fmt_num(phi.threshold)}"
    if isinstance(phi, At):
        return f"@{phi.loc}"
    if isinstance(phi, Not):
        return f"!{to_text(phi.arg)}"
    if isinstance(phi, And):
        return f"({to_text(phi.left)} & {to_text(phi.right)})"
    if isinstance(phi, Or):
        return f"({to_text(phi.left)} | {to_text(phi.right)})"
    if isinstance(phi, (Until, Since)):
        sym = "U" if isinstance(phi, Until) else "S"
        return f"({to_text(phi.left)} {sym}[{_fmt_num(phi.a)}, {_fmt_num(phi.b)}] {to_text(phi.right)})"
    if isinstance(phi, _Temporal1):
        sym = {Eventually: "F", Globally: "G", Once: "O", Historically: "H"}[type(phi)]
        return f"{sym}[{_fmt_num(phi.a)}, {_fmt_num(phi.b)}] {to_text(phi.arg)}"
    if isinstance(phi, (Reach, Surround)):
        kw = "reach" if isinstance(phi, Reach) else "surround"
        return f"({to_text(phi.left)} {kw}({phi.dist})[{phi.pred}] {to_text(phi.right)})"
    if isinstance(phi, (Escape, Somewhere, Everywhere)):
        kw = {Escape: "escape", Somewhere: "somewhere", Everywhere: "everywhere"}[type(phi)]
        return f"{kw}({phi.dist})[{phi.pred}] {to_text(phi.arg)}"
    raise TypeError(f"not a formula: {phi!r}")


# ----------------------------------------------------------------------------
# parsing

KEYWORDS = {
    "true", "false", "U", "S", "F", "G", "O", "H", "reach", "escape",
    "somewhere", "everywhere", "surround", "infinity",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>-?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<|>|!|&|\||@|\(|\)|\[|\]|,)
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str      # num, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind == "ws":
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = pos + s.rfind("\n") + 1
        else:
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


_BINARY_KW = ("U", "S", "reach", "surround")
_PREFIX_TEMPORAL = {"F": Eventually, "G": Globally, "O": Once, "H": Historically}
_PREFIX_SPATIAL = {"escape": Escape, "somewhere": Somewhere, "everywhere": Everywhere}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def number(self, allow_inf=False) -> float:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return float(tok.text)
        if allow_inf and tok.kind == "kw" and tok.text == "infinity":
            self.i += 1
            return math.inf
        self.error(f"expected a number, found {tok.text or 'end of input'!r}")

    def parse(self):
        phi = self.binary()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return phi

    def interval(self):
        start = self.tok
        self.expect("[")
        a = self.number()
        self.expect(",")
        b = self.number()
        self.expect("]")
        if not 0 <= a <= b:
            self.error(f"interval [{a:g}, {b:g}] needs 0 <= a <= b", start)
        return a, b

    def spatial_params(self):
        self.expect("(")
        if self.tok.kind != "ident":
            self.error("expected a distance function name")
        name = self.tok.text
        self.i += 1
        self.expect(")")
        self.expect("[")
        op = self.tok.text
        if self.tok.kind != "op" or op not in CMP_OPS:
            self.error("expected a comparison (<, <=, >, >=)")
        self.i += 1
        bound = self.number(allow_inf=True)
        self.expect("]")
        return name, DistancePredicate(op, bound)

    def binary(self):
        left = self.disjunction()
        tok = self.tok
        if tok.kind != "kw" or tok.text not in _BINARY_KW:
            return left
        self.i += 1
        if tok.text in ("U", "S"):
            a, b = self.interval()
            right = self.disjunction()
            node = (Until if tok.text == "U" else Since)(left, a, b, right)
        else:
            name, pred = self.spatial_params()
            right = self.disjunction()
            node = (Reach if tok.text == "reach" else Surround)(name, pred, left, right)
        if self.tok.kind == "kw" and self.tok.text in _BINARY_KW:
            self.error(f"ambiguous nesting of {tok.text!r} and {self.tok.text!r}; add brackets")
        return node

    def disjunction(self):
        node = self.conjunction()
        while self.accept("|"):
            node = Or(node, self.conjunction())
        return node

    def conjunction(self):
        node = self.unary()
        while self.accept("&"):
            node = And(node, self.unary())
        return node

    def unary(self):
        tok = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if tok.kind == "kw" and tok.text in _PREFIX_TEMPORAL:
            self.i += 1
            a, b = self.interval()
            return _PREFIX_TEMPORAL[tok.text](a, b, self.unary())
        if tok.kind == "kw" and tok.text in _PREFIX_SPATIAL:
            self.i += 1
            name, pred = self.spatial_params()
            return _PREFIX_SPATIAL[tok.text](name, pred, self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if self.accept("("):
            phi = self.binary()
            self.expect(")")
            return phi
        if self.accept("true"):
            return TrueF()
        if self.accept("false"):
            return Not(TrueF())
        if self.accept("@"):
            num = self.tok
            if num.kind != "num" or not re.fullmatch(r"\d+", num.text):
                self.error("expected a location number after '@'")
            self.i += 1
            return At(int(num.text))
        if tok.kind == "ident":
            self.i += 1
            if self.tok.kind == "op" and self.tok.text in CMP_OPS:
                op = self.tok.text
                self.i += 1
                return Cmp(tok.text, op, self.number())
            return Atomic(tok.text)
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse(text: str):
    """Parse formula text; raises :class:`ParseError` with line and column."""
    return _Parser(text).parse()


# ----------------------------------------------------------------------------
# derived operators

def _neg(phi):
    return phi.arg if isinstance(phi, Not) else Not(phi)


def expand_derived(phi):
    """Rewrite every derived operator into the core ones (``! & U S reach escape``)."""
    ex = expand_derived
    if isinstance(phi, (TrueF, Atomic, Cmp, At)):
        return phi
    if isinstance(phi, Not):
        return Not(ex(phi.arg))
    if isinstance(phi, And):
        return And(ex(phi.left), ex(phi.right))
    if isinstance(phi, Or):
        return Not(And(_neg(ex(phi.left)), _neg(ex(phi.right))))
    if isinstance(phi, Until):
        return Until(ex(phi.left), phi.a, phi.b, ex(phi.right))
    if isinstance(phi, Since):
        return Since(ex(phi.left), phi.a, phi.b, ex(phi.right))
    if isinstance(phi, Eventually):
        return Until(TrueF(), phi.a, phi.b, ex(phi.arg))
    if isinstance(phi, Globally):
        return Not(Until(TrueF(), phi.a, phi.b, _neg(ex(phi.arg))))
    if isinstance(phi, Once):
        return Since(TrueF(), phi.a, phi.b, ex(phi.arg))
    if isinstance(phi, Historically):
        return Not(Since(TrueF(), phi.a, phi.b, _neg(ex(phi.arg))))
    if isinstance(phi, Reach):
        return Reach(phi.dist, phi.pred, ex(phi.left), ex(phi.right))
    if isinstance(phi, Escape):
        return Escape(phi.dist, phi.pred, ex(phi.arg))
    if isinstance(phi, Somewhere):
        return Reach(phi.dist, phi.pred, TrueF(), ex(phi.arg))
    if isinstance(phi, Everywhere):
        return Not(Reach(phi.dist, phi.pred, TrueF(), _neg(ex(phi.arg))))
    if isinstance(phi, Surround):
        p1, p2 = ex(phi.left), ex(phi.right)
        outside = And(_neg(p1), _neg(p2))  # !(p1 | p2)
        no_leak = Not(Reach(phi.dist, phi.pred, p1, outside))
        no_escape = Not(Escape(phi.dist, phi.pred.complement(), p1))
        return And(And(p1, no_leak), no_escape)
    raise TypeError(f"not a formula: {phi!r}")


def is_core(phi) -> bool:
    return all(isinstance(node, CORE_KINDS) for node in walk(phi))


# ----------------------------------------------------------------------------
# interpretation context and validation

AtomFn = Callable[[Mapping[str, Any]], Any]


@dataclass
class InterpretationContext:
    """Bindings for atomic names, distance functions and address propositions.

    Atomic names default to Boolean trace channels and comparisons to numeric
    ones; ``atoms`` overrides an atomic name with a function of the channel
    values at a point (returning a Boolean, or a float for quantitative use).
    """

    distance_functions: dict[str, DistanceFunction] = field(default_factory=default_distance_functions)
    atoms: dict[str, AtomFn] = field(default_factory=dict)

    def distance(self, name: str) -> DistanceFunction:
        try:
            return self.distance_functions[name]
        except KeyError:
            raise ValidationError("unbound", f"unknown distance function {name!r}") from None


def validate(phi, context: InterpretationContext | None = None, schema=None, n_locations: int | None = None):
    """Check names, channel kinds and distance-predicate closure; return ``phi``.

    ``schema`` is a :class:`~strel.signal.Trace` or a mapping channel -> kind.
    """
    context = context or InterpretationContext()
    kinds = None
    if schema is not None:
        kinds = dict(zip(schema.channels, schema.kinds)) if hasattr(schema, "kinds") else dict(schema)
        if n_locations is None and hasattr(schema, "n"):
            n_locations = schema.n
    for node in walk(phi):
        if isinstance(node, Atomic) and node.name not in context.atoms and kinds is not None:
            if node.name not in kinds:
                raise ValidationError("unbound", f"unknown atomic proposition {node.name!r}")
            if kinds[node.name] != "bool":
                raise ValidationError("type", f"channel {node.name!r} is numeric; compare it with a threshold")
        elif isinstance(node, Cmp) and kinds is not None:
            if node.channel not in kinds:
                raise ValidationError("unbound", f"unknown channel {node.channel!r}")
            if kinds[node.channel] != "float":
                raise ValidationError("type", f"channel {node.channel!r} is Boolean and cannot be compared")
        elif isinstance(node, At) and n_locations is not None and not 0 <= node.loc < n_locations:
            raise ValidationError("unbound", f"location @{node.loc} outside 0..{n_locations - 1}")
        elif isinstance(node, SPATIAL_KINDS):
            df = context.distance(node.dist)
            if isinstance(node, Escape):
                if not is_escape_closed(node.pred, df):
                    raise ValidationError(
                        "closure", f"escape needs a lower-bound distance predicate, got [{node.pred}]")
            elif not is_reach_closed(node.pred, df):
                kw = type(node).__name__.lower()
                raise ValidationError("closure", f"{kw} needs an upper-bound distance predicate, got [{node.pred}]")
    return phi


def check(text: str, context: InterpretationContext | None = None, schema=None, n_locations: int | None = None):
    """Parse and validate in one go."""
    return validate(parse(text), context, schema, n_locations)
