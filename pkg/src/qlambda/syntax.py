"""Abstract syntax of the quantum linear lambda calculus.

Types, patterns and terms are immutable dataclasses.  The concrete syntax is::

    term    ::= '\\' pattern '.' term | tensor
    tensor  ::= app [ '*' app ]          (non-associative: parenthesize nesting)
    app     ::= atom { atom } [ '\\' pattern '.' term ]
    atom    ::= var | GATE | '|0>' ['_' nat] | '|1>' ['_' nat] | '(' term ')'
    pattern ::= var | '<' var ',' var '>'

Variables start with a lowercase letter, gates with an uppercase one.  ``λ``
and ``⊗`` are accepted as synonyms of ``\\`` and ``*``.  Bits written without
a label get fresh labels in textual order, starting at the smallest unused
positive integer.

Types use ``B`` (or ``𝔹``), ``B^n``, ``A * B`` (or ``⊗``, right-associative)
and ``A -o B`` (or ``⊸``, right-associative, looser than tensor).
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import LabelError, ParseError, SubstitutionError


# -- types -----------------------------------------------------------------

@dataclass(frozen=True)
class Bit:
    def __str__(self):
        return pretty_type(self)


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self):
        return pretty_type(self)


@dataclass(frozen=True)
class Tensor:
    left: "Type"
    right: "Type"

    def __str__(self):
        return pretty_type(self)


Type = Union[Bit, Arrow, Tensor]
BIT = Bit()


def bits(n: int) -> Type:
    """``B^n`` as a right-nested tensor."""
    if n < 1:
        raise ValueError("B^n needs n >= 1")
    t = BIT
    for _ in range(n - 1):
        t = Tensor(BIT, t)
    return t


def ground_arity(t: Type) -> int | None:
    """Return n if ``t`` is exactly ``B^n``, else None."""
    n = 1
    while isinstance(t, Tensor):
        if t.left != BIT:
            return None
        n += 1
        t = t.right
    return n if t == BIT else None


def count_bits(t: Type) -> int:
    if isinstance(t, Bit):
        return 1
    if isinstance(t, Arrow):
        return count_bits(t.dom) + count_bits(t.cod)
    return count_bits(t.left) + count_bits(t.right)


def pretty_type(t: Type, ascii: bool = False) -> str:
    b, tens, arrow = ("B", "*", " -o ") if ascii else ("𝔹", "⊗", " ⊸ ")

    def go(t, ctx):
        if isinstance(t, Bit):
            return b
        if isinstance(t, Tensor):
            s = go(t.left, "tl") + tens + go(t.right, "tr")
            return f"({s})" if ctx == "tl" else s
        s = go(t.dom, "dom") + arrow + go(t.cod, "cod")
        return s if ctx in ("top", "cod") else f"({s})"

    return go(t, "top")


# -- patterns and terms ----------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pair:
    """Pair pattern ``<first, second>``."""
    first: str
    second: str

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError(f"pair pattern binds {self.first!r} twice")


Pattern = Union[Var, Pair]


@dataclass(frozen=True)
class BitConst:
    value: int
    label: int


@dataclass(frozen=True)
class Gate:
    name: str


@dataclass(frozen=True)
class TensorPair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lambda:
    pat: Pattern
    body: "Term"


Term = Union[Var, BitConst, Gate, TensorPair, App, Lambda]


def pattern_names(p: Pattern) -> tuple[str, ...]:
    return (p.name,) if isinstance(p, Var) else (p.first, p.second)


def apply_all(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def tuple_term(items) -> Term:
    """Right-nested tensor ``t1 * (t2 * (... * tn))``."""
    items = list(items)
    out = items[-1]
    for t in reversed(items[:-1]):
        out = TensorPair(t, out)
    return out


def tuple_items(m: Term, n: int) -> list[Term] | None:
    """Split a right-nested n-tuple, or None if ``m`` does not have that shape."""
    out = []
    for _ in range(n - 1):
        if not isinstance(m, TensorPair):
            return None
        out.append(m.left)
        m = m.right
    out.append(m)
    return out


# -- traversals ------------------------------------------------------------

def subterms(m: Term) -> Iterator[Term]:
    yield m
    if isinstance(m, (TensorPair,)):
        yield from subterms(m.left)
        yield from subterms(m.right)
    elif isinstance(m, App):
        yield from subterms(m.fun)
        yield from subterms(m.arg)
    elif isinstance(m, Lambda):
        yield from subterms(m.body)


def bit_labels(m: Term) -> list[int]:
    return [t.label for t in subterms(m) if isinstance(t, BitConst)]


def labels_distinct(m: Term) -> bool:
    labels = bit_labels(m)
    return len(labels) == len(set(labels))


def gates_used(m: Term) -> list[str]:
    return [t.name for t in subterms(m) if isinstance(t, Gate)]


def free_occurrences(m: Term) -> Counter:
    """Number of free occurrences of each variable."""
    out: Counter = Counter()

    def go(m, bound):
        if isinstance(m, Var):
            if m.name not in bound:
                out[m.name] += 1
        elif isinstance(m, (TensorPair,)):
            go(m.left, bound)
            go(m.right, bound)
        elif isinstance(m, App):
            go(m.fun, bound)
            go(m.arg, bound)
        elif isinstance(m, Lambda):
            go(m.body, bound | set(pattern_names(m.pat)))

    go(m, frozenset())
    return out


def free_vars(m: Term) -> list[str]:
    """Free variables, each once, in order of leftmost occurrence."""
    return list(free_occurrences(m))


def all_names(m: Term) -> set[str]:
    out = set()
    for t in subterms(m):
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Lambda):
            out.update(pattern_names(t.pat))
    return out


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789") or "v"
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def _subst(m: Term, mapping: dict[str, Term]) -> Term:
    if not mapping:
        return m
    if isinstance(m, Var):
        return mapping.get(m.name, m)
    if isinstance(m, (BitConst, Gate)):
        return m
    if isinstance(m, TensorPair):
        return TensorPair(_subst(m.left, mapping), _subst(m.right, mapping))
    if isinstance(m, App):
        return App(_subst(m.fun, mapping), _subst(m.arg, mapping))
    names = pattern_names(m.pat)
    inner = {k: v for k, v in mapping.items() if k not in names}
    if not inner:
        return m
    replacement_fv = set()
    for v in inner.values():
        replacement_fv.update(free_vars(v))
    body, pat = m.body, m.pat
    clashes = [n for n in names if n in replacement_fv]
    if clashes:
        avoid = replacement_fv | all_names(m.body) | set(names) | set(inner)
        renaming = {}
        for n in clashes:
            renaming[n] = fresh_name(n, avoid)
            avoid.add(renaming[n])
        body = _subst(body, {n: Var(r) for n, r in renaming.items()})
        new_names = [renaming.get(n, n) for n in names]
        pat = Var(new_names[0]) if isinstance(pat, Var) else Pair(*new_names)
    return Lambda(pat, _subst(body, inner))


def substitute(m: Term, xs, ns) -> Term:
    """Simultaneous capture-avoiding substitution ``m{ns/xs}``.

    Each variable in ``xs`` must occur free exactly once in ``m``, and the
    bit labels of ``m`` and all of ``ns`` must be jointly distinct.
    """
    xs, ns = list(xs), list(ns)
    if len(xs) != len(ns):
        raise SubstitutionError("variable and term lists differ in length")
    if len(set(xs)) != len(xs):
        raise SubstitutionError("substituted variables are not distinct")
    occ = free_occurrences(m)
    for x in xs:
        if occ[x] != 1:
            raise SubstitutionError(f"{x!r} occurs free {occ[x]} times, expected exactly once")
    labels = bit_labels(m)
    for n in ns:
        labels.extend(bit_labels(n))
    if len(labels) != len(set(labels)):
        raise SubstitutionError("bit labels clash")
    return _subst(m, dict(zip(xs, ns)))


def rename_free(m: Term, old: str, new: str) -> Term:
    return _subst(m, {old: Var(new)})


def alpha_eq(m: Term, n: Term) -> bool:
    """Equality up to renaming of bound variables."""

    def go(m, n, env_m, env_n, depth):
        if type(m) is not type(n):
            return False
        if isinstance(m, Var):
            bm, bn = env_m.get(m.name), env_n.get(n.name)
            if bm is None and bn is None:
                return m.name == n.name
            return bm == bn
        if isinstance(m, (BitConst, Gate)):
            return m == n
        if isinstance(m, TensorPair):
            return go(m.left, n.left, env_m, env_n, depth) and go(m.right, n.right, env_m, env_n, depth)
        if isinstance(m, App):
            return go(m.fun, n.fun, env_m, env_n, depth) and go(m.arg, n.arg, env_m, env_n, depth)
        if type(m.pat) is not type(n.pat):
            return False
        env_m, env_n = dict(env_m), dict(env_n)
        for i, (a, b) in enumerate(zip(pattern_names(m.pat), pattern_names(n.pat))):
            env_m[a] = env_n[b] = (depth, i)
        return go(m.body, n.body, env_m, env_n, depth + 1)

    return go(m, n, {}, {}, 0)


def canonical_key(m: Term) -> str:
    """A string that is equal for two terms iff they are alpha-equivalent."""
    counter = iter(range(10**9))

    def go(m, env):
        if isinstance(m, Var):
            return Var(env.get(m.name, m.name))
        if isinstance(m, (BitConst, Gate)):
            return m
        if isinstance(m, TensorPair):
            return TensorPair(go(m.left, env), go(m.right, env))
        if isinstance(m, App):
            return App(go(m.fun, env), go(m.arg, env))
        env = dict(env)
        new = []
        for nm in pattern_names(m.pat):
            env[nm] = f"_{next(counter)}"
            new.append(env[nm])
        pat = Var(new[0]) if isinstance(m.pat, Var) else Pair(*new)
        return Lambda(pat, go(m.body, env))

    return pretty(go(m, {}))


# -- pretty printing -------------------------------------------------------

def pretty_pattern(p: Pattern) -> str:
    return p.name if isinstance(p, Var) else f"<{p.first}, {p.second}>"


def pretty(m: Term) -> str:
    if isinstance(m, Var):
        return m.name
    if isinstance(m, BitConst):
        return f"|{m.value}>_{m.label}"
    if isinstance(m, Gate):
        return m.name
    if isinstance(m, Lambda):
        return f"\\{pretty_pattern(m.pat)}. {pretty(m.body)}"
    if isinstance(m, TensorPair):
        def side(t):
            return f"({pretty(t)})" if isinstance(t, (TensorPair, Lambda)) else pretty(t)
        return f"{side(m.left)} * {side(m.right)}"
    fun = pretty(m.fun)
    if isinstance(m.fun, (Lambda, TensorPair)):
        fun = f"({fun})"
    arg = pretty(m.arg)
    if isinstance(m.arg, (App, Lambda, TensorPair)):
        arg = f"({arg})"
    return f"{fun} {arg}"


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<ket>\|(?P<bit>[01])>(?:_(?P<label>[0-9]+))?)
  | (?P<lam>\\|λ)
  | (?P<arrow>-o|⊸)
  | (?P<star>\*|⊗)
  | (?P<pow>\^)
  | (?P<bitty>𝔹)
  | (?P<num>[0-9]+)
  | (?P<var>[a-z][A-Za-z0-9_']*)
  | (?P<gate>[A-Z][A-Za-z0-9_]*)
  | (?P<punct>[.<>,():])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    bit: int | None = None
    label: int | None = None


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        mo = _TOKEN_RE.match(text, pos)
        if mo is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if mo.group("ws") is None:
            if mo.group("ket") is not None:
                lab = mo.group("label")
                toks.append(_Tok("ket", mo.group(0), line, col, int(mo.group("bit")),
                                 None if lab is None else int(lab)))
            else:
                k = next(k for k in ("lam", "arrow", "star", "pow", "bitty", "num", "var", "gate", "punct")
                         if mo.group(k) is not None)
                toks.append(_Tok(k, mo.group(0), line, col))
        chunk = mo.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = mo.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.kets: list[tuple[_Tok, list]] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{msg}, found {found}", tok.line, tok.col)

    def at(self, kind, text=None):
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind, text=None, what=None):
        if not self.at(kind, text):
            self.error(f"expected {what or text or kind}")
        t = self.tok
        self.i += 1
        return t

    def term(self):
        if self.at("lam"):
            return self.lam()
        left = self.app()
        if self.at("star"):
            self.i += 1
            right = self.lam() if self.at("lam") else self.app()
            if self.at("star"):
                self.error("tensor is non-associative; parenthesize nested pairs")
            return TensorPair(left, right)
        return left

    def lam(self):
        self.expect("lam")
        if self.at("punct", "<"):
            self.i += 1
            a = self.expect("var", what="variable").text
            self.expect("punct", ",")
            btok = self.expect("var", what="variable")
            self.expect("punct", ">")
            if a == btok.text:
                self.error(f"pair pattern binds {a!r} twice", btok)
            pat: Pattern = Pair(a, btok.text)
        else:
            pat = Var(self.expect("var", what="variable or pair pattern").text)
        self.expect("punct", ".")
        return Lambda(pat, self.term())

    def starts_atom(self):
        t = self.tok
        return t.kind in ("var", "gate", "ket") or (t.kind == "punct" and t.text == "(")

    def app(self):
        if not self.starts_atom():
            self.error("expected a term")
        m = self.atom()
        while self.starts_atom():
            m = App(m, self.atom())
        if self.at("lam"):
            m = App(m, self.lam())
        return m

    def atom(self):
        t = self.tok
        self.i += 1
        if t.kind == "var":
            return Var(t.text)
        if t.kind == "gate":
            return Gate(t.text)
        if t.kind == "ket":
            slot = [t.bit, t.label]
            self.kets.append((t, slot))
            return slot
        m = self.term()
        self.expect("punct", ")")
        return m


def _assign_labels(m, kets):
    used = set()
    for tok, (bit, label) in kets:
        if label is None:
            continue
        if label in used:
            raise ParseError(f"duplicate bit label {label}", tok.line, tok.col)
        used.add(label)
    nxt = 1
    for _, slot in kets:
        if slot[1] is None:
            while nxt in used:
                nxt += 1
            slot[1] = nxt
            used.add(nxt)

    def build(m):
        if isinstance(m, list):
            return BitConst(m[0], m[1])
        if isinstance(m, TensorPair):
            return TensorPair(build(m.left), build(m.right))
        if isinstance(m, App):
            return App(build(m.fun), build(m.arg))
        if isinstance(m, Lambda):
            return Lambda(m.pat, build(m.body))
        return m

    return build(m)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    m = p.term()
    if not p.at("eof"):
        p.error("expected end of input")
    return _assign_labels(m, p.kets)


class _TypeParser(_Parser):
    def type_(self):
        left = self.tensor()
        if self.at("arrow"):
            self.i += 1
            return Arrow(left, self.type_())
        return left

    def tensor(self):
        left = self.base()
        if self.at("star"):
            self.i += 1
            return Tensor(left, self.tensor())
        return left

    def base(self):
        t = self.tok
        if t.kind == "punct" and t.text == "(":
            self.i += 1
            ty = self.type_()
            self.expect("punct", ")")
            return ty
        if t.kind == "bitty" or (t.kind == "gate" and t.text == "B"):
            self.i += 1
            if self.at("pow"):
                self.i += 1
                n = self.expect("num", what="exponent")
                if int(n.text) < 1:
                    self.error("exponent must be positive", n)
                return bits(int(n.text))
            return BIT
        self.error("expected a type")


def parse_type(text: str) -> Type:
    p = _TypeParser(text)
    t = p.type_()
    if not p.at("eof"):
        p.error("expected end of type")
    return t


def parse_env(text: str) -> list[tuple[str, Type]]:
    """Parse ``x:B, f:B -o B`` into an ordered environment.

    Entries are split on commas at parenthesis depth zero.
    """
    entries, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            entries.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        entries.append(cur)
    env = []
    for e in entries:
        name, sep, ty = e.partition(":")
        name = name.strip()
        if not sep or not re.fullmatch(r"[a-z][A-Za-z0-9_']*", name):
            raise ParseError(f"bad environment entry {e.strip()!r}")
        if any(n == name for n, _ in env):
            raise ParseError(f"variable {name!r} bound twice in environment")
        env.append((name, parse_type(ty)))
    return env


def check_labels(m: Term) -> None:
    labels = bit_labels(m)
    dup = [l for l, c in Counter(labels).items() if c > 1]
    if dup:
        raise LabelError(f"bit labels not distinct: {sorted(dup)}")
