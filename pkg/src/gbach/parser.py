"""Front end: lexer, recursive-descent parser and static checks.

Concrete syntax (``//`` comments, declarations end with ``.``)::

    gprim move, hide.
    eset RCInt = {1, 2, 3, 4, 5, 6}.
    map down_truck : RCInt -> RCInt.
    eqn down_truck(1) = 4. down_truck(2) = 5. down_truck(3) = 6.
    proc P(r: RCInt, c: RCInt) = (r > 1) -> get(free(pred(r), c)); P(pred(r), c).
    run tell(a) || [get(a) -> tell(b), move(b)].
    formula solved = Reach(#out = 1).

Agent operators from loosest to tightest: ``+``, ``||``, ``;``.  A
conditional ``c -> A <> B`` takes sequential bodies; ``c -> A`` omits the
else branch.  Guarded lists are written ``[p -> p1, ..., pn]`` or ``[p]``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GBachError, ProgramError
from .logic import (
    And,
    Arith,
    Cmp,
    Const,
    Count,
    Next,
    Not,
    Num,
    Or,
    Prop,
    Until,
    desugar_reach,
    resolve_formula,
)
from .syntax import (
    E,
    Call,
    Choice,
    Cond,
    Conj,
    Disj,
    GuardedList,
    Neg,
    Par,
    Prim,
    ProcDef,
    Program,
    Seq,
    Test,
    Truth,
    children,
    walk,
)
from .terms import Atom, Compound, MapApp, MapDef, SetDef, Token, Var

KEYWORDS = {
    "eset", "map", "eqn", "proc", "gprim", "run", "formula",
    "tell", "ask", "nask", "get", "true", "false",
    "Next", "Until", "Reach", "E",
}
TOP_LEVEL = {"eset", "map", "eqn", "proc", "gprim", "run", "formula"}
STORE_PRIMS = ("tell", "ask", "nask", "get")
RELOPS = ("=", "!=", "<", "<=", ">", ">=")

_SYMBOLS = sorted(
    ["->", "<>", "||", "!=", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ".",
     ";", ":", "#", "+", "-", "*", "=", "<", ">", "&", "|", "!"],
    key=len,
    reverse=True,
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0
    source: str = "<string>"

    def __str__(self):
        return f"{self.source}:{self.line}:{self.col}: {self.code}: {self.message}"


@dataclass(frozen=True)
class Tok:
    kind: str  # INT ID KW SYM EOF
    text: str
    line: int
    col: int


class _Fail(Exception):
    def __init__(self, diag):
        self.diag = diag


def tokenize(text: str, source: str = "<string>"):
    """Return (tokens, diagnostics); unknown characters are reported and skipped."""
    toks, diags = [], []
    i, line, col, n = 0, 1, 1, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            toks.append(Tok("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(Tok("KW" if word in KEYWORDS else "ID", word, line, col))
            col += j - i
            i = j
            continue
        if ch == "◇":  # the lozenge, accepted as an alias of <>
            toks.append(Tok("SYM", "<>", line, col))
            i, col = i + 1, col + 1
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Tok("SYM", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            diags.append(Diagnostic("SyntaxError", f"unexpected character {ch!r}", line, col, source))
            i, col = i + 1, col + 1
    toks.append(Tok("EOF", "", line, col))
    return toks, diags


class Parser:
    def __init__(self, text: str, source: str = "<string>"):
        self.source = source
        self.toks, self.diags = tokenize(text, source)
        self.pos = 0
        self.maps: dict = {}
        self.procs: dict = {}
        self.gprims: list = []
        self.formals: set = set()
        self._prescan()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Tok:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "KW") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def fail(self, msg: str, tok: Tok | None = None, code: str = "SyntaxError"):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise _Fail(Diagnostic(code, f"{msg}, found {found}", tok.line, tok.col, self.source))

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> Tok:
        if self.tok.kind != "ID":
            self.fail("expected an identifier")
        t = self.tok
        self.pos += 1
        return t

    # -- prescan: names declared anywhere in the file ----------------------

    def _prescan(self):
        toks = self.toks
        for i, t in enumerate(toks):
            if t.kind != "KW" or i + 1 >= len(toks) or toks[i + 1].kind != "ID":
                continue
            name = toks[i + 1].text
            if t.text == "map":
                self.maps.setdefault(name, None)
            elif t.text == "proc":
                self.procs.setdefault(name, None)
            elif t.text == "gprim":
                j = i + 1
                while j < len(toks) and toks[j].kind == "ID":
                    self.gprims.append(toks[j].text)
                    if toks[j + 1].kind == "SYM" and toks[j + 1].text == ",":
                        j += 2
                    else:
                        break

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        prog = Program(source=self.source)
        prog.gprims = list(dict.fromkeys(self.gprims))
        pending_eqns = []
        seen_sets, seen_maps = set(), set()
        while self.tok.kind != "EOF":
            start = self.tok
            try:
                if self.accept("eset"):
                    s = self.set_decl(start)
                    if s.name in seen_sets:
                        self.diag("DuplicateDefinition", f"set {s.name} defined twice", start)
                    seen_sets.add(s.name)
                    prog.sets.append(s)
                elif self.accept("map"):
                    m = self.map_decl(start)
                    if m.name in seen_maps:
                        self.diag("DuplicateDefinition", f"map {m.name} defined twice", start)
                    seen_maps.add(m.name)
                    prog.maps.append(m)
                elif self.accept("eqn"):
                    pending_eqns.extend(self.eqn_block())
                elif self.accept("proc"):
                    p = self.proc_decl(start)
                    if p.name in prog.procs:
                        self.diag("DuplicateDefinition", f"procedure {p.name} defined twice", start)
                    prog.procs[p.name] = p
                elif self.accept("gprim"):
                    self.ident()
                    while self.accept(","):
                        self.ident()
                    self.expect(".")
                elif self.accept("run"):
                    a = self.agent()
                    self.expect(".")
                    if prog.main is not None:
                        self.diag("DuplicateDefinition", "more than one run declaration", start)
                    prog.main = a
                elif self.accept("formula"):
                    name = self.ident().text
                    self.expect("=")
                    f = self.tf()
                    self.expect(".")
                    if name in prog.formulas:
                        self.diag("DuplicateDefinition", f"formula {name} defined twice", start)
                    prog.formulas[name] = f
                else:
                    self.fail("expected a declaration (eset, map, eqn, proc, gprim, run, formula)")
            except _Fail as e:
                self.diags.append(e.diag)
                self._recover()
            except RecursionError:
                self.diag("SyntaxError", "nesting too deep", start)
                self._recover()
        maps = {m.name: m for m in prog.maps}
        for name, lhs, rhs, tok in pending_eqns:
            m = maps.get(name)
            if m is None:
                self.diag("UnresolvedIdentifier", f"equation for undeclared map {name}", tok)
                continue
            m.equations.append((lhs, rhs))
            m.eqn_lines.append(tok.line)
        return prog

    def diag(self, code, msg, tok):
        self.diags.append(Diagnostic(code, msg, tok.line, tok.col, self.source))

    def _recover(self):
        if self.tok.kind != "EOF":
            self.pos += 1
        while self.tok.kind != "EOF" and not (self.tok.kind == "KW" and self.tok.text in TOP_LEVEL):
            self.pos += 1

    def set_decl(self, start) -> SetDef:
        name = self.ident().text
        self.expect("=")
        self.expect("{")
        elems = []
        if not self.accept("}"):
            elems.append(self.atom())
            while self.accept(","):
                elems.append(self.atom())
            self.expect("}")
        self.expect(".")
        return SetDef(name, tuple(elems), start.line)

    def atom(self):
        t = self.tok
        if self.accept("-"):
            if self.tok.kind != "INT":
                self.fail("expected an integer after '-'")
            v = -int(self.tok.text)
            self.pos += 1
            return Atom(v)
        if t.kind == "INT":
            self.pos += 1
            return Atom(int(t.text))
        if t.kind == "ID":
            self.pos += 1
            return Token(t.text)
        self.fail("expected an integer or a token")

    def map_decl(self, start) -> MapDef:
        name = self.ident().text
        self.expect(":")
        dom = [self.ident().text]
        while self.accept("#"):
            dom.append(self.ident().text)
        self.expect("->")
        cod = self.ident().text
        self.expect(".")
        return MapDef(name, tuple(dom), cod, [], start.line)

    def eqn_block(self):
        out = []
        while self.tok.kind == "ID":
            t = self.ident()
            self.expect("(")
            args = [self.atom()]
            while self.accept(","):
                args.append(self.atom())
            self.expect(")")
            self.expect("=")
            rhs = self.term()
            self.expect(".")
            out.append((t.text, tuple(args), rhs, t))
        if not out:
            self.fail("expected at least one equation")
        return out

    def proc_decl(self, start) -> ProcDef:
        name = self.ident().text
        params = []
        self.expect("(")
        if not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        self.expect("=")
        names = [p for p, _ in params]
        if len(set(names)) != len(names):
            self.diag("DuplicateDefinition", f"repeated parameter name in {name}", start)
        self.formals = set(names)
        try:
            body = self.agent()
        finally:
            self.formals = set()
        self.expect(".")
        return ProcDef(name, tuple(params), body, start.line)

    def param(self):
        n = self.ident().text
        self.expect(":")
        return (n, self.ident().text)

    # -- terms -------------------------------------------------------------

    def term(self):
        t = self.tok
        if t.kind == "INT" or self.at("-"):
            return self.atom()
        if t.kind != "ID":
            self.fail("expected a term")
        self.pos += 1
        if self.accept("("):
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            if t.text in self.maps:
                return MapApp(t.text, tuple(args))
            return Compound(t.text, tuple(args))
        if t.text in self.formals:
            return Var(t.text)
        return Token(t.text)

    # -- agents ------------------------------------------------------------

    def agent(self):
        left = self.par_level()
        if self.accept("+"):
            return Choice(left, self.agent())
        return left

    def par_level(self):
        left = self.seq_level()
        if self.accept("||"):
            return Par(left, self.par_level())
        return left

    def seq_level(self):
        left = self.unary()
        if self.accept(";"):
            return Seq(left, self.seq_level())
        return left

    def unary(self):
        t = self.tok
        if t.kind in ("ID", "INT") or self.at("(") or self.at("!") or self.at("-") \
                or self.at("true") or self.at("false"):
            save, ndiag = self.pos, len(self.diags)
            try:
                c = self.condition()
                if self.at("->"):
                    self.pos += 1
                    then = self.seq_level()
                    orelse = self.seq_level() if self.accept("<>") else None
                    return Cond(c, then, orelse, t.line, t.col)
            except _Fail:
                pass
            self.pos = save
            del self.diags[ndiag:]
        return self.primary()

    def primary(self):
        t = self.tok
        if self.accept("("):
            a = self.agent()
            self.expect(")")
            return a
        if self.accept("["):
            return self.guarded_list()
        if self.accept("E"):
            return E
        if t.kind == "KW" and t.text in STORE_PRIMS:
            return self.prim()
        if t.kind == "ID":
            if t.text in self.gprims:
                return self.prim()
            self.pos += 1
            args = self.arg_list()
            return Call(t.text, args, t.line, t.col)
        self.fail("expected an agent")

    def arg_list(self):
        args = []
        if self.accept("("):
            if not self.at(")"):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
            self.expect(")")
        return tuple(args)

    def prim(self) -> Prim:
        t = self.tok
        if t.kind == "KW" and t.text in STORE_PRIMS:
            self.pos += 1
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return Prim(t.text, t.text, (arg,), t.line, t.col)
        if t.kind == "ID" and t.text in self.gprims:
            self.pos += 1
            return Prim("gprim", t.text, self.arg_list(), t.line, t.col)
        self.fail("expected a primitive (tell, ask, nask, get or a declared gprim)")

    def guarded_list(self):
        guard = self.prim()
        tail = []
        if self.accept("->"):
            tail.append(self.prim())
            while self.accept(","):
                tail.append(self.prim())
        self.expect("]")
        return GuardedList(guard, tuple(tail))

    # -- conditions --------------------------------------------------------

    def condition(self):
        left = self.cond_and()
        while self.accept("|"):
            left = Disj(left, self.cond_and())
        return left

    def cond_and(self):
        left = self.cond_not()
        while self.accept("&"):
            left = Conj(left, self.cond_not())
        return left

    def cond_not(self):
        if self.accept("!"):
            return Neg(self.cond_not())
        if self.accept("("):
            c = self.condition()
            self.expect(")")
            return c
        if self.accept("true"):
            return Truth(True)
        if self.accept("false"):
            return Truth(False)
        left = self.term()
        op = self.tok.text
        if self.tok.kind != "SYM" or op not in RELOPS:
            self.fail("expected a comparison operator")
        self.pos += 1
        return Test(op, left, self.term())

    # -- formulas ----------------------------------------------------------

    def tf(self):
        if self.accept("Next"):
            return Next(self.tf())
        if self.accept("Reach"):
            self.expect("(")
            pf = self.pf()
            self.expect(")")
            return desugar_reach(pf)
        pf = self.pf()
        if self.accept("Until"):
            return Until(pf, self.tf())
        return Prop(pf)

    def pf(self):
        t = self.tok
        e = self.p_or()
        if not _is_bool(e):
            self.fail("expected a propositional formula", t, "TypeMismatch")
        return e

    def _bool(self, e, t):
        if not _is_bool(e):
            self.fail("boolean operand required", t, "TypeMismatch")
        return e

    def _int(self, e, t):
        if _is_bool(e):
            self.fail("integer operand required", t, "TypeMismatch")
        return e

    def p_or(self):
        t = self.tok
        left = self.p_and()
        while self.at("|"):
            op = self.tok
            self.pos += 1
            left = Or(self._bool(left, t), self._bool(self.p_and(), op))
        return left

    def p_and(self):
        t = self.tok
        left = self.p_not()
        while self.at("&"):
            op = self.tok
            self.pos += 1
            left = And(self._bool(left, t), self._bool(self.p_not(), op))
        return left

    def p_not(self):
        t = self.tok
        if self.accept("!"):
            return Not(self._bool(self.p_not(), t))
        return self.p_cmp()

    def p_cmp(self):
        t = self.tok
        left = self.p_arith()
        if self.tok.kind == "SYM" and self.tok.text in RELOPS:
            op = self.tok
            self.pos += 1
            right = self.p_arith()
            return Cmp(op.text, self._int(left, t), self._int(right, op))
        return left

    def p_arith(self):
        t = self.tok
        left = self.p_mul()
        while self.at("+") or self.at("-"):
            op = self.tok
            self.pos += 1
            left = Arith(op.text, self._int(left, t), self._int(self.p_mul(), op))
        return left

    def p_mul(self):
        t = self.tok
        left = self.p_unary()
        while self.at("*"):
            op = self.tok
            self.pos += 1
            left = Arith("*", self._int(left, t), self._int(self.p_unary(), op))
        return left

    def p_unary(self):
        t = self.tok
        if self.accept("-"):
            if self.tok.kind == "INT":
                v = int(self.tok.text)
                self.pos += 1
                return Num(-v)
            return Arith("-", Num(0), self._int(self.p_unary(), t))
        if t.kind == "INT":
            self.pos += 1
            return Num(int(t.text))
        if self.accept("#"):
            return Count(self.term())
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        if self.accept("("):
            e = self.p_or()
            self.expect(")")
            return e
        self.fail("expected an expression")


def _is_bool(e) -> bool:
    return isinstance(e, (Cmp, And, Or, Not, Const))


# ---------------------------------------------------------------------------
# entry points


def parse_program(text, source: str = "<string>", check: bool = True) -> Program:
    """Parse ``text`` into a resolved :class:`Program`.

    Raises :class:`ProgramError` carrying every diagnostic found.  With
    ``check=False`` only syntax errors are fatal, which lets callers run
    :func:`static_check` themselves.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProgramError([Diagnostic("SyntaxError", f"invalid UTF-8: {e.reason}", 1, 1, source)])
    p = Parser(text, source)
    prog = p.program()
    if p.diags:
        raise ProgramError(p.diags)
    if check:
        diags = static_check(prog)
        if diags:
            raise ProgramError(diags)
        load_formulas(prog)
    return prog


def parse_agent(text: str, prog: Program | None = None):
    """Parse a standalone agent in the context of ``prog``'s declarations."""
    p = Parser(text)
    if prog is not None:
        p.maps.update({m.name: None for m in prog.maps})
        p.procs.update({n: None for n in prog.procs})
        p.gprims.extend(prog.gprims)
    try:
        a = p.agent()
        if p.tok.kind != "EOF":
            p.fail("unexpected trailing input")
    except _Fail as e:
        raise ProgramError([e.diag])
    return a


def parse_formula(text: str, prog: Program | None = None):
    """Parse a temporal formula; counted terms are rewritten against ``prog``."""
    p = Parser(text)
    if prog is not None:
        p.maps.update({m.name: None for m in prog.maps})
    try:
        f = p.tf()
        if p.tok.kind != "EOF":
            p.fail("unexpected trailing input")
    except _Fail as e:
        raise ProgramError([e.diag])
    if prog is not None:
        try:
            f = resolve_formula(f, prog.defs)
        except GBachError as e:
            raise ProgramError([Diagnostic(type(e).__name__, str(e), 1, 1)])
    return f


def parse_prop(text: str, prog: Program | None = None):
    """Parse a propositional state formula."""
    p = Parser(text)
    if prog is not None:
        p.maps.update({m.name: None for m in prog.maps})
    try:
        f = p.pf()
        if p.tok.kind != "EOF":
            p.fail("unexpected trailing input")
    except _Fail as e:
        raise ProgramError([e.diag])
    if prog is not None:
        try:
            f = resolve_formula(f, prog.defs)
        except GBachError as e:
            raise ProgramError([Diagnostic(type(e).__name__, str(e), 1, 1)])
    return f


def parse_term(text: str, prog: Program | None = None):
    p = Parser(text)
    if prog is not None:
        p.maps.update({m.name: None for m in prog.maps})
    try:
        t = p.term()
        if p.tok.kind != "EOF":
            p.fail("unexpected trailing input")
    except _Fail as e:
        raise ProgramError([e.diag])
    return t


def load_formulas(prog: Program):
    """Rewrite counted terms of every declared formula; errors become diagnostics."""
    diags = []
    for name, f in list(prog.formulas.items()):
        try:
            prog.formulas[name] = resolve_formula(f, prog.defs)
        except GBachError as e:
            diags.append(Diagnostic(type(e).__name__, f"formula {name}: {e}", 0, 0, prog.source))
    if diags:
        raise ProgramError(diags)


# ---------------------------------------------------------------------------
# static checks


def static_check(prog: Program) -> list:
    """Return the list of static diagnostics for ``prog``; never raises."""
    return _Checker(prog).run()


class _Checker:
    def __init__(self, prog: Program):
        self.prog = prog
        self.sets = {s.name: s for s in prog.sets}
        self.maps = {m.name: m for m in prog.maps}
        self.diags = []

    def add(self, code, msg, line=0, col=0):
        self.diags.append(Diagnostic(code, msg, line, col, self.prog.source))

    def run(self):
        for s in self.prog.sets:
            if not s.elements:
                self.add("EmptySet", f"set {s.name} has no elements", s.line)
            if len(set(s.elements)) != len(s.elements):
                self.add("DuplicateElement", f"set {s.name} lists an element twice", s.line)
        for m in self.prog.maps:
            self.check_map(m)
        for p in self.prog.procs.values():
            for pname, sname in p.params:
                if sname not in self.sets:
                    self.add("UnresolvedIdentifier", f"unknown set {sname} for parameter {pname} of {p.name}", p.line)
            env = {n: s for n, s in p.params}
            self.check_agent(p.body, env, p.line)
        if self.prog.main is not None:
            self.check_agent(self.prog.main, {}, 0)
        self.check_guardedness()
        return self.diags

    def check_map(self, m: MapDef):
        for s in (*m.domain, m.codomain):
            if s not in self.sets:
                self.add("UnresolvedIdentifier", f"unknown set {s} in signature of map {m.name}", m.line)
        lines = m.eqn_lines or [m.line] * len(m.equations)
        seen = {}
        for (lhs, rhs), line in zip(m.equations, lines):
            if len(lhs) != m.arity:
                self.add("ArityMismatch", f"equation for {m.name} has {len(lhs)} arguments, expected {m.arity}", line)
                continue
            key = tuple(lhs)
            if key in seen:
                args = ", ".join(map(str, lhs))
                self.add("OverlappingEquations",
                         f"{m.name}({args}) already defined at line {seen[key]}", line)
            else:
                seen[key] = line
            for a, sname in zip(lhs, m.domain):
                s = self.sets.get(sname)
                if s is not None and a not in s.elements:
                    self.add("TypeMismatch", f"{a} is not an element of {sname} in equation for {m.name}", line)
            self.check_term(rhs, {}, line, 0)

    def check_term(self, t, env, line, col):
        if isinstance(t, MapApp):
            m = self.maps.get(t.name)
            if m is not None and len(t.args) != m.arity:
                self.add("ArityMismatch", f"map {t.name} takes {m.arity} arguments, got {len(t.args)}", line, col)
        if isinstance(t, (MapApp, Compound)):
            for a in t.args:
                self.check_term(a, env, line, col)

    def check_agent(self, a, env, line):
        for node in walk(a):
            if isinstance(node, Prim):
                for t in node.args:
                    self.check_term(t, env, node.line or line, node.col)
                if node.kind == "gprim" and node.name not in self.prog.gprims:
                    self.add("UnresolvedIdentifier", f"undeclared graphical primitive {node.name}", node.line, node.col)
            elif isinstance(node, Call):
                p = self.prog.procs.get(node.name)
                ln = node.line or line
                if p is None:
                    self.add("UnresolvedIdentifier", f"unknown procedure {node.name}", ln, node.col)
                elif len(node.args) != p.arity:
                    self.add("ArityMismatch",
                             f"{node.name} takes {p.arity} arguments, got {len(node.args)}", ln, node.col)
                for t in node.args:
                    self.check_term(t, env, ln, node.col)
            elif isinstance(node, Cond):
                self.check_condition(node.cond, env, node.line or line, node.col)

    def term_type(self, t, env):
        """'int', 'token', 'compound', or None when unknown."""
        if isinstance(t, Atom):
            return "int"
        if isinstance(t, Token):
            return "token"
        if isinstance(t, Compound):
            return "compound"
        if isinstance(t, Var):
            s = self.sets.get(env.get(t.name))
            return None if s is None else ("int" if s.is_numeric() else "token")
        if isinstance(t, MapApp):
            m = self.maps.get(t.name)
            s = self.sets.get(m.codomain) if m else None
            return None if s is None else ("int" if s.is_numeric() else "token")
        return None

    def check_condition(self, c, env, line, col):
        if isinstance(c, Test):
            self.check_term(c.left, env, line, col)
            self.check_term(c.right, env, line, col)
            if c.op not in ("=", "!="):
                for side in (c.left, c.right):
                    ty = self.term_type(side, env)
                    if ty not in ("int", None):
                        self.add("TypeMismatch", f"ordering comparison {c.op} applied to non-integer {side}", line, col)
        elif isinstance(c, (Conj, Disj)):
            self.check_condition(c.left, env, line, col)
            self.check_condition(c.right, env, line, col)
        elif isinstance(c, Neg):
            self.check_condition(c.arg, env, line, col)

    # guardedness: no cycle of procedure calls reachable without a primitive

    def check_guardedness(self):
        procs = self.prog.procs
        graph = {name: _unguarded_calls(p.body, procs) for name, p in procs.items()}
        state = {}
        reported = set()

        def visit(n, stack):
            state[n] = 1
            stack.append(n)
            for m in graph.get(n, ()):
                if m not in graph:
                    continue
                if state.get(m) == 1:
                    cycle = stack[stack.index(m):]
                    for c in cycle:
                        if c not in reported:
                            reported.add(c)
                            self.add("UnguardedProcedure",
                                     f"procedure {c} may call {' -> '.join(cycle + [m])} before any primitive",
                                     procs[c].line)
                elif m not in state:
                    visit(m, stack)
            stack.pop()
            state[n] = 2

        for n in graph:
            if n not in state:
                visit(n, [])


def _unguarded_calls(a, procs, _seen=None) -> set:
    """Names of procedures that ``a`` may call before executing any primitive."""
    if isinstance(a, Call):
        return {a.name}
    if isinstance(a, Seq):
        out = _unguarded_calls(a.first, procs)
        if not _must_act(a.first, procs, set()):
            out |= _unguarded_calls(a.rest, procs)
        return out
    out = set()
    for c in children(a):
        out |= _unguarded_calls(c, procs)
    return out


def _must_act(a, procs, seen) -> bool:
    """True when every completed run of ``a`` executes at least one primitive."""
    if isinstance(a, (Prim, GuardedList)):
        return True
    if isinstance(a, Seq):
        return _must_act(a.first, procs, seen) or _must_act(a.rest, procs, seen)
    if isinstance(a, Par):
        return _must_act(a.left, procs, seen) or _must_act(a.right, procs, seen)
    if isinstance(a, Choice):
        return _must_act(a.left, procs, seen) and _must_act(a.right, procs, seen)
    if isinstance(a, Cond):
        # a false condition without else blocks, so only the taken branches matter
        return _must_act(a.then, procs, seen) and (a.orelse is None or _must_act(a.orelse, procs, seen))
    if isinstance(a, Call):
        p = procs.get(a.name)
        if p is None or a.name in seen:
            return False
        return _must_act(p.body, procs, seen | {a.name})
    return False
