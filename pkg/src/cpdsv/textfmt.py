"""Text format for concurrent pushdown systems and bad-state properties.

The format has four sections, in order::

    shared: idle busy done ;            # shared states, first one need not be initial
    init: idle | a, eps ;               # initial shared state and one word per thread
    thread worker {                     # one block per thread, in order
        alphabet: a b ;
        (idle, a) -> (busy, b a) ;      # push: new top written first
        (busy, b) -> (busy, eps) ;      # pop
        (*, a) -> (*, b) ;              # wildcard shared state, expands to all
    }
    bad: (done | b, *) ;                # zero or more bad visible-state patterns

`eps` denotes the empty word, `#` starts a comment, whitespace is free-form.
A `*` on a rule's left shared position ranges over all shared states; `*` on
the right refers back to the one bound on the left.  Stack symbol names are
scoped per thread: the same name in two threads denotes two distinct symbols.
"""

import re

from .model import (Action, CPDS, PDS, SharedState, StackSymbol, VisibleState,
                    EMPTY, validate)

# Wildcard marker used in property patterns (distinct from EMPTY/None).
ANY = "*"


class ParseError(Exception):
    """A syntax error with its source position."""

    def __init__(self, message, line, column):
        super().__init__("line %d, column %d: %s" % (line, column, message))
        self.message = message
        self.line = line
        self.column = column


class ValidationError(Exception):
    """A parsed but ill-formed system; carries all diagnostics."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class PropertySpec:
    """A disjunction of visible-state patterns.

    Each pattern is (shared, tops) where shared is a SharedState or ANY and
    each top is a StackSymbol, EMPTY or ANY.
    """

    def __init__(self, patterns=()):
        self.patterns = tuple(patterns)

    def __eq__(self, other):
        return isinstance(other, PropertySpec) and self.patterns == other.patterns

    def __hash__(self):
        return hash(self.patterns)

    def __bool__(self):
        return bool(self.patterns)

    def __repr__(self):
        return "PropertySpec(%r)" % (self.patterns,)


def matches(prop, v):
    """True iff some pattern of `prop` matches visible state `v` positionwise."""
    for shared, tops in prop.patterns:
        if shared is not ANY and shared != v.q:
            continue
        if len(tops) != len(v.tops):
            continue
        if all(p is ANY or p == t for p, t in zip(tops, v.tops)):
            return True
    return False


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<punct>->|[(){};,|*:])
  | (?P<name>[A-Za-z0-9_.'\-]+)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        lexeme = m.group(0)
        if not m.group("ws"):
            kind = "punct" if m.group("punct") else "name"
            tokens.append((kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def fail(self, message):
        _, _, line, col = self.peek()
        raise ParseError(message, line, col)

    def expect(self, lexeme):
        kind, lex, line, col = self.next()
        if lex != lexeme:
            raise ParseError("expected %r, found %r" % (lexeme, lex or "end of input"), line, col)

    def at(self, lexeme):
        return self.peek()[1] == lexeme

    def name(self, what):
        kind, lex, line, col = self.next()
        if kind != "name":
            raise ParseError("expected %s, found %r" % (what, lex or "end of input"), line, col)
        return lex

    def names_until_semicolon(self, what):
        out = []
        while not self.at(";"):
            if self.peek()[0] == "eof":
                self.fail("expected ';'")
            out.append(self.name(what))
        self.expect(";")
        return out


def parse_cpds(text):
    """Parse a system description; returns (CPDS, PropertySpec).

    Raises ParseError on malformed syntax and ValidationError when the parsed
    system violates structural rules (undeclared names, empty alphabets,
    never-enabled rules, ...).
    """
    p = _Parser(text)
    diags = []

    p.expect("shared")
    p.expect(":")
    shared_names = p.names_until_semicolon("shared state name")
    if not shared_names:
        diags.append("no shared states declared")
    shared = tuple(SharedState(i, n) for i, n in enumerate(shared_names))
    by_name = {}
    for q in shared:
        by_name.setdefault(q.name, q)
    if len(by_name) != len(shared):
        diags.append("duplicate shared state names")

    p.expect("init")
    p.expect(":")
    init_name = p.name("initial shared state")
    initial = by_name.get(init_name)
    if initial is None:
        diags.append("initial shared state %r is not declared" % init_name)
        initial = SharedState(0, init_name)
    p.expect("|")
    init_words = [[]]
    while not p.at(";"):
        if p.at(","):
            p.next()
            init_words.append([])
        else:
            init_words[-1].append(p.name("stack symbol"))
    p.expect(";")

    threads = []          # (thread name, symbol table, raw rules)
    while p.at("thread"):
        p.next()
        tname = p.name("thread name")
        p.expect("{")
        symbols = {}
        if p.at("alphabet"):
            p.next()
            p.expect(":")
            i = len(threads)
            for n in p.names_until_semicolon("stack symbol name"):
                if n == "eps":
                    diags.append("thread %s: 'eps' cannot be declared as a symbol" % tname)
                elif n in symbols:
                    diags.append("thread %s: duplicate symbol %r" % (tname, n))
                else:
                    symbols[n] = StackSymbol(i, len(symbols), n)
            if not symbols:
                diags.append("thread %s: empty alphabet" % tname)
        else:
            diags.append("thread %s: missing alphabet declaration" % tname)
        rules = []
        while p.at("("):
            rules.append(_parse_rule(p))
        p.expect("}")
        threads.append((tname, symbols, rules))
    if not threads:
        p.fail("expected at least one 'thread' block")

    patterns = []
    while p.at("bad"):
        p.next()
        p.expect(":")
        p.expect("(")
        qpat = _parse_pattern_atom(p)
        p.expect("|")
        tops = [_parse_pattern_atom(p)]
        while p.at(","):
            p.next()
            tops.append(_parse_pattern_atom(p))
        p.expect(")")
        p.expect(";")
        patterns.append((qpat, tuple(tops)))
    if p.peek()[0] != "eof":
        p.fail("unexpected %r after the last section" % p.peek()[1])

    # Resolution phase: intern names, expand wildcards, collect diagnostics.
    pds_list = []
    for i, (tname, symbols, rules) in enumerate(threads):
        actions = []
        seen = set()
        for rule in rules:
            for act in _ground_actions(rule, tname, shared, by_name, symbols, diags):
                if act not in seen:
                    seen.add(act)
                    actions.append(act)
        pds_list.append(PDS(shared, tuple(symbols.values()), tuple(actions), initial))

    if len(init_words) != len(threads):
        diags.append("init line has %d words for %d threads" % (len(init_words), len(threads)))
    stacks = []
    for i, word in enumerate(init_words):
        if i >= len(threads):
            break
        symbols = threads[i][1]
        stack = []
        for n in word:
            if n == "eps":
                continue
            sym = symbols.get(n)
            if sym is None:
                diags.append("init word for thread %s uses undeclared symbol %r" % (threads[i][0], n))
            else:
                stack.append(sym)
        stacks.append(tuple(stack))
    while len(stacks) < len(threads):
        stacks.append(())

    resolved = []
    for qpat, tops in patterns:
        q = ANY if qpat == "*" else by_name.get(qpat)
        if q is None:
            diags.append("bad pattern references undeclared shared state %r" % qpat)
            continue
        if len(tops) != len(threads):
            diags.append("bad pattern has %d top positions for %d threads" % (len(tops), len(threads)))
            continue
        row = []
        ok = True
        for i, t in enumerate(tops):
            if t == "*":
                row.append(ANY)
            elif t == "eps":
                row.append(EMPTY)
            else:
                sym = threads[i][1].get(t)
                if sym is None:
                    diags.append("bad pattern references undeclared symbol %r (thread %s)"
                                 % (t, threads[i][0]))
                    ok = False
                else:
                    row.append(sym)
        if ok:
            resolved.append((q, tuple(row)))

    cpds = CPDS(shared, initial, tuple(pds_list), tuple(stacks))
    diags.extend(validate(cpds))
    if diags:
        raise ValidationError(diags)
    return cpds, PropertySpec(resolved)


def _parse_rule(p):
    """Parse one rule into raw name tuples: (lq, ltop, rq, rword)."""
    p.expect("(")
    if p.at("*"):
        p.next()
        lq = "*"
    else:
        lq = p.name("shared state")
    p.expect(",")
    ltop = p.name("top symbol or 'eps'")
    p.expect(")")
    p.expect("->")
    p.expect("(")
    if p.at("*"):
        p.next()
        rq = "*"
    else:
        rq = p.name("shared state")
    p.expect(",")
    rword = []
    while not p.at(")"):
        rword.append(p.name("stack symbol or 'eps'"))
    p.expect(")")
    p.expect(";")
    return (lq, ltop, rq, rword)


def _parse_pattern_atom(p):
    if p.at("*"):
        p.next()
        return "*"
    return p.name("name, 'eps' or '*'")


def _ground_actions(rule, tname, shared, by_name, symbols, diags):
    """Expand one raw rule to ground Actions, reporting problems into diags."""
    lq, ltop, rq, rword = rule
    where = "thread %s, rule (%s,%s) -> (%s,%s)" % (tname, lq, ltop, rq, " ".join(rword) or "eps")

    if ltop == "eps":
        top = EMPTY
    else:
        top = symbols.get(ltop)
        if top is None:
            diags.append("%s: undeclared top symbol %r" % (where, ltop))
            return
    word = []
    for n in rword:
        if n == "eps":
            if len(rword) > 1:
                diags.append("%s: 'eps' cannot appear in a longer word" % where)
                return
            break
        sym = symbols.get(n)
        if sym is None:
            diags.append("%s: undeclared symbol %r" % (where, n))
            return
        word.append(sym)
    if len(word) > 2:
        diags.append("%s: pushes at most two symbols" % where)
        return
    word = tuple(word)

    if lq == "*":
        lhs_states = list(shared)
    else:
        q = by_name.get(lq)
        if q is None:
            diags.append("%s: undeclared shared state %r" % (where, lq))
            return
        lhs_states = [q]

    for q in lhs_states:
        if rq == "*":
            if lq != "*":
                diags.append("%s: '*' on the right requires '*' on the left" % where)
                return
            q2 = q
        else:
            q2 = by_name.get(rq)
            if q2 is None:
                diags.append("%s: undeclared shared state %r" % (where, rq))
                return
        act = Action(q, top, q2, word)
        if act.lhs_top is EMPTY and len(act.rhs_word) > 1:
            diags.append("%s: never-enabled rule (empty-stack lhs with 2-symbol rhs)" % where)
            return
        yield act


def serialize_cpds(cpds, prop=None):
    """Render a system (and optional property) back to text.

    parse_cpds(serialize_cpds(c, p)) yields an isomorphic system: same
    indices, same actions, equal property.
    """
    lines = []
    lines.append("shared: %s ;" % " ".join(q.name for q in cpds.shared))
    words = ", ".join(
        " ".join(s.name for s in w) if w else "eps" for w in cpds.initial_stacks)
    lines.append("init: %s | %s ;" % (cpds.initial_shared.name, words))
    for i, pds in enumerate(cpds.threads):
        lines.append("thread t%d {" % (i + 1))
        lines.append("    alphabet: %s ;" % " ".join(s.name for s in pds.alphabet))
        for act in pds.program:
            top = "eps" if act.lhs_top is EMPTY else act.lhs_top.name
            word = " ".join(s.name for s in act.rhs_word) or "eps"
            lines.append("    (%s, %s) -> (%s, %s) ;"
                         % (act.lhs_state.name, top, act.rhs_state.name, word))
        lines.append("}")
    if prop:
        for q, tops in prop.patterns:
            qs = "*" if q is ANY else q.name
            ts = ", ".join("*" if t is ANY else ("eps" if t is EMPTY else t.name) for t in tops)
            lines.append("bad: (%s | %s) ;" % (qs, ts))
    return "\n".join(lines) + "\n"


def parse_file(path):
    with open(path, encoding="utf-8") as handle:
        return parse_cpds(handle.read())
