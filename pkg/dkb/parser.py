# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
import re
from collections import namedtuple

from dkb.actions import Action
from dkb.blocking import PathLabel
from dkb.constants import EXISTENTIAL_PREFIX, WILDCARD_NAME
from dkb.exceptions import ParseError
from dkb.kb import (ERROR, BasicConcept, ConceptInclusion, Diagnostic, Functionality, KnowledgeBase, RoleExpr,
                    RoleInclusion, SourceSpan, concept_assertion, role_assertion)
from dkb.query import (IDENTIFIER_REGEX, ConjunctiveQuery, Const, UnionQuery, Var, concept_atom, eq, neq,
                       role_atom)
from dkb.transition import FocusPolicy


log = logging.getLogger('dkb')

TOKEN_REGEX = re.compile(r'''
    (?P<space>\s+)
  | (?P<string>"[^"]*")
  | (?P<op><=|==|!=|[(),&|=\-:;])
  | (?P<name>[A-Za-z_][A-Za-z0-9_.]*(?:\#[0-9]+)?)
''', re.VERBOSE)

SECTION_REGEX = re.compile(r'^\[(?P<section>[a-z]+)\]\s*(?P<rest>.*)$')
KEY_REGEX = re.compile(r'^(?P<key>[a-z]+)\s*:(?P<value>.*)$')
STEP_REGEX = re.compile(r'^step\s*:(?P<value>.*)$')

ACTION_KEYS = ('guard', 'new', 'add', 'del')


class Token(namedtuple('Token', ['kind', 'value', 'column'])):
    __slots__ = ()


class SyntaxProblem(Exception):
    def __init__(self, message, column):
        super(SyntaxProblem, self).__init__(message)
        self.message = message
        self.column = column


def tokenize(text, column=1):
    tokens = []
    position = 0

    while position < len(text):
        match = TOKEN_REGEX.match(text, position)

        if match is None:
            raise SyntaxProblem("unexpected character '%s'" % text[position], column + position)

        kind = match.lastgroup
        if kind != 'space':
            value = match.group(kind)
            if kind == 'string':
                value = value[1:-1]
            tokens.append(Token(kind, value, column + position))

        position = match.end()

    return tokens


def _strip_comment(text):
    """Drops a ``#`` comment. A ``#`` inside quotes or right after a name (``create#2``) is kept."""
    quoted = False

    for position, char in enumerate(text):
        if char == '"':
            quoted = not quoted
        elif char == '#' and not quoted and (position == 0 or text[position - 1].isspace()):
            return text[:position]

    return text


class TokenStream(object):
    def __init__(self, tokens, end_column):
        self.tokens = tokens
        self.position = 0
        self.end_column = end_column

    def peek(self, offset=0):
        index = self.position + offset
        if index < len(self.tokens):
            return self.tokens[index]
        return None

    def at_end(self):
        return self.position >= len(self.tokens)

    def column(self):
        token = self.peek()
        return token.column if token is not None else self.end_column

    def next(self):
        token = self.peek()
        if token is None:
            raise SyntaxProblem("unexpected end of line", self.end_column)
        self.position += 1
        return token

    def accept(self, kind, value=None):
        token = self.peek()
        if token is not None and token.kind == kind and (value is None or token.value == value):
            self.position += 1
            return token
        return None

    def expect(self, kind, value=None, what=None):
        token = self.accept(kind, value)
        if token is None:
            found = self.peek()
            raise SyntaxProblem("expected %s, found %s" % (
                what or value or kind,
                "'%s'" % found.value if found is not None else 'end of line',
            ), self.column())
        return token

    def expect_end(self):
        if not self.at_end():
            token = self.peek()
            raise SyntaxProblem("unexpected '%s'" % token.value, token.column)


def _stream(text, column=1):
    return TokenStream(tokenize(text, column), column + len(text))


def individual_term(token):
    return token.value


def action_term(token):
    if token.kind == 'string':
        return Const(token.value)
    if token.value == WILDCARD_NAME:
        raise SyntaxProblem("'_' is reserved", token.column)
    return Var(token.value)


def query_term(individuals):
    def read(token):
        if token.kind == 'string' or token.value in individuals:
            return Const(token.value)
        if token.value == WILDCARD_NAME:
            raise SyntaxProblem("'_' is reserved", token.column)
        return Var(token.value)
    return read


def _read_term(stream, reader):
    token = stream.peek()
    if token is None or token.kind not in ('name', 'string'):
        raise SyntaxProblem("expected a term", stream.column())
    stream.next()
    return reader(token)


def read_atom(stream, reader, constraints=True):
    """
    ``A(t)``, ``P(t, t)``, ``P-(t, t)`` or, when ``constraints``, ``t == t``
    and ``t != t``. Returns ``(kind, name, inverted, terms)`` for facts.
    """
    following = stream.peek(1)

    if constraints and following is not None and following.kind == 'op' and following.value in ('==', '!='):
        first = _read_term(stream, reader)
        operator = stream.next().value
        second = _read_term(stream, reader)
        return ('eq' if operator == '==' else 'neq', None, False, (first, second))

    name = stream.expect('name', what='a predicate')
    inverted = stream.accept('op', '-') is not None
    stream.expect('op', '(')
    terms = [_read_term(stream, reader)]

    while stream.accept('op', ','):
        terms.append(_read_term(stream, reader))

    stream.expect('op', ')')

    if len(terms) > 2:
        raise SyntaxProblem("'%s' has %d arguments" % (name.value, len(terms)), name.column)
    if inverted and len(terms) != 2:
        raise SyntaxProblem("inverse '%s-' used as a concept" % name.value, name.column)

    return ('fact', name.value, inverted, tuple(terms))


def _query_atom(parsed):
    kind, name, inverted, terms = parsed

    if kind == 'eq':
        return eq(*terms)
    if kind == 'neq':
        return neq(*terms)
    if len(terms) == 1:
        return concept_atom(name, terms[0])
    return role_atom(name, *RoleExpr(name, inverted).orient(*terms))


def _assertion(parsed):
    kind, name, inverted, terms = parsed

    if kind != 'fact':
        return None
    if len(terms) == 1:
        return concept_assertion(name, terms[0])
    return role_assertion(RoleExpr(name, inverted), *terms)


def read_atom_list(stream, reader, constraints=True):
    parsed = []

    if stream.at_end():
        return parsed

    parsed.append(read_atom(stream, reader, constraints))
    while stream.accept('op', ','):
        parsed.append(read_atom(stream, reader, constraints))

    stream.expect_end()
    return parsed


class DkbDocument(object):
    """A knowledge base and its actions, as read from a ``.dkb`` file."""

    def __init__(self, kb=None, actions=(), diagnostics=(), spans=None):
        self.kb = kb or KnowledgeBase()
        self.actions = list(actions)
        self.diagnostics = list(diagnostics)
        self.spans = spans or {}

    def action(self, name):
        for action in self.actions:
            if action.name == name:
                return action
        return None

    def validate(self, strict=None):
        diagnostics = self.kb.validate(strict=strict, spans=self.spans)
        for action in self.actions:
            diagnostics.extend(action.validate(self.spans.get(action)))
        return diagnostics

    def __eq__(self, other):
        if not isinstance(other, DkbDocument):
            return NotImplemented
        return self.kb == other.kb and self.actions == other.actions

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self.kb, tuple(self.actions)))

    def __repr__(self):
        return '<DkbDocument: %r, %d actions>' % (self.kb, len(self.actions))


class _ActionBlock(object):
    def __init__(self, name, span):
        self.name = name
        self.span = span
        self.values = {}


class DocumentParser(object):
    """Reads the ``[tbox]``/``[abox]``/``[action]`` format into a ``DkbDocument``."""

    def __init__(self, text):
        self.text = text
        self.diagnostics = []
        self.spans = {}
        self.tbox_lines = []
        self.abox = []
        self.blocks = []
        self.roles = set()
        self.concepts = set()

    def error(self, message, line, column=1):
        self.diagnostics.append(Diagnostic(ERROR, message, SourceSpan(line, column)))

    def parse(self, strict=None):
        section = None

        for number, raw in enumerate(self.text.splitlines(), 1):
            line = _strip_comment(raw).rstrip()
            stripped = line.strip()

            if not stripped:
                continue

            indent = len(line) - len(line.lstrip()) + 1
            header = SECTION_REGEX.match(stripped)

            if header:
                section = self.open_section(header, number, indent)
                continue

            try:
                if section == 'tbox':
                    self.read_tbox_line(stripped, number, indent)
                elif section == 'abox':
                    self.read_abox_line(stripped, number, indent)
                elif section == 'action' and self.blocks:
                    self.read_action_line(stripped, number, indent)
                elif section is None:
                    self.error("content outside of a section", number, indent)
            except SyntaxProblem as e:
                self.error(e.message, number, e.column)

        tbox = self.build_tbox()
        actions = self.build_actions()
        kb = KnowledgeBase(tbox, self.abox)
        document = DkbDocument(kb, actions, spans=self.spans)

        if not any(d.is_error for d in self.diagnostics):
            for diagnostic in document.validate(strict=strict):
                self.diagnostics.append(diagnostic)

        errors = [d for d in self.diagnostics if d.is_error]
        if errors:
            raise ParseError(errors)

        document.diagnostics = self.diagnostics
        for diagnostic in self.diagnostics:
            log.warning("%s", diagnostic.format())

        return document

    def open_section(self, header, number, column):
        name = header.group('section')
        rest = header.group('rest').strip()

        if name in ('tbox', 'abox'):
            if rest:
                self.error("unexpected '%s' after [%s]" % (rest, name), number, column)
            return name

        if name == 'action':
            if not IDENTIFIER_REGEX.match(rest) or rest == WILDCARD_NAME:
                self.error("[action] needs a name", number, column)
                return None
            if any(block.name == rest for block in self.blocks):
                self.error("duplicate action '%s'" % rest, number, column)
                return None
            self.blocks.append(_ActionBlock(rest, SourceSpan(number, column)))
            return name

        self.error("unknown section '[%s]'" % name, number, column)
        return None

    def note_atoms(self, parsed):
        for kind, name, inverted, terms in parsed:
            if kind != 'fact':
                continue
            if len(terms) == 2:
                self.roles.add(name)
            else:
                self.concepts.add(name)

    def read_tbox_line(self, text, number, column):
        stream = _stream(text, column)
        first = stream.peek()

        if first.kind == 'name' and first.value == 'funct' and stream.peek(1) is not None and stream.peek(1).kind == 'name':
            stream.next()
            name = stream.expect('name', what='a role')
            inverted = stream.accept('op', '-') is not None
            stream.expect_end()
            self.roles.add(name.value)
            self.tbox_lines.append(('funct', RoleExpr(name.value, inverted), SourceSpan(number, column)))
            return

        if first.kind == 'name' and first.value == 'role' and stream.peek(1) is not None and stream.peek(1).kind == 'name':
            stream.next()
            self.roles.add(stream.expect('name', what='a role').value)
            while stream.accept('op', ','):
                self.roles.add(stream.expect('name', what='a role').value)
            stream.expect_end()
            return

        lhs = self.read_side(stream)
        stream.expect('op', '<=')
        rhs = self.read_side(stream)
        stream.expect_end()
        self.tbox_lines.append(('inclusion', (lhs, rhs), SourceSpan(number, column)))

    def read_side(self, stream):
        negated = False
        token = stream.peek()

        if token is not None and token.kind == 'name' and token.value == 'not' and stream.peek(1) is not None \
                and stream.peek(1).kind == 'name':
            stream.next()
            negated = True

        token = stream.peek()
        if token is not None and token.kind == 'name' and token.value == 'exists' and stream.peek(1) is not None \
                and stream.peek(1).kind == 'name':
            stream.next()
            name = stream.expect('name', what='a role')
            inverted = stream.accept('op', '-') is not None
            self.roles.add(name.value)
            return (negated, 'exists', name.value, inverted, name.column)

        name = stream.expect('name', what='a concept or role')
        inverted = stream.accept('op', '-') is not None
        if inverted:
            self.roles.add(name.value)
        return (negated, 'name', name.value, inverted, name.column)

    def read_abox_line(self, text, number, column):
        parsed = read_atom_list(_stream(text, column), individual_term, constraints=False)
        self.note_atoms(parsed)

        for item in parsed:
            assertion = _assertion(item)
            self.abox.append(assertion)
            self.spans.setdefault(assertion, SourceSpan(number, column))

    def read_action_line(self, text, number, column):
        block = self.blocks[-1]
        match = KEY_REGEX.match(text)

        if not match or match.group('key') not in ACTION_KEYS:
            raise SyntaxProblem("expected one of %s" % ', '.join('%s:' % key for key in ACTION_KEYS), column)

        key = match.group('key')
        if key in block.values:
            raise SyntaxProblem("'%s:' given twice for action '%s'" % (key, block.name), column)

        value_column = column + match.start('value')
        stream = _stream(match.group('value'), value_column)

        if key == 'new':
            names = []
            if not stream.at_end():
                names.append(action_term(stream.expect('name', what='a variable')).name)
                while stream.accept('op', ','):
                    names.append(action_term(stream.expect('name', what='a variable')).name)
            stream.expect_end()
            block.values[key] = names
            return

        parsed = read_atom_list(stream, action_term, constraints=(key == 'guard'))
        self.note_atoms(parsed)
        block.values[key] = [_query_atom(item) for item in parsed]

    def classify(self, side, span):
        negated, form, name, inverted, column = side

        if form == 'exists':
            return (negated, BasicConcept.exists_role(RoleExpr(name, inverted)))

        if inverted or name in self.roles:
            return (negated, RoleExpr(name, inverted))

        self.concepts.add(name)
        return (negated, BasicConcept.atomic(name))

    def infer_roles(self):
        """Bare names related by an inclusion to a role are roles too."""
        changed = True

        while changed:
            changed = False

            for kind, value, span in self.tbox_lines:
                if kind != 'inclusion':
                    continue

                sides = [side for side in value if side[1] == 'name']
                if len(sides) != 2 or not any(side[3] or side[2] in self.roles for side in sides):
                    continue

                for side in sides:
                    if side[2] not in self.roles:
                        self.roles.add(side[2])
                        changed = True

    def build_tbox(self):
        self.infer_roles()
        tbox = []

        for kind, value, span in self.tbox_lines:
            if kind == 'funct':
                axiom = Functionality(value)
            else:
                lhs_negated, lhs = self.classify(value[0], span)
                rhs_negated, rhs = self.classify(value[1], span)

                if isinstance(lhs, RoleExpr) != isinstance(rhs, RoleExpr):
                    self.error("inclusion mixes a role and a concept", span.line, span.column)
                    continue

                kind = RoleInclusion if isinstance(lhs, RoleExpr) else ConceptInclusion
                axiom = kind(lhs, rhs, negated=rhs_negated, negated_lhs=lhs_negated)

            tbox.append(axiom)
            self.spans.setdefault(axiom, span)

        for name in sorted(self.roles & self.concepts):
            self.error("'%s' is used both as a concept and as a role" % name, 1, 1)

        return tbox

    def build_actions(self):
        actions = []

        for block in self.blocks:
            if 'guard' not in block.values:
                self.error("action '%s' has no guard" % block.name, block.span.line, block.span.column)
                continue

            try:
                guard = ConjunctiveQuery(block.values['guard'])
            except ValueError as e:
                self.error("action '%s': %s" % (block.name, e), block.span.line, block.span.column)
                continue

            action = Action(
                block.name,
                guard,
                fresh=block.values.get('new', ()),
                add=block.values.get('add', ()),
                delete=block.values.get('del', ()),
            )
            actions.append(action)
            self.spans[action] = block.span

        return actions


def parse_dkb(text, strict=None):
    """
    Reads a document. Raises ``ParseError`` carrying every error; warnings
    stay on ``document.diagnostics``.
    """
    return DocumentParser(text).parse(strict=strict)


def parse_abox(text):
    """Reads ABox assertions, one or more per line, with or without an ``[abox]`` header."""
    assertions = set()
    diagnostics = []

    for number, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line or line == '[abox]':
            continue

        try:
            for item in read_atom_list(_stream(line), individual_term, constraints=False):
                assertions.add(_assertion(item))
        except SyntaxProblem as e:
            diagnostics.append(Diagnostic(ERROR, e.message, SourceSpan(number, e.column)))

    if diagnostics:
        raise ParseError(diagnostics)

    return frozenset(assertions)


def _read_conjunction(stream, reader):
    atoms = [_query_atom(read_atom(stream, reader))]
    while stream.accept('op', '&'):
        atoms.append(_query_atom(read_atom(stream, reader)))
    return atoms


def parse_query(text, individuals=()):
    """
    Reads ``A(x) & P(x, _y) | B(x)``: ``&`` joins atoms, ``|`` joins CQs that
    may be parenthesized. Bare names of ``individuals`` and quoted tokens are
    individuals, ``_``-prefixed names are existential.
    """
    stripped = text.strip()

    if stripped == 'true':
        return UnionQuery.always()
    if stripped == 'false':
        return UnionQuery.bottom()

    individuals = frozenset(individuals)
    reader = query_term(individuals)
    bodies = []

    try:
        stream = _stream(text)

        while True:
            if stream.accept('op', '('):
                bodies.append(_read_conjunction(stream, reader))
                stream.expect('op', ')')
            else:
                bodies.append(_read_conjunction(stream, reader))

            if not stream.accept('op', '|'):
                break

        stream.expect_end()
    except SyntaxProblem as e:
        raise ParseError([Diagnostic(ERROR, e.message, SourceSpan(1, e.column))])

    free_vars = []
    for body in bodies:
        for atom in body:
            for name in atom.variables():
                if not name.startswith(EXISTENTIAL_PREFIX) and name not in free_vars:
                    free_vars.append(name)

    disjuncts = []
    for body in bodies:
        names = set(name for atom in body for name in atom.variables())
        missing = [name for name in free_vars if name not in names]

        if missing:
            raise ParseError([Diagnostic(ERROR, "every disjunct must mention %s" % ', '.join(missing), SourceSpan(1, 1))])

        disjuncts.append(ConjunctiveQuery(body, free_vars))

    return UnionQuery(disjuncts)


def parse_focus(text):
    """``all``, ``sig:A,B``, ``ind:a,b`` or ``sig:A,B;ind:a,b``."""
    text = text.strip()

    if not text or text == 'all':
        return FocusPolicy.keep_all()

    signature = None
    individuals = None

    for part in text.split(';'):
        kind, _, names = part.strip().partition(':')
        values = frozenset(name.strip() for name in names.split(',') if name.strip())

        if kind == 'sig' and signature is None:
            signature = values
        elif kind == 'ind' and individuals is None:
            individuals = values
        else:
            raise ParseError([Diagnostic(ERROR, "bad focus '%s'" % part.strip(), SourceSpan(1, 1))])

    if signature is not None and individuals is not None:
        return FocusPolicy.both(signature, individuals)
    if signature is not None:
        return FocusPolicy.only_signature(signature)
    return FocusPolicy.only_individuals(individuals)


def parse_path(text):
    """
    Reads ``step: <action> [with x=a, y=b] [keep <focus>]`` lines into
    ``PathLabel`` values. Action names are resolved later.
    """
    labels = []
    diagnostics = []

    for number, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue

        match = STEP_REGEX.match(line)
        if not match:
            diagnostics.append(Diagnostic(ERROR, "expected 'step:'", SourceSpan(number, 1)))
            continue

        value = match.group('value')
        focus = None
        keep = re.search(r'\bkeep\b', value)

        try:
            if keep:
                focus = parse_focus(value[keep.end():])
                value = value[:keep.start()]

            stream = _stream(value, match.start('value') + 1)
            name = stream.expect('name', what='an action name').value

            binding = {}
            if stream.accept('name', 'with'):
                while True:
                    variable = stream.expect('name', what='a variable')
                    stream.expect('op', '=')
                    individual = stream.next()
                    if individual.kind not in ('name', 'string'):
                        raise SyntaxProblem("expected an individual", individual.column)
                    if variable.value in binding:
                        raise SyntaxProblem("'%s' bound twice" % variable.value, variable.column)
                    binding[variable.value] = individual.value
                    if not stream.accept('op', ','):
                        break

            stream.expect_end()
            labels.append(PathLabel(name, binding, focus))
        except SyntaxProblem as e:
            diagnostics.append(Diagnostic(ERROR, e.message, SourceSpan(number, e.column)))
        except ParseError as e:
            diagnostics.extend(Diagnostic(d.level, d.message, SourceSpan(number, 1)) for d in e.diagnostics)

    if diagnostics:
        raise ParseError(diagnostics)

    return labels


def _quoted(name):
    return '%s' % (Const(name),)


def format_assertion(assertion):
    return '%s(%s)' % (assertion.predicate, ', '.join(_quoted(arg) for arg in assertion.args))


def _format_atoms(atoms):
    return ', '.join('%s' % (atom,) for atom in atoms)


def serialize_dkb(doc):
    """The canonical text of ``doc``; reading it back gives an equal document."""
    lines = ['[tbox]']

    roles = []
    for axiom in doc.kb.tbox:
        if isinstance(axiom, RoleInclusion):
            for role in (axiom.lhs, axiom.rhs):
                if role.name not in roles:
                    roles.append(role.name)

    if roles:
        lines.append('role %s' % ', '.join(roles))

    lines.extend('%s' % (axiom,) for axiom in doc.kb.tbox)
    lines.append('[abox]')
    lines.extend(format_assertion(assertion) for assertion in sorted(doc.kb.abox))

    for action in doc.actions:
        lines.append('')
        lines.append('[action] %s' % action.name)
        lines.append('guard: %s' % _format_atoms(action.guard.atoms))
        lines.append('new: %s' % ', '.join(action.fresh))
        lines.append('add: %s' % _format_atoms(action.add))
        lines.append('del: %s' % _format_atoms(action.delete))

    return '\n'.join(line.rstrip() for line in lines) + '\n'
