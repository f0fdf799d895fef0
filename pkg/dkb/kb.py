# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import sys
from collections import namedtuple

from dkb.constants import strict_functionality


ERROR = 'error'
WARNING = 'warning'


class SourceSpan(namedtuple('SourceSpan', ['line', 'column'])):
    __slots__ = ()

    def __str__(self):
        return '%d:%d' % (self.line, self.column)


class Diagnostic(namedtuple('Diagnostic', ['level', 'message', 'span'])):
    __slots__ = ()

    def __new__(cls, level, message, span=None):
        return super(Diagnostic, cls).__new__(cls, level, message, span)

    @property
    def is_error(self):
        return self.level == ERROR

    def format(self):
        if self.span is None:
            return '%s: %s' % (self.level, self.message)
        return '%s: %s: %s' % (self.span, self.level, self.message)


class RoleExpr(namedtuple('RoleExpr', ['name', 'inverted'])):
    """An atomic role ``P`` or its inverse ``P-``."""
    __slots__ = ()

    def __new__(cls, name, inverted=False):
        return super(RoleExpr, cls).__new__(cls, sys.intern(name), bool(inverted))

    def inverse(self):
        return RoleExpr(self.name, not self.inverted)

    def orient(self, first, second):
        """
        Places ``first``/``second`` in the argument order of the underlying
        atomic role, i.e. ``Q(first, second)`` is ``P(result)``.
        """
        if self.inverted:
            return (second, first)
        return (first, second)

    def __str__(self):
        return '%s-' % (self.name,) if self.inverted else self.name


class BasicConcept(namedtuple('BasicConcept', ['name', 'exists', 'inverted'])):
    __slots__ = ()

    @classmethod
    def atomic(cls, name):
        return cls(sys.intern(name), False, False)

    @classmethod
    def exists_role(cls, role):
        return cls(role.name, True, role.inverted)

    @property
    def is_atomic(self):
        return not self.exists

    @property
    def role(self):
        if not self.exists:
            return None
        return RoleExpr(self.name, self.inverted)

    def __str__(self):
        if self.exists:
            return 'exists %s' % (self.role,)
        return self.name


class ConceptInclusion(namedtuple('ConceptInclusion', ['lhs', 'rhs', 'negated', 'negated_lhs'])):
    __slots__ = ()

    def __new__(cls, lhs, rhs, negated=False, negated_lhs=False):
        return super(ConceptInclusion, cls).__new__(cls, lhs, rhs, bool(negated), bool(negated_lhs))

    def __str__(self):
        return _format_inclusion(self)


class RoleInclusion(namedtuple('RoleInclusion', ['lhs', 'rhs', 'negated', 'negated_lhs'])):
    __slots__ = ()

    def __new__(cls, lhs, rhs, negated=False, negated_lhs=False):
        return super(RoleInclusion, cls).__new__(cls, lhs, rhs, bool(negated), bool(negated_lhs))

    def __str__(self):
        return _format_inclusion(self)


class Functionality(namedtuple('Functionality', ['role'])):
    __slots__ = ()

    def __str__(self):
        return 'funct %s' % (self.role,)


def _format_inclusion(inclusion):
    lhs = '%s' % (inclusion.lhs,)
    rhs = '%s' % (inclusion.rhs,)

    if inclusion.negated_lhs:
        lhs = 'not %s' % lhs

    if inclusion.negated:
        rhs = 'not %s' % rhs

    return '%s <= %s' % (lhs, rhs)


def is_negative(assertion):
    return isinstance(assertion, (ConceptInclusion, RoleInclusion)) and assertion.negated


def is_positive(assertion):
    return isinstance(assertion, (ConceptInclusion, RoleInclusion)) and not assertion.negated


class Assertion(namedtuple('Assertion', ['predicate', 'args'])):
    """
    A ground ABox fact: ``A(a)`` when ``args`` has one individual, ``P(a, b)``
    when it has two. Inverse role atoms never reach this type.
    """
    __slots__ = ()

    @property
    def is_concept(self):
        return len(self.args) == 1

    @property
    def is_role(self):
        return len(self.args) == 2

    def __str__(self):
        return '%s(%s)' % (self.predicate, ', '.join(self.args))


def concept_assertion(name, individual):
    return Assertion(sys.intern(name), (sys.intern(individual),))


def role_assertion(role, first, second):
    """Builds ``role(first, second)``, normalizing inverse roles to direct atoms."""
    if not isinstance(role, RoleExpr):
        role = RoleExpr(role)

    args = role.orient(sys.intern(first), sys.intern(second))
    return Assertion(role.name, args)


def adom(abox):
    """The individuals mentioned by the assertions of ``abox``."""
    individuals = set()

    for assertion in abox:
        individuals.update(assertion.args)

    return frozenset(individuals)


def format_abox(abox):
    return ', '.join('%s' % (assertion,) for assertion in sorted(abox))


class Vocabulary(namedtuple('Vocabulary', ['concepts', 'roles'])):
    __slots__ = ()

    @classmethod
    def from_tbox(cls, tbox):
        concepts = set()
        roles = set()

        for assertion in tbox:
            if isinstance(assertion, Functionality):
                roles.add(assertion.role.name)
            elif isinstance(assertion, RoleInclusion):
                roles.update([assertion.lhs.name, assertion.rhs.name])
            else:
                for concept in (assertion.lhs, assertion.rhs):
                    if concept.exists:
                        roles.add(concept.name)
                    else:
                        concepts.add(concept.name)

        return cls(frozenset(concepts), frozenset(roles))


class KnowledgeBase(object):
    """A TBox (ordered, without duplicates) and an ABox (a set)."""

    def __init__(self, tbox=(), abox=()):
        seen = set()
        ordered = []

        for assertion in tbox:
            if assertion not in seen:
                seen.add(assertion)
                ordered.append(assertion)

        self.tbox = tuple(ordered)
        self.abox = frozenset(abox)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self.tbox == other.tbox and self.abox == other.abox

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self.tbox, self.abox))

    def __repr__(self):
        return '<KnowledgeBase: %d axioms, %d assertions>' % (len(self.tbox), len(self.abox))

    def vocabulary(self):
        return Vocabulary.from_tbox(self.tbox)

    def individuals(self):
        return adom(self.abox)

    def validate(self, strict=None, spans=None):
        diagnostics = validate_tbox(self.tbox, strict=strict, spans=spans)
        vocabulary = self.vocabulary()
        spans = spans or {}

        for assertion in sorted(self.abox):
            known = vocabulary.concepts if assertion.is_concept else vocabulary.roles

            if assertion.predicate not in known:
                diagnostics.append(Diagnostic(
                    WARNING,
                    "'%s' is not part of the TBox vocabulary" % assertion.predicate,
                    spans.get(assertion),
                ))

        return diagnostics


def validate_tbox(tbox, strict=None, spans=None):
    """
    Checks the restricted DL-Lite_A well-formedness of ``tbox``.

    Negated left-hand sides are errors. A functional role (or its inverse)
    specialized by a role inclusion is a warning, or an error when ``strict``
    (defaulting to the ``DKB_STRICT_FUNCTIONALITY`` setting).
    """
    if strict is None:
        strict = strict_functionality()

    spans = spans or {}
    diagnostics = []
    functional = set(a.role.name for a in tbox if isinstance(a, Functionality))

    for assertion in tbox:
        span = spans.get(assertion)

        if isinstance(assertion, (ConceptInclusion, RoleInclusion)) and assertion.negated_lhs:
            diagnostics.append(Diagnostic(ERROR, "negated left-hand side in '%s'" % (assertion,), span))
            continue

        if isinstance(assertion, RoleInclusion) and not assertion.negated:
            if assertion.rhs.name in functional:
                level = ERROR if strict else WARNING
                diagnostics.append(Diagnostic(
                    level,
                    "functional role '%s' is specialized by '%s'" % (assertion.rhs.name, assertion),
                    span,
                ))

    return diagnostics
