# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from functools import lru_cache

from dkb.kb import BasicConcept, ConceptInclusion, Functionality, RoleExpr, RoleInclusion, is_negative
from dkb.query import ConjunctiveQuery, UnionQuery, Var, first_match, neq, role_atom
from dkb.rewriting import concept_atom_for, role_atom_for


log = logging.getLogger('dkb')


def _role_forms(inclusion):
    """The four equivalent readings ``(Q, R)`` of ``Q <= not R``."""
    lhs, rhs = inclusion.lhs, inclusion.rhs
    return [
        (lhs, rhs),
        (rhs, lhs),
        (lhs.inverse(), rhs.inverse()),
        (rhs.inverse(), lhs.inverse()),
    ]


def closure_key(assertion):
    """Identifies a negative assertion regardless of its orientation."""
    if isinstance(assertion, Functionality):
        return ('funct', assertion.role)

    if isinstance(assertion, ConceptInclusion):
        return ('concept', frozenset([assertion.lhs, assertion.rhs]))

    def directed(first, second):
        if first.inverted:
            return (first.inverse(), second.inverse())
        return (first, second)

    lhs, rhs = assertion.lhs, assertion.rhs
    return ('role', min(directed(lhs, rhs), directed(rhs, lhs)))


class NiClosure(object):
    """
    Negative inclusions and functionality assertions, kept in the orientation
    they were first derived in. Membership ignores orientation.
    """

    def __init__(self, assertions=()):
        self._members = []
        self._keys = {}

        for assertion in assertions:
            self.add(assertion)

    def add(self, assertion):
        key = closure_key(assertion)

        if key in self._keys:
            return False

        self._keys[key] = assertion
        self._members.append(assertion)
        return True

    def __contains__(self, assertion):
        return closure_key(assertion) in self._keys

    def __iter__(self):
        return iter(list(self._members))

    def __len__(self):
        return len(self._members)

    def __eq__(self, other):
        if not isinstance(other, NiClosure):
            return NotImplemented
        return set(self._keys) == set(other._keys)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(frozenset(self._keys))

    def __repr__(self):
        return '<NiClosure: %s>' % '; '.join('%s' % (member,) for member in self._members)

    def concept_negatives(self):
        return [m for m in self._members if isinstance(m, ConceptInclusion)]

    def role_negatives(self):
        return [m for m in self._members if isinstance(m, RoleInclusion)]

    def functionalities(self):
        return [m for m in self._members if isinstance(m, Functionality)]


def _empty_role(member):
    """The role a member declares empty (``exists Q <= not exists Q`` or ``Q <= not Q``), if any."""
    if member.lhs != member.rhs:
        return None
    if isinstance(member, RoleInclusion):
        return member.lhs
    if member.lhs.exists:
        return member.lhs.role
    return None


def ni_closure(tbox):
    closure = NiClosure(a for a in tbox if isinstance(a, Functionality) or is_negative(a))
    concept_pis = [a for a in tbox if isinstance(a, ConceptInclusion) and not a.negated]
    role_pis = [a for a in tbox if isinstance(a, RoleInclusion) and not a.negated]

    changed = True
    while changed:
        changed = False

        for member in closure.concept_negatives():
            for inner, other in ((member.lhs, member.rhs), (member.rhs, member.lhs)):
                for pi in concept_pis:
                    if pi.rhs == inner:
                        changed |= closure.add(ConceptInclusion(pi.lhs, other, negated=True))

                if not inner.exists:
                    continue

                for pi in role_pis:
                    if BasicConcept.exists_role(pi.rhs) == inner:
                        changed |= closure.add(ConceptInclusion(BasicConcept.exists_role(pi.lhs), other, negated=True))
                    if BasicConcept.exists_role(pi.rhs.inverse()) == inner:
                        changed |= closure.add(ConceptInclusion(BasicConcept.exists_role(pi.lhs.inverse()), other, negated=True))

        for member in closure.role_negatives():
            for inner, other in _role_forms(member):
                for pi in role_pis:
                    if pi.rhs == inner:
                        changed |= closure.add(RoleInclusion(pi.lhs, other, negated=True))

        for member in closure.concept_negatives() + closure.role_negatives():
            role = _empty_role(member)
            if role is None:
                continue

            role = RoleExpr(role.name)
            for concept in (BasicConcept.exists_role(role), BasicConcept.exists_role(role.inverse())):
                changed |= closure.add(ConceptInclusion(concept, concept, negated=True))
            changed |= closure.add(RoleInclusion(role, role, negated=True))

    return closure


def violation_query(member):
    """The boolean CQ that holds on DB(A) exactly when ``member`` is violated."""
    x, y = Var('_x'), Var('_y')

    if isinstance(member, Functionality):
        role = member.role
        if role.inverted:
            first, second = Var('_x1'), Var('_x2')
            atoms = [role_atom(role.name, first, y), role_atom(role.name, second, y), neq(first, second)]
        else:
            first, second = Var('_y1'), Var('_y2')
            atoms = [role_atom(role.name, x, first), role_atom(role.name, x, second), neq(first, second)]
        return ConjunctiveQuery(atoms, ())

    if isinstance(member, ConceptInclusion):
        atoms = [concept_atom_for(member.lhs, x, Var('_y1')), concept_atom_for(member.rhs, x, Var('_y2'))]
        return ConjunctiveQuery(atoms, ())

    atoms = [role_atom_for(member.lhs, x, y), role_atom_for(member.rhs, x, y)]
    return ConjunctiveQuery(atoms, ())


@lru_cache(maxsize=128)
def _unsat_query(tbox):
    closure = ni_closure(tbox)
    log.debug("NI-closure has %d members.", len(closure))
    return UnionQuery([violation_query(member) for member in closure])


def unsat_query(tbox):
    return _unsat_query(tuple(tbox))


def find_violation(tbox, abox):
    """One violated disjunct of the unsatisfiability query with its witness, or ``None``."""
    return first_match(unsat_query(tbox), abox)


def is_consistent(tbox, abox):
    return find_violation(tbox, abox) is None
