# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

from dkb.consistency import _role_forms, ni_closure
from dkb.constants import BLOCKING_VAR_PREFIX, DEFAULT_THREADS
from dkb.exceptions import FreshConstantViolation
from dkb.kb import ERROR, Assertion, BasicConcept, Diagnostic, RoleExpr, adom
from dkb.query import ConjunctiveQuery, QueryAtom, UnionQuery, Var, eq, neq, role_atom
from dkb.rewriting import compute_E_minus_sub, concept_atom_for, ent_neg_effects, perfect_ref, role_atom_for


log = logging.getLogger('dkb')

# Stands for the existential ``z`` of a threat until each disjunct gets its own name.
THREAT_VAR = Var('_z')


class Action(object):
    """``name: guard, fresh -> add / delete`` over variables only."""

    def __init__(self, name, guard, fresh=(), add=(), delete=()):
        self.name = name
        self.guard = guard
        self.fresh = tuple(fresh)
        self.add = tuple(add)
        self.delete = tuple(delete)

    @property
    def guard_vars(self):
        return self.guard.free_vars

    def variables(self):
        names = set(self.guard.variables())
        names.update(self.fresh)
        for atom in self.add + self.delete:
            names.update(atom.variables())
        return names

    def validate(self, span=None):
        diagnostics = []
        guard_vars = set(self.guard.free_vars)
        hidden = set(self.guard.exist_vars)

        def error(message):
            diagnostics.append(Diagnostic(ERROR, "action '%s': %s" % (self.name, message), span))

        for name in self.fresh:
            if name in guard_vars or name in hidden:
                error("fresh variable '%s' appears in the guard" % name)

        for atom in self.guard.atoms + self.add + self.delete:
            for term in atom.terms:
                if not term.is_var:
                    error("'%s' must use variables only" % (atom,))
                    break

        for atom in self.delete:
            for name in atom.variables():
                if name in hidden:
                    error("deleted atom '%s' uses existential guard variable '%s'" % (atom, name))
                elif name not in guard_vars:
                    error("deleted atom '%s' uses '%s', which is not a guard variable" % (atom, name))

        for atom in self.add:
            for name in atom.variables():
                if name in hidden:
                    error("added atom '%s' uses existential guard variable '%s'" % (atom, name))
                elif name not in guard_vars and name not in self.fresh:
                    error("added atom '%s' uses '%s', which is neither a guard nor a fresh variable" % (atom, name))

        return diagnostics

    def key(self):
        return (self.name, self.guard.key(), self.fresh, self.add, self.delete)

    def __eq__(self, other):
        if not isinstance(other, Action):
            return NotImplemented
        return self.key() == other.key()

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return '<Action: %s>' % self.name


class RewrittenAction(object):
    """One disjunct of a rewritten guard, sharing fresh variables, effects, ent and B with its siblings."""

    def __init__(self, base, index, guard, blocking, ent):
        self.base = base
        self.index = index
        self.name = '%s#%d' % (base.name, index)
        self.guard = guard
        self.fresh = base.fresh
        self.add = base.add
        self.delete = base.delete
        self.blocking = blocking
        self.ent = ent

    @property
    def guard_vars(self):
        return self.guard.free_vars

    @property
    def label_vars(self):
        return tuple(self.guard.free_vars) + self.fresh

    def __repr__(self):
        return '<RewrittenAction: %s>' % self.name


class Threat(namedtuple('Threat', ['row', 'atom', 'constraints'])):
    """
    What a positive effect conflicts with under one closure member: a single
    atom over the effect's variables and ``THREAT_VAR``, plus the extra
    inequality of the functionality rows.
    """
    __slots__ = ()


def _concept_threat(row, other, term):
    return Threat(row, concept_atom_for(other, term, THREAT_VAR), ())


def threats(effect, closure):
    """The conflicts a positive effect can cause, one per matching closure member."""
    found = []

    if effect.kind == QueryAtom.CONCEPT:
        mine = BasicConcept.atomic(effect.predicate)
        (x,) = effect.terms

        for member in closure.concept_negatives():
            for inner, other in ((member.lhs, member.rhs), (member.rhs, member.lhs)):
                if inner != mine:
                    continue
                if other.is_atomic:
                    found.append(_concept_threat(1, other, x))
                else:
                    found.append(_concept_threat(3 if other.inverted else 2, other, x))
    else:
        direct = RoleExpr(effect.predicate)
        x1, x2 = effect.terms

        for member in closure.concept_negatives():
            for inner, other in ((member.lhs, member.rhs), (member.rhs, member.lhs)):
                if inner == BasicConcept.exists_role(direct):
                    if other.is_atomic:
                        found.append(_concept_threat(4, other, x1))
                    else:
                        found.append(_concept_threat(8 if other.inverted else 6, other, x1))
                elif inner == BasicConcept.exists_role(direct.inverse()):
                    if other.is_atomic:
                        found.append(_concept_threat(5, other, x2))
                    else:
                        found.append(_concept_threat(7 if other.inverted else 9, other, x2))

        for member in closure.role_negatives():
            for inner, other in _role_forms(member):
                if inner == direct:
                    found.append(Threat(11 if other.inverted else 10, role_atom_for(other, x1, x2), ()))

        for member in closure.functionalities():
            if member.role == direct:
                found.append(Threat(12, role_atom(direct.name, x1, THREAT_VAR), (neq(x2, THREAT_VAR),)))
            elif member.role == direct.inverse():
                found.append(Threat(13, role_atom(direct.name, THREAT_VAR, x2), (neq(x1, THREAT_VAR),)))

    unique = []
    seen = set()
    for threat in found:
        key = (threat.atom, threat.constraints)
        if key not in seen:
            seen.add(key)
            unique.append(threat)

    return unique


def _substitute_threat_var(atoms, term):
    return [atom.substitute({THREAT_VAR.name: term}) for atom in atoms]


def against_positive(threat, other):
    """
    The condition under which the added ``other`` realizes ``threat``, or
    ``None`` when it never can.
    """
    if not threat.atom.same_shape(other):
        return None

    constraints = []
    partner = None

    for mine, theirs in zip(threat.atom.terms, other.terms):
        if mine == THREAT_VAR:
            partner = theirs
        else:
            constraints.append(eq(mine, theirs))

    if partner is not None:
        constraints.extend(_substitute_threat_var(threat.constraints, partner))
    else:
        constraints.extend(threat.constraints)

    kept = []
    for atom in constraints:
        first, second = atom.terms
        if first == second:
            if atom.kind == QueryAtom.NEQ:
                return None
            continue
        if atom.kind == QueryAtom.EQ and second < first:
            atom = eq(second, first)
        if atom not in kept:
            kept.append(atom)

    return ConjunctiveQuery(kept)


def against_entailing(threat, entailing):
    """
    Conditions under which an ABox atom realizing ``threat`` survives the
    deletion of what ``entailing`` matches: one CQ per argument position that
    may differ.
    """
    found = []
    base = (threat.atom,) + threat.constraints

    for mine, theirs in zip(threat.atom.terms, entailing.terms):
        if theirs.is_wildcard or mine == theirs:
            continue
        found.append(ConjunctiveQuery(base + (neq(mine, theirs),)))

    return found


def unguarded(threat):
    return ConjunctiveQuery((threat.atom,) + threat.constraints)


def _rename_threat_vars(disjuncts, reserved):
    renamed = []
    counter = 0

    for cq in disjuncts:
        if THREAT_VAR.name not in cq.exist_vars:
            renamed.append(cq)
            continue

        while True:
            counter += 1
            name = '%s%d' % (BLOCKING_VAR_PREFIX, counter)
            if name not in reserved:
                break

        atoms = [atom.substitute({THREAT_VAR.name: Var(name)}) for atom in cq.atoms]
        renamed.append(ConjunctiveQuery(atoms, cq.free_vars))

    return renamed


def build_blocking_query(add, delete, tbox, ent=None, reserved=()):
    """
    The blocking query of an action with effects ``add``/``delete``: false on
    a consistent state guarantees the successor is consistent.

    Per positive effect and conflicting closure member: the conflict may come
    from another added atom, from a state atom not removed by the deletions,
    or, when nothing can delete it, from any state atom.
    """
    closure = ni_closure(tbox)
    if ent is None:
        ent = ent_neg_effects(delete, tbox)

    disjuncts = []

    for effect in add:
        for threat in threats(effect, closure):
            for other in add:
                cq = against_positive(threat, other)
                if cq is not None:
                    disjuncts.append(cq)

            matched = False
            for entailing in ent.atoms():
                if entailing.same_shape(threat.atom):
                    matched = True
                    disjuncts.extend(against_entailing(threat, entailing))

            if not matched:
                disjuncts.append(unguarded(threat))

    query = UnionQuery(disjuncts)

    names = set(reserved)
    for atom in tuple(add) + tuple(delete):
        names.update(atom.variables())

    return UnionQuery(_rename_threat_vars(query.disjuncts, names))


def ground_atom(atom, binding):
    return Assertion(atom.predicate, tuple(term.name if term.is_const else binding[term.name] for term in atom.terms))


def check_fresh(action, binding, abox):
    individuals = adom(abox)

    for name in action.fresh:
        if binding[name] in individuals:
            raise FreshConstantViolation(
                "Fresh variable '%s' of '%s' is bound to '%s', which already occurs in the state." % (name, action.name, binding[name]))


def instantiate_effects(action, binding, abox):
    """The assertions ``action`` removes from and adds to ``abox`` under ``binding``."""
    check_fresh(action, binding, abox)
    to_remove = compute_E_minus_sub(action.ent, binding, abox)
    to_add = frozenset(ground_atom(atom, binding) for atom in action.add)
    return (to_remove, to_add)


def rewrite_action(action, tbox):
    reserved = action.variables()
    ent = ent_neg_effects(action.delete, tbox)
    blocking = build_blocking_query(action.add, action.delete, tbox, ent=ent, reserved=reserved)
    guards = perfect_ref(action.guard, tbox, reserved=reserved)
    log.debug("Action '%s' rewrote into %d actions, blocking query has %d disjuncts.", action.name, len(guards), len(blocking))
    return [RewrittenAction(action, index, guard, blocking, ent) for index, guard in enumerate(guards, 1)]


def rewrite_actions(actions, tbox, threads=None):
    """Rewrites every action, keeping declaration order."""
    threads = threads or DEFAULT_THREADS
    actions = list(actions)

    if threads > 1 and len(actions) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            groups = list(executor.map(lambda action: rewrite_action(action, tbox), actions))
    else:
        groups = [rewrite_action(action, tbox) for action in actions]

    return [rewritten for group in groups for rewritten in group]
