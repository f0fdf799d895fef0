# encoding: utf-8
"""Hypothesis strategies for small random knowledge bases, actions, queries and paths."""

from __future__ import absolute_import, division, print_function, unicode_literals

import hypothesis.strategies as st

from dkb.actions import Action, ground_atom
from dkb.consistency import find_violation
from dkb.kb import (BasicConcept, ConceptInclusion, Functionality, RoleExpr, RoleInclusion, concept_assertion,
                    role_assertion)
from dkb.query import ConjunctiveQuery, Var, concept_atom, role_atom
from dkb.transition import FocusPolicy

CONCEPTS = ['A', 'B', 'C', 'D', 'E']
ROLES = ['P', 'R', 'S']
INDIVIDUALS = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j']


role_exprs = st.builds(RoleExpr, st.sampled_from(ROLES), st.booleans())

basic_concepts = st.one_of(
    st.sampled_from(CONCEPTS).map(BasicConcept.atomic),
    role_exprs.map(BasicConcept.exists_role),
)

concept_inclusions = st.builds(ConceptInclusion, basic_concepts, basic_concepts, st.booleans())
role_inclusions = st.builds(RoleInclusion, role_exprs, role_exprs, st.booleans())
functionalities = st.builds(Functionality, role_exprs)


@st.composite
def tboxes(draw, max_size=8, functionality=True):
    """TBoxes where no functional role is specialized."""
    kinds = [concept_inclusions, concept_inclusions, role_inclusions]
    if functionality:
        kinds.append(functionalities)

    axioms = draw(st.lists(st.one_of(*kinds), max_size=max_size))
    functional = set(a.role.name for a in axioms if isinstance(a, Functionality))

    return tuple(a for a in axioms if not (isinstance(a, RoleInclusion) and not a.negated and a.rhs.name in functional))


def aboxes(individuals=len(INDIVIDUALS), max_size=8):
    names = st.sampled_from(INDIVIDUALS[:individuals])
    assertions = st.one_of(
        st.builds(concept_assertion, st.sampled_from(CONCEPTS), names),
        st.builds(role_assertion, st.sampled_from(ROLES), names, names),
    )
    return st.frozensets(assertions, max_size=max_size)


def repair(tbox, abox):
    """Drops assertions until ``abox`` is consistent with ``tbox``."""
    abox = set(abox)

    while True:
        violation = find_violation(tbox, abox)
        if violation is None:
            return frozenset(abox)

        disjunct, witness = violation
        culprit = ground_atom(disjunct.positive_atoms[0], witness)
        abox.discard(culprit)


@st.composite
def knowledge_bases(draw, max_axioms=8, individuals=len(INDIVIDUALS), max_assertions=8, functionality=True):
    """A TBox with a consistent ABox."""
    tbox = draw(tboxes(max_size=max_axioms, functionality=functionality))
    abox = draw(aboxes(individuals=individuals, max_size=max_assertions))
    return (tbox, repair(tbox, abox))


def _atom(draw, names):
    if draw(st.booleans()):
        return concept_atom(draw(st.sampled_from(CONCEPTS)), Var(draw(st.sampled_from(names))))
    return role_atom(draw(st.sampled_from(ROLES)), Var(draw(st.sampled_from(names))), Var(draw(st.sampled_from(names))))


@st.composite
def actions(draw, name='act'):
    """A well-formed action with a guard of one or two atoms and at most two effects."""
    guard_names = draw(st.sampled_from([['x'], ['x', 'y'], ['x', '_u']]))
    guard = [_atom(draw, guard_names)]
    if draw(st.booleans()):
        guard.append(_atom(draw, guard_names))

    query = ConjunctiveQuery(guard)
    free = list(query.free_vars) or ['x']
    if not query.free_vars:
        query = ConjunctiveQuery(guard + [concept_atom(CONCEPTS[0], Var('x'))])

    fresh = ['f'] if draw(st.booleans()) else []
    effects = draw(st.integers(min_value=1, max_value=2))
    add = []
    delete = []

    for _ in range(effects):
        if draw(st.booleans()):
            add.append(_atom(draw, free + fresh))
        else:
            delete.append(_atom(draw, free))

    return Action(name, query, fresh=fresh, add=add, delete=delete)


@st.composite
def action_lists(draw, max_size=3):
    count = draw(st.integers(min_value=1, max_value=max_size))
    return [draw(actions(name='act%d' % number)) for number in range(1, count + 1)]


@st.composite
def queries(draw, max_atoms=3):
    """Connected CQs with at least one free variable."""
    count = draw(st.integers(min_value=1, max_value=max_atoms))
    used = ['x']
    atoms = []

    for _ in range(count):
        anchor = draw(st.sampled_from(used))
        if draw(st.booleans()) and len(atoms) > 0:
            atoms.append(concept_atom(draw(st.sampled_from(CONCEPTS)), Var(anchor)))
            continue

        other = draw(st.sampled_from(used + ['y', '_u', '_w']))
        if other not in used:
            used.append(other)
        if draw(st.booleans()):
            anchor, other = other, anchor
        if draw(st.booleans()):
            atoms.append(role_atom(draw(st.sampled_from(ROLES)), Var(anchor), Var(other)))
        else:
            if anchor != other:
                atoms.append(role_atom(draw(st.sampled_from(ROLES)), Var(anchor), Var(other)))
            atoms.append(concept_atom(draw(st.sampled_from(CONCEPTS)), Var(anchor)))

    # every atom shares a variable with an earlier one, so any prefix stays connected
    return ConjunctiveQuery(atoms[:max_atoms])


@st.composite
def focus_policies(draw, abox):
    predicates = sorted(set(CONCEPTS + ROLES))
    individuals = sorted(set(INDIVIDUALS[:4]) | set(i for a in abox for i in a.args))
    mode = draw(st.sampled_from([FocusPolicy.KEEP_ALL, FocusPolicy.SIGNATURE, FocusPolicy.INDIVIDUALS, FocusPolicy.BOTH]))

    if mode == FocusPolicy.KEEP_ALL:
        return FocusPolicy.keep_all()

    signature = draw(st.sets(st.sampled_from(predicates)))
    kept = draw(st.sets(st.sampled_from(individuals)))

    if mode == FocusPolicy.SIGNATURE:
        return FocusPolicy.only_signature(signature)
    if mode == FocusPolicy.INDIVIDUALS:
        return FocusPolicy.only_individuals(kept)
    return FocusPolicy.both(signature, kept)


@st.composite
def subsets(draw, items):
    items = sorted(items)
    keep = draw(st.lists(st.booleans(), min_size=len(items), max_size=len(items)))
    return frozenset(item for item, flag in zip(items, keep) if flag)
