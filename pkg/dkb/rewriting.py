# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import deque, namedtuple

from dkb.constants import REWRITE_VAR_PREFIX
from dkb.exceptions import InvariantViolation
from dkb.kb import ConceptInclusion, RoleInclusion, is_positive
from dkb.query import (WILDCARD, ConjunctiveQuery, QueryAtom, UnionQuery, Var, concept_atom, eq,
                       matching_assertions, role_atom)


log = logging.getLogger('dkb')


def positive_inclusions(tbox):
    """The concept and role inclusions of ``tbox`` without negation."""
    return [assertion for assertion in tbox if is_positive(assertion)]


def concept_atom_for(concept, term, other=WILDCARD):
    """The atom stating that ``term`` belongs to ``concept``."""
    if concept.is_atomic:
        return concept_atom(concept.name, term)
    return role_atom(concept.name, *concept.role.orient(term, other))


def role_atom_for(role, first, second):
    return role_atom(role.name, *role.orient(first, second))


def rewrite_atom(atom, inclusion):
    """
    The atom replacing ``atom`` when ``inclusion`` applies to it, else ``None``.

    ``A(t)`` is rewritten by inclusions into ``A``; ``P(t, _)`` and ``P(_, t)``
    by inclusions into ``exists P`` and ``exists P-`` respectively; role atoms
    by role inclusions into ``P`` or ``P-``.
    """
    if not atom.is_positive:
        return None

    if isinstance(inclusion, ConceptInclusion):
        rhs = inclusion.rhs

        if atom.kind == QueryAtom.CONCEPT:
            if rhs.is_atomic and rhs.name == atom.predicate:
                return concept_atom_for(inclusion.lhs, atom.terms[0])
            return None

        if rhs.exists and rhs.name == atom.predicate:
            first, second = atom.terms
            if not rhs.inverted and second.is_wildcard:
                return concept_atom_for(inclusion.lhs, first)
            if rhs.inverted and first.is_wildcard:
                return concept_atom_for(inclusion.lhs, second)

        return None

    if isinstance(inclusion, RoleInclusion) and atom.kind == QueryAtom.ROLE:
        if inclusion.rhs.name != atom.predicate:
            return None

        first, second = atom.terms
        if inclusion.rhs.inverted:
            first, second = second, first
        return role_atom_for(inclusion.lhs, first, second)

    return None


def _dedupe(atoms):
    seen = set()
    kept = []

    for atom in atoms:
        if atom not in seen:
            seen.add(atom)
            kept.append(atom)

    return tuple(kept)


def normalize_body(atoms, distinguished):
    """
    Replaces every non-distinguished variable occurring exactly once (in a
    positive atom) by the wildcard and drops duplicate atoms.
    """
    counts = {}

    for atom in atoms:
        for name in atom.variables():
            counts[name] = counts.get(name, 0) + 1

    unbound = set(name for name, count in counts.items() if count == 1 and name not in distinguished)

    if unbound:
        mapping = dict((name, WILDCARD) for name in unbound)
        atoms = [atom.substitute(mapping) if atom.is_positive else atom for atom in atoms]

    return _dedupe(atoms)


def canonical_key(atoms, distinguished):
    """A key equal for bodies that differ only by renaming non-distinguished variables."""
    def masked(term):
        if term.is_var and term.name not in distinguished:
            return '?'
        return '%s:%s' % (term.kind, term.name)

    ordered = sorted(atoms, key=lambda atom: (atom.kind, atom.predicate, tuple(masked(t) for t in atom.terms)))
    renaming = {}
    key = []

    for atom in ordered:
        terms = []
        for term in atom.terms:
            if term.is_var and term.name not in distinguished:
                renaming.setdefault(term.name, '?%d' % (len(renaming) + 1))
                terms.append(renaming[term.name])
            else:
                terms.append(masked(term))
        key.append((atom.kind, atom.predicate, tuple(terms)))

    return frozenset(key)


def _walk(term, substitution):
    while term.is_var and term.name in substitution:
        term = substitution[term.name]
    return term


def reduce_body(atoms, i, j, distinguished):
    """
    Unifies the ``i``-th and ``j``-th atoms, or returns ``None`` when they do
    not unify. Distinguished variables stay free: when one is unified away,
    the result carries ``x == t`` for it.
    """
    first, second = atoms[i], atoms[j]

    if not first.same_shape(second):
        return None

    substitution = {}
    head = []

    for s, t in zip(first.terms, second.terms):
        s = _walk(s, substitution)
        t = _walk(t, substitution)

        if s.is_wildcard or t.is_wildcard or s == t:
            continue

        if s.is_var and s.name not in distinguished:
            substitution[s.name] = t
        elif t.is_var and t.name not in distinguished:
            substitution[t.name] = s
        elif t.is_var:
            substitution[t.name] = s
            head.append(t.name)
        elif s.is_var:
            substitution[s.name] = t
            head.append(s.name)
        else:
            return None

    def resolve(atom):
        return QueryAtom(atom.kind, atom.predicate, tuple(_walk(term, substitution) for term in atom.terms))

    merged = []
    for s, t in zip(first.terms, second.terms):
        s = _walk(s, substitution)
        t = _walk(t, substitution)
        merged.append(t if s.is_wildcard else s)

    result = []
    for position, atom in enumerate(atoms):
        if position == i:
            result.append(QueryAtom(first.kind, first.predicate, tuple(merged)))
        elif position != j:
            result.append(resolve(atom))

    for name in head:
        result.append(eq(Var(name), _walk(Var(name), substitution)))

    return normalize_body(result, distinguished)


def rewrite_bodies(atoms, distinguished, tbox):
    """
    The reformulation closure of a query body under the positive inclusions
    of ``tbox``, breadth-first, starting with the body itself.
    """
    inclusions = positive_inclusions(tbox)
    start = normalize_body(atoms, distinguished)
    results = [start]
    seen = set([canonical_key(start, distinguished)])
    queue = deque([start])

    def add(body):
        key = canonical_key(body, distinguished)
        if key not in seen:
            seen.add(key)
            results.append(body)
            queue.append(body)

    while queue:
        body = queue.popleft()

        for position, atom in enumerate(body):
            for inclusion in inclusions:
                rewritten = rewrite_atom(atom, inclusion)
                if rewritten is not None:
                    add(normalize_body(body[:position] + (rewritten,) + body[position + 1:], distinguished))

        positives = [position for position, atom in enumerate(body) if atom.is_positive]
        for offset, i in enumerate(positives):
            for j in positives[offset + 1:]:
                reduced = reduce_body(body, i, j, distinguished)
                if reduced is not None:
                    add(reduced)

    return results


def materialize(body, free_vars, reserved=()):
    """Turns a rewritten body into a CQ, naming each wildcard as a fresh existential."""
    taken = set(reserved)
    taken.update(free_vars)
    for atom in body:
        taken.update(atom.variables())

    counter = [0]

    def fresh():
        while True:
            counter[0] += 1
            name = '%s%d' % (REWRITE_VAR_PREFIX, counter[0])
            if name not in taken:
                taken.add(name)
                return Var(name)

    atoms = []
    for atom in body:
        terms = tuple(fresh() if term.is_wildcard else term for term in atom.terms)
        atoms.append(QueryAtom(atom.kind, atom.predicate, terms))

    exist_vars = set()
    for atom in atoms:
        exist_vars.update(name for name in atom.variables() if name not in free_vars)

    return ConjunctiveQuery(atoms, free_vars, exist_vars)


def perfect_ref(q, tbox, reserved=()):
    """
    Compiles ``tbox`` into ``q``: the returned UCQ, evaluated without the
    TBox, has the certain answers of ``q`` on every consistent ABox.
    """
    distinguished = frozenset(q.free_vars)
    bodies = rewrite_bodies(q.atoms, distinguished, tbox)
    log.debug("Rewrote '%s' into %d disjuncts.", q, len(bodies))
    reserved = set(reserved).union(q.exist_vars)
    return UnionQuery([materialize(body, q.free_vars, reserved) for body in bodies])


class EntEntry(namedtuple('EntEntry', ['atom', 'source'])):
    __slots__ = ()

    def __str__(self):
        return '%s' % (self.atom,)


class EntSet(object):
    """The single atoms whose presence entails some negative effect."""

    def __init__(self, entries=()):
        self.entries = tuple(entries)

    def atoms(self):
        return _dedupe(entry.atom for entry in self.entries)

    def for_source(self, source):
        return [entry.atom for entry in self.entries if entry.source == source]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, EntSet):
            return NotImplemented
        return self.entries == other.entries

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.entries)

    def __str__(self):
        return ', '.join('%s' % (atom,) for atom in self.atoms())


def ent_neg_effects(effects, tbox):
    entries = []

    for effect in effects:
        distinguished = frozenset(effect.variables())

        for body in rewrite_bodies((effect,), distinguished, tbox):
            if len(body) != 1 or not body[0].is_positive:
                raise InvariantViolation("Negative effect '%s' rewrote into '%s'." % (effect, ', '.join('%s' % (a,) for a in body)))

            atom = body[0]
            if sum(1 for term in atom.terms if term.is_wildcard) > 1:
                raise InvariantViolation("Entailing atom '%s' has more than one wildcard." % (atom,))

            entries.append(EntEntry(atom, effect))

    seen = set()
    unique = []
    for entry in entries:
        if entry not in seen:
            seen.add(entry)
            unique.append(entry)

    return EntSet(unique)


def compute_E_minus_sub(ent, binding, abox):
    """The assertions of ``abox`` matched by some grounded atom of ``ent``."""
    removed = set()

    for atom in ent.atoms():
        removed.update(matching_assertions(atom, binding, abox))

    return frozenset(removed)
