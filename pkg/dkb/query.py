# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import re
from collections import defaultdict, namedtuple

try:
    from collections.abc import Mapping
except ImportError:
    from collections import Mapping

from dkb.constants import EXISTENTIAL_PREFIX, WILDCARD_NAME
from dkb.exceptions import UnsafeQuery


IDENTIFIER_REGEX = re.compile(r'^[A-Za-z_][A-Za-z0-9_.]*$')


class Term(namedtuple('Term', ['kind', 'name'])):
    VAR = 'var'
    CONST = 'const'
    WILDCARD = 'wildcard'

    __slots__ = ()

    @property
    def is_var(self):
        return self.kind == self.VAR

    @property
    def is_const(self):
        return self.kind == self.CONST

    @property
    def is_wildcard(self):
        return self.kind == self.WILDCARD

    def __str__(self):
        if self.is_const and not IDENTIFIER_REGEX.match(self.name):
            return '"%s"' % self.name
        return self.name


def Var(name):
    return Term(Term.VAR, name)


def Const(name):
    return Term(Term.CONST, name)


WILDCARD = Term(Term.WILDCARD, WILDCARD_NAME)


class QueryAtom(namedtuple('QueryAtom', ['kind', 'predicate', 'terms'])):
    CONCEPT = 'concept'
    ROLE = 'role'
    EQ = 'eq'
    NEQ = 'neq'

    __slots__ = ()

    @property
    def is_positive(self):
        return self.kind in (self.CONCEPT, self.ROLE)

    @property
    def is_constraint(self):
        return self.kind in (self.EQ, self.NEQ)

    def variables(self):
        return [term.name for term in self.terms if term.is_var]

    def substitute(self, mapping):
        """Replaces every variable named in ``mapping`` by the mapped term."""
        terms = tuple(mapping.get(term.name, term) if term.is_var else term for term in self.terms)
        return QueryAtom(self.kind, self.predicate, terms)

    def same_shape(self, other):
        return self.kind == other.kind and self.predicate == other.predicate

    def __str__(self):
        if self.kind == self.EQ:
            return '%s == %s' % self.terms
        if self.kind == self.NEQ:
            return '%s != %s' % self.terms
        return '%s(%s)' % (self.predicate, ', '.join('%s' % (term,) for term in self.terms))


def concept_atom(name, term):
    return QueryAtom(QueryAtom.CONCEPT, name, (term,))


def role_atom(name, first, second):
    return QueryAtom(QueryAtom.ROLE, name, (first, second))


def eq(first, second):
    return QueryAtom(QueryAtom.EQ, '==', (first, second))


def neq(first, second):
    return QueryAtom(QueryAtom.NEQ, '!=', (first, second))


def atom_for(predicate, terms):
    if len(terms) == 1:
        return concept_atom(predicate, terms[0])
    return role_atom(predicate, terms[0], terms[1])


class Binding(Mapping):
    """An immutable, hashable assignment of individuals to variable names."""

    __slots__ = ('_items', '_hash')

    def __init__(self, *args, **kwargs):
        items = dict(*args, **kwargs)
        self._items = tuple(sorted(items.items()))
        self._hash = None

    def __getitem__(self, key):
        for name, value in self._items:
            if name == key:
                return value
        raise KeyError(key)

    def __iter__(self):
        return (name for name, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Binding):
            return self._items == other._items
        if isinstance(other, Mapping):
            return dict(self._items) == dict(other)
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __repr__(self):
        return 'Binding(%r)' % dict(self._items)

    def restrict(self, names):
        names = set(names)
        return Binding((name, value) for name, value in self._items if name in names)

    def extend(self, other):
        items = dict(self._items)
        items.update(other)
        return Binding(items)

    def sort_key(self, order=None):
        if order is None:
            return self._items
        return tuple(self.get(name, '') for name in order) + self._items

    def format(self, order=None):
        names = list(order) if order is not None else []
        names.extend(name for name, _ in self._items if name not in names)
        return '{%s}' % ', '.join('%s=%s' % (name, self[name]) for name in names if name in self)

    def __str__(self):
        return self.format()


class ConjunctiveQuery(object):
    """
    ``atoms`` are concept/role atoms plus Eq/Neq constraints, kept in written
    order. When ``free_vars`` is omitted, every variable without the
    existential prefix is free, in order of first appearance.
    """

    def __init__(self, atoms, free_vars=None, exist_vars=None):
        self.atoms = tuple(atoms)
        names = []

        for atom in self.atoms:
            for name in atom.variables():
                if name not in names:
                    names.append(name)

        if free_vars is None:
            free_vars = [name for name in names if not name.startswith(EXISTENTIAL_PREFIX)]

        self.free_vars = tuple(free_vars)

        if exist_vars is None:
            exist_vars = [name for name in names if name not in self.free_vars]

        self.exist_vars = frozenset(exist_vars)

        if self.exist_vars.intersection(self.free_vars):
            raise ValueError("Variables %s are both free and existential." % sorted(self.exist_vars.intersection(self.free_vars)))

        unknown = [name for name in names if name not in self.exist_vars and name not in self.free_vars]

        if unknown:
            raise ValueError("Variables %s are neither free nor existential." % unknown)

    @property
    def positive_atoms(self):
        return [atom for atom in self.atoms if atom.is_positive]

    @property
    def constraints(self):
        return [atom for atom in self.atoms if atom.is_constraint]

    @property
    def is_boolean(self):
        return not self.free_vars

    def variables(self):
        return list(self.free_vars) + sorted(self.exist_vars)

    def has_wildcard(self):
        return any(term.is_wildcard for atom in self.atoms for term in atom.terms)

    def substitute(self, binding):
        """Grounds the variables named in ``binding``; they leave the query."""
        mapping = dict((name, Const(value)) for name, value in binding.items())
        atoms = [atom.substitute(mapping) for atom in self.atoms]
        free_vars = [name for name in self.free_vars if name not in mapping]
        exist_vars = [name for name in self.exist_vars if name not in mapping]
        return ConjunctiveQuery(atoms, free_vars, exist_vars)

    def key(self):
        return (frozenset(self.atoms), self.free_vars)

    def __eq__(self, other):
        if not isinstance(other, ConjunctiveQuery):
            return NotImplemented
        return self.key() == other.key() and self.exist_vars == other.exist_vars

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return '<ConjunctiveQuery: %s>' % self

    def __str__(self):
        if not self.atoms:
            return 'true'
        return ' & '.join('%s' % (atom,) for atom in self.atoms)


class UnionQuery(object):
    """A disjunction of CQs. No disjuncts is ⊥; ``top`` is the ⊤ marker."""

    def __init__(self, disjuncts=(), top=False):
        self.top = bool(top)
        seen = set()
        kept = []

        if not self.top:
            for cq in disjuncts:
                if cq.key() not in seen:
                    seen.add(cq.key())
                    kept.append(cq)

        self.disjuncts = tuple(kept)

    @classmethod
    def bottom(cls):
        return cls()

    @classmethod
    def always(cls):
        return cls(top=True)

    @property
    def is_top(self):
        return self.top

    @property
    def is_bottom(self):
        return not self.top and not self.disjuncts

    @property
    def free_vars(self):
        if self.disjuncts:
            return self.disjuncts[0].free_vars
        return ()

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self):
        return len(self.disjuncts)

    def union(self, other):
        if self.top or other.top:
            return UnionQuery.always()
        return UnionQuery(self.disjuncts + other.disjuncts)

    def substitute(self, binding):
        if self.top:
            return self
        return UnionQuery([cq.substitute(binding) for cq in self.disjuncts])

    def __eq__(self, other):
        if not isinstance(other, UnionQuery):
            return NotImplemented
        return self.top == other.top and self.disjuncts == other.disjuncts

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self.top, self.disjuncts))

    def __repr__(self):
        return '<UnionQuery: %s>' % self

    def __str__(self):
        if self.top:
            return 'true'
        if not self.disjuncts:
            return 'false'
        if len(self.disjuncts) == 1:
            return '%s' % (self.disjuncts[0],)
        return ' | '.join('(%s)' % (cq,) if len(cq.atoms) > 1 else '%s' % (cq,) for cq in self.disjuncts)


class AboxIndex(object):
    """Assertions indexed by predicate and by each bound argument position."""

    def __init__(self, abox):
        self.assertions = frozenset(abox)
        self.by_predicate = defaultdict(list)
        self.by_position = defaultdict(list)

        for assertion in sorted(self.assertions):
            self.by_predicate[assertion.predicate].append(assertion)

            for position, individual in enumerate(assertion.args):
                self.by_position[(assertion.predicate, position, individual)].append(assertion)

    def __contains__(self, assertion):
        return assertion in self.assertions

    def __iter__(self):
        return iter(self.assertions)

    def __len__(self):
        return len(self.assertions)

    def candidates(self, predicate, arity, bound):
        """
        Assertions of ``predicate`` with ``arity`` arguments agreeing with the
        individuals in ``bound`` (``None`` marks an open position).
        """
        best = None

        for position, individual in enumerate(bound):
            if individual is not None:
                found = self.by_position.get((predicate, position, individual), ())
                if best is None or len(found) < len(best):
                    best = found

        if best is None:
            best = self.by_predicate.get(predicate, ())

        for assertion in best:
            if len(assertion.args) != arity:
                continue
            if all(individual is None or individual == arg for individual, arg in zip(bound, assertion.args)):
                yield assertion

    def count(self, predicate, arity, bound):
        if all(individual is None for individual in bound):
            return len(self.by_predicate.get(predicate, ()))
        return sum(1 for _ in self.candidates(predicate, arity, bound))


def index_abox(abox):
    if isinstance(abox, AboxIndex):
        return abox
    return AboxIndex(abox)


def _resolve(term, assignment):
    if term.is_const:
        return term.name
    if term.is_var:
        return assignment.get(term.name)
    return None


def _constraint_status(atom, assignment):
    """True/False once decided, None while a side is still unbound."""
    first, second = atom.terms

    if first.is_wildcard or second.is_wildcard:
        # ``x != _`` never holds, ``x == _`` always does.
        return atom.kind == QueryAtom.EQ

    left = _resolve(first, assignment)
    right = _resolve(second, assignment)

    if left is None or right is None:
        return None

    if atom.kind == QueryAtom.EQ:
        return left == right
    return left != right


def _check_safety(q, initial):
    grounded = set(initial)

    for atom in q.positive_atoms:
        grounded.update(atom.variables())

    pending = list(q.constraints)
    changed = True

    while changed:
        changed = False
        for atom in pending:
            if atom.kind != QueryAtom.EQ:
                continue
            names = atom.variables()
            if any(name in grounded for name in names) or len(names) < 2:
                before = len(grounded)
                grounded.update(names)
                changed = changed or len(grounded) != before

    for atom in pending:
        for name in atom.variables():
            if name not in grounded:
                raise UnsafeQuery("Variable '%s' in '%s' is not grounded by a positive atom." % (name, atom))


def _propagate_equalities(constraints, assignment):
    """Assigns variables fixed by an Eq with one bound side. Returns False on conflict."""
    changed = True

    while changed:
        changed = False
        for atom in constraints:
            if atom.kind != QueryAtom.EQ:
                continue
            first, second = atom.terms
            left = _resolve(first, assignment)
            right = _resolve(second, assignment)

            if left is None and right is not None and first.is_var:
                assignment[first.name] = right
                changed = True
            elif right is None and left is not None and second.is_var:
                assignment[second.name] = left
                changed = True

    return all(_constraint_status(atom, assignment) is not False for atom in constraints)


def _next_atom(atoms, assignment, index):
    best = None
    best_cost = None

    for position, atom in enumerate(atoms):
        bound = tuple(_resolve(term, assignment) for term in atom.terms)
        cost = index.count(atom.predicate, len(atom.terms), bound)

        if best is None or cost < best_cost:
            best = position
            best_cost = cost

            if cost == 0:
                break

    return best


def _search(atoms, constraints, assignment, index):
    if not atoms:
        final = dict(assignment)

        if _propagate_equalities(constraints, final) and all(_constraint_status(c, final) for c in constraints):
            yield final
        return

    position = _next_atom(atoms, assignment, index)
    atom = atoms[position]
    rest = atoms[:position] + atoms[position + 1:]
    bound = tuple(_resolve(term, assignment) for term in atom.terms)

    for assertion in index.candidates(atom.predicate, len(atom.terms), bound):
        extended = dict(assignment)
        ok = True

        for term, individual in zip(atom.terms, assertion.args):
            if term.is_var:
                current = extended.get(term.name)
                if current is None:
                    extended[term.name] = individual
                elif current != individual:
                    ok = False
                    break

        if not ok:
            continue

        if any(_constraint_status(c, extended) is False for c in constraints):
            continue

        for match in _search(rest, constraints, extended, index):
            yield match


def iter_matches(q, abox, binding=None):
    """
    Yields every total assignment (free and existential variables) under
    which ``q`` holds in DB(abox). ``binding`` pre-assigns variables.
    """
    index = index_abox(abox)
    names = set(q.variables())
    initial = dict((name, value) for name, value in (binding or {}).items() if name in names)
    _check_safety(q, initial)

    constraints = q.constraints
    if any(_constraint_status(c, initial) is False for c in constraints):
        return

    for match in _search(q.positive_atoms, constraints, initial, index):
        yield match


def _answer_order(answers, free_vars):
    return sorted(answers, key=lambda answer: answer.sort_key(free_vars))


def eval_cq(q, abox, binding=None):
    """
    Certain answers of ``q`` over DB(abox): bindings of the free variables,
    deduplicated and canonically ordered. A boolean query answers ``[{}]``
    when true and ``[]`` when false.
    """
    answers = set()
    free_vars = [name for name in q.free_vars if not binding or name not in binding]

    for match in iter_matches(q, abox, binding):
        answers.add(Binding((name, match[name]) for name in free_vars))

    return _answer_order(answers, free_vars)


def eval_ucq(query, abox, binding=None):
    if query.is_top:
        return [Binding()]

    index = index_abox(abox)
    answers = set()

    for cq in query:
        answers.update(eval_cq(cq, index, binding))

    free_vars = [name for name in query.free_vars if not binding or name not in binding]
    return _answer_order(answers, free_vars)


def first_match(query, abox, binding=None):
    """
    The first disjunct of ``query`` that holds, with one total assignment
    witnessing it, or ``None``.
    """
    if query.is_top:
        return (None, Binding())

    index = index_abox(abox)

    for cq in query:
        for match in iter_matches(cq, index, binding):
            return (cq, Binding(match))

    return None


def holds(query, abox, binding=None):
    if isinstance(query, ConjunctiveQuery):
        query = UnionQuery([query])
    return first_match(query, abox, binding) is not None


def matching_assertions(atom, binding, abox):
    """ABox assertions equal to ``atom`` grounded by ``binding``, with ``_`` matching anything."""
    index = index_abox(abox)
    bound = []

    for term in atom.terms:
        if term.is_wildcard:
            bound.append(None)
        elif term.is_const:
            bound.append(term.name)
        else:
            bound.append(binding[term.name])

    return list(index.candidates(atom.predicate, len(atom.terms), tuple(bound)))


def match_with_wildcards(atom, binding, abox):
    return bool(matching_assertions(atom, binding, abox))
