# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

from dkb.actions import check_fresh, ground_atom
from dkb.consistency import find_violation
from dkb.constants import DEFAULT_THREADS, silently_fail
from dkb.exceptions import (DkbError, FreshConstantViolation, InconsistentInitialState, InvariantViolation, PathError,
                            PreconditionViolation, UnknownAction)
from dkb.kb import adom
from dkb.query import Binding, ConjunctiveQuery, Const, QueryAtom, UnionQuery, Var, eval_cq, first_match, neq
from dkb.rewriting import compute_E_minus_sub
from dkb.transition import Blocked, FocusPolicy, State, partial_step, successor_of


log = logging.getLogger('dkb')


class PathLabel(namedtuple('PathLabel', ['action', 'binding', 'focus'])):
    """One ``step:`` line: an action name or id, its binding, and an optional per-step focus."""
    __slots__ = ()

    def __new__(cls, action, binding, focus=None):
        return super(PathLabel, cls).__new__(cls, action, Binding(binding), focus)


class PathStep(namedtuple('PathStep', ['action', 'binding', 'source', 'target'])):
    __slots__ = ()


class PartialPath(object):
    """A finite run of the partial system: the initial partial state and each step taken from it."""

    def __init__(self, initial, steps=(), tbox=()):
        self.initial = initial if isinstance(initial, State) else State(initial)
        self.steps = list(steps)
        self.tbox = tuple(tbox)

    @property
    def labels(self):
        return [(step.action, step.binding) for step in self.steps]

    @property
    def states(self):
        return [self.initial] + [step.target for step in self.steps]

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        return '<PartialPath: %s>' % '; '.join('%s %s' % (s.action.name, s.binding) for s in self.steps)


def resolve_action(name, actions, state=None, binding=None):
    """
    Finds the rewritten action a label names: an exact ``base#k`` id, or a
    base name, resolved to the first variant whose guard holds on ``state``.
    """
    for action in actions:
        if action.name == name:
            return action

    variants = [action for action in actions if action.base.name == name]

    if not variants:
        raise UnknownAction("No action named '%s'." % name)

    if state is None:
        return variants[0]

    for action in variants:
        if eval_cq(action.guard, state.index, binding.restrict(action.guard_vars)):
            return action

    raise PathError("The guard of '%s' does not hold for %s on %s." % (name, binding, state))


def _check_binding(action, binding):
    expected = set(action.label_vars)
    given = set(binding)

    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise PathError("Binding %s of '%s' does not fit its variables (missing %s, unexpected %s)." % (
            binding, action.name, missing, extra))


def build_partial_path(initial, labels, actions, tbox=(), focus=None):
    """
    Runs ``labels`` in the partial system from ``initial``. Each step keeps
    what its own focus (or ``focus``) selects; a step whose guard fails,
    whose blocking query holds or whose fresh values are not fresh raises
    ``PathError``.
    """
    focus = focus or FocusPolicy.keep_all()
    state = initial if isinstance(initial, State) else State(initial)
    path = PartialPath(state, tbox=tbox)
    minted = set()

    for number, label in enumerate(labels, 1):
        action = resolve_action(label.action, actions, state, label.binding)
        _check_binding(action, label.binding)

        if not eval_cq(action.guard, state.index, label.binding.restrict(action.guard_vars)):
            raise PathError("Step %d: the guard of '%s' does not hold for %s." % (number, action.name, label.binding))

        try:
            check_fresh(action, label.binding, state.abox)
        except FreshConstantViolation as e:
            raise PathError("Step %d: %s" % (number, e))

        minted.update(label.binding[name] for name in action.fresh)
        result = partial_step(state, action, label.binding, label.focus or focus, minted=minted)

        if isinstance(result, Blocked):
            raise PathError("Step %d: '%s' is blocked by '%s'." % (number, action.name, result.disjunct))

        target = State(result.abox)
        path.steps.append(PathStep(action, label.binding, state, target))
        state = target

    return path


def _decided(atom):
    """Whether a constraint is always true or always false, or ``None``."""
    first, second = atom.terms

    if first.is_wildcard or second.is_wildcard:
        return atom.kind == QueryAtom.EQ

    if first.is_const and second.is_const:
        if atom.kind == QueryAtom.EQ:
            return first == second
        return first != second

    if first == second:
        return atom.kind == QueryAtom.EQ

    return None


def simplify(cq):
    """Drops ``cq`` (``None``) when a constraint never holds; strips those that always do."""
    kept = []

    for atom in cq.atoms:
        if atom.is_constraint:
            decided = _decided(atom)
            if decided is False:
                return None
            if decided is True:
                continue
        if atom not in kept:
            kept.append(atom)

    return ConjunctiveQuery(kept, cq.free_vars)


def _simplify_all(query):
    if query.is_top:
        return query
    return UnionQuery([cq for cq in (simplify(cq) for cq in query) if cq is not None])


def _erase(cq, deleted):
    """
    Regresses ``cq`` through the deletion of ``deleted``: ``None`` when its
    atom is ground and deleted, otherwise ``cq`` with ``z != ind`` for every
    deleted individual its existential could have matched.
    """
    atoms = cq.positive_atoms

    if len(atoms) > 1:
        raise InvariantViolation("Blocking disjunct '%s' has more than one atom." % cq)

    if not atoms or not deleted:
        return cq

    atom = atoms[0]
    temp = ConjunctiveQuery([atom], atom.variables())
    answers = eval_cq(temp, deleted)

    if not answers:
        return cq

    if not temp.free_vars:
        return None

    extra = []
    for answer in answers:
        for name, individual in answer.items():
            constraint = neq(Var(name), Const(individual))
            if constraint not in cq.atoms and constraint not in extra:
                extra.append(constraint)

    return ConjunctiveQuery(cq.atoms + tuple(extra), cq.free_vars, cq.exist_vars)


def global_blocking_query(path, instrument=None):
    """
    The blocking query of a whole partial path, built from the last step
    back to the first. When it is false on an ABox containing the path's
    initial state, the labels run from that ABox through consistent states
    containing the partial ones. ``instrument`` is called with each step
    index as it is processed.
    """
    query = UnionQuery.bottom()

    for position in range(len(path.steps) - 1, -1, -1):
        step = path.steps[position]
        if instrument is not None:
            instrument(position)

        added = frozenset(ground_atom(atom, step.binding) for atom in step.action.add)
        if first_match(query, added) is not None:
            log.debug("Step %d adds what the rest of the path must not find: blocking query is true.", position + 1)
            return UnionQuery.always()

        query = _simplify_all(query)

        deleted = compute_E_minus_sub(step.action.ent, step.binding, step.source.index)
        kept = []
        for cq in query:
            erased = _erase(cq, deleted)
            if erased is not None:
                kept.append(erased)

        query = UnionQuery(kept).union(step.action.blocking.substitute(step.binding))

    return _simplify_all(query)


class Verdict(namedtuple('Verdict', ['kind', 'query', 'disjunct', 'witness'])):
    CERTIFIED = 'certified'
    NOT_CERTIFIED = 'not-certified'
    TAUTOLOGY = 'tautology'
    FRESH_CLASH = 'fresh-clash'

    __slots__ = ()

    @property
    def is_certified(self):
        return self.kind == self.CERTIFIED

    def __str__(self):
        if self.kind == self.NOT_CERTIFIED:
            return '%s: %s %s' % (self.kind, self.disjunct, self.witness)
        if self.kind == self.FRESH_CLASH:
            return '%s: %s' % (self.kind, self.witness)
        return self.kind


def fresh_clash(path, full_initial):
    """
    The first fresh value on ``path`` that already occurs in ``full_initial``
    or was minted by an earlier step, as a one-variable binding, or ``None``.

    The individuals of every complete state lie within that set, so a path
    without a clash never reuses a name in the complete system.
    """
    taken = set(adom(full_initial))

    for step in path.steps:
        values = [(name, step.binding[name]) for name in step.action.fresh]

        for name, value in values:
            if value in taken:
                return Binding({name: value})

        taken.update(value for _, value in values)

    return None


def check_completion(path, full_initial, tbox=None):
    """Whether the labels of ``path`` run from ``full_initial`` through consistent states."""
    full_initial = frozenset(full_initial)
    tbox = path.tbox if tbox is None else tbox

    if not path.initial.abox <= full_initial:
        raise PreconditionViolation("The initial state of the path is not a subset of the initial ABox.")

    violation = find_violation(tbox, full_initial)
    if violation is not None:
        raise InconsistentInitialState("The initial ABox violates '%s' with %s." % violation)

    query = global_blocking_query(path)

    clash = fresh_clash(path, full_initial)
    if clash is not None:
        log.info("Fresh value %s of the path is not fresh in the complete system.", clash)
        return Verdict(Verdict.FRESH_CLASH, query, None, clash)

    if query.is_top:
        return Verdict(Verdict.TAUTOLOGY, query, None, None)

    match = first_match(query, full_initial)
    if match is not None:
        return Verdict(Verdict.NOT_CERTIFIED, query, match[0], match[1])

    return Verdict(Verdict.CERTIFIED, query, None, None)


class ReplayFailure(namedtuple('ReplayFailure', ['kind', 'index', 'detail'])):
    """Where a replay stopped: ``index`` is the number of the failing step (0 for the initial state)."""

    INCONSISTENT = 'inconsistent'
    GUARD_FAILED = 'guard-failed'
    FRESH_VIOLATION = 'fresh-violation'

    __slots__ = ()

    def __str__(self):
        return '%s at %d: %s' % (self.kind, self.index, self.detail)


def InconsistentAt(index, detail=''):
    return ReplayFailure(ReplayFailure.INCONSISTENT, index, detail)


def GuardFailedAt(index, detail=''):
    return ReplayFailure(ReplayFailure.GUARD_FAILED, index, detail)


def FreshViolationAt(index, detail=''):
    return ReplayFailure(ReplayFailure.FRESH_VIOLATION, index, detail)


class ReplayResult(namedtuple('ReplayResult', ['states', 'failure'])):
    __slots__ = ()

    @property
    def ok(self):
        return self.failure is None


def replay(full_initial, labels, tbox):
    """
    Runs ``(action, binding)`` labels in the complete system from
    ``full_initial`` without blocking queries, auditing every state.
    """
    state = State(full_initial, id=0)
    states = [state]

    violation = find_violation(tbox, state.abox)
    if violation is not None:
        return ReplayResult(states, InconsistentAt(0, '%s' % (violation[0],)))

    for number, (action, binding) in enumerate(labels, 1):
        if not eval_cq(action.guard, state.index, binding.restrict(action.guard_vars)):
            return ReplayResult(states, GuardFailedAt(number, '%s' % (action.guard,)))

        try:
            result = successor_of(state, action, binding)
        except FreshConstantViolation as e:
            return ReplayResult(states, FreshViolationAt(number, '%s' % e))

        state = State(result.abox, id=number)
        states.append(state)

        violation = find_violation(tbox, state.abox)
        if violation is not None:
            return ReplayResult(states, InconsistentAt(number, '%s' % (violation[0],)))

    return ReplayResult(states, None)


class PathRequest(namedtuple('PathRequest', ['initial', 'labels', 'focus'])):
    __slots__ = ()

    def __new__(cls, initial, labels, focus=None):
        return super(PathRequest, cls).__new__(cls, frozenset(initial), tuple(labels), focus)


def _check_one(doc, actions, request):
    path = build_partial_path(request.initial, request.labels, actions, doc.kb.tbox, request.focus)
    return check_completion(path, doc.kb.abox, doc.kb.tbox)


def check_paths(doc, requests, actions, threads=None):
    """
    Certifies several paths of ``doc``, in input order. A request that fails
    yields ``None`` when ``DKB_SILENTLY_FAIL`` is on and raises otherwise.
    """
    threads = threads or DEFAULT_THREADS
    requests = list(requests)

    def run(request):
        try:
            return _check_one(doc, actions, request)
        except DkbError as e:
            if not silently_fail():
                raise
            log.error("Failed to check path %s: %s", request.labels, e, exc_info=True)
            return None

    if threads > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(run, requests))

    return [run(request) for request in requests]

