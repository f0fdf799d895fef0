# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
import random
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

from dkb.actions import instantiate_effects, rewrite_actions
from dkb.consistency import find_violation, is_consistent
from dkb.constants import DEFAULT_FRESH_POOL, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES, DEFAULT_THREADS, FRESH_PREFIX
from dkb.exceptions import InconsistentInitialState, InvariantViolation, PreconditionViolation
from dkb.kb import Assertion, adom, format_abox
from dkb.query import eval_cq, first_match, index_abox


log = logging.getLogger('dkb')


class State(object):
    """An ABox in canonical (sorted) form. Equality is assertion-set equality."""

    def __init__(self, abox, id=None):
        self.abox = frozenset(abox)
        self.assertions = tuple(sorted(self.abox))
        self.id = id
        self._index = None

    @property
    def index(self):
        if self._index is None:
            self._index = index_abox(self.abox)
        return self._index

    def individuals(self):
        return adom(self.abox)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.abox == other.abox

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.abox)

    def __repr__(self):
        return '<State %s: %s>' % (self.id, self)

    def __str__(self):
        return format_abox(self.abox)


def _as_state(state):
    if isinstance(state, State):
        return state
    return State(state)


class FocusPolicy(namedtuple('FocusPolicy', ['mode', 'signature', 'individuals'])):
    """Which part of a successor the partial system keeps."""

    KEEP_ALL = 'all'
    SIGNATURE = 'signature'
    INDIVIDUALS = 'individuals'
    BOTH = 'both'

    __slots__ = ()

    @classmethod
    def keep_all(cls):
        return cls(cls.KEEP_ALL, frozenset(), frozenset())

    @classmethod
    def only_signature(cls, names):
        return cls(cls.SIGNATURE, frozenset(names), frozenset())

    @classmethod
    def only_individuals(cls, names):
        return cls(cls.INDIVIDUALS, frozenset(), frozenset(names))

    @classmethod
    def both(cls, names, individuals):
        return cls(cls.BOTH, frozenset(names), frozenset(individuals))

    def keeps(self, assertion, minted=()):
        if self.mode in (self.SIGNATURE, self.BOTH) and assertion.predicate not in self.signature:
            return False

        if self.mode in (self.INDIVIDUALS, self.BOTH):
            for individual in assertion.args:
                if individual not in self.individuals and individual not in minted:
                    return False

        return True

    def apply(self, abox, minted=()):
        if self.mode == self.KEEP_ALL:
            return frozenset(abox)
        return frozenset(assertion for assertion in abox if self.keeps(assertion, minted))

    def __str__(self):
        parts = []
        if self.mode in (self.SIGNATURE, self.BOTH):
            parts.append('sig:%s' % ','.join(sorted(self.signature)))
        if self.mode in (self.INDIVIDUALS, self.BOTH):
            parts.append('ind:%s' % ','.join(sorted(self.individuals)))
        return ';'.join(parts) or 'all'


class Bounds(namedtuple('Bounds', ['max_depth', 'max_states', 'fresh_pool'])):
    __slots__ = ()

    def __new__(cls, max_depth=None, max_states=None, fresh_pool=None):
        return super(Bounds, cls).__new__(
            cls,
            DEFAULT_MAX_DEPTH if max_depth is None else max_depth,
            DEFAULT_MAX_STATES if max_states is None else max_states,
            DEFAULT_FRESH_POOL if fresh_pool is None else fresh_pool,
        )

    def __str__(self):
        return 'depth=%d max-states=%d fresh-pool=%d' % self


class Partial(namedtuple('Partial', ['focus', 'initial'])):
    """Explore the partial system from ``initial`` keeping what ``focus`` selects."""
    __slots__ = ()


class FreshNames(object):
    """
    Mints ``n1, n2, ...`` once each, skipping ``reserved`` names and the names
    of the state at hand. ``pool`` caps how many are ever minted.
    """

    def __init__(self, pool=None, reserved=(), prefix=None):
        self.pool = pool
        self.reserved = frozenset(reserved)
        self.prefix = prefix or FRESH_PREFIX
        self.minted = []
        self.counter = 0
        self.exhausted = False

    def _next(self, count, avoid):
        if self.pool is not None and len(self.minted) + count > self.pool:
            return None, self.counter

        names = []
        counter = self.counter
        while len(names) < count:
            counter += 1
            name = '%s%d' % (self.prefix, counter)
            if name in self.reserved or name in avoid:
                continue
            names.append(name)

        return tuple(names), counter

    def peek(self, count, avoid=()):
        """The names ``take`` would mint next with the same arguments, without minting them."""
        if count == 0:
            return ()

        return self._next(count, avoid)[0]

    def take(self, count, avoid=()):
        if count == 0:
            return ()

        names, self.counter = self._next(count, avoid)
        if names is None:
            self.exhausted = True
            return None

        self.minted.extend(names)
        return names


class TransitionLabel(namedtuple('TransitionLabel', ['action', 'binding'])):
    __slots__ = ()

    def __str__(self):
        return '%s %s' % (self.action, self.binding)


class Edge(namedtuple('Edge', ['source', 'label', 'target'])):
    __slots__ = ()


class BlockedEdge(namedtuple('BlockedEdge', ['source', 'label', 'reason', 'consistent'])):
    """A transition the blocking query stopped; ``consistent`` tells whether its successor would have been."""
    __slots__ = ()


class Successor(namedtuple('Successor', ['abox', 'removed', 'added'])):
    __slots__ = ()


class Blocked(namedtuple('Blocked', ['disjunct', 'witness'])):
    __slots__ = ()


class Inconsistent(namedtuple('Inconsistent', ['abox', 'disjunct', 'witness'])):
    __slots__ = ()


def applicable(state, action, fresh=None):
    """
    Guard answers of ``action`` on ``state``, each extended with one
    assignment of fresh individuals to the action's fresh variables.
    """
    state = _as_state(state)
    answers = eval_cq(action.guard, state.index)

    if not action.fresh:
        return answers

    if fresh is None:
        fresh = FreshNames(reserved=state.individuals())

    individuals = state.individuals()
    bindings = []

    for answer in answers:
        names = fresh.take(len(action.fresh), avoid=individuals)
        if names is None:
            break
        bindings.append(answer.extend(zip(action.fresh, names)))

    return bindings


def successor_of(state, action, binding):
    """The formula successor, without consulting the blocking query."""
    state = _as_state(state)
    to_remove, to_add = instantiate_effects(action, binding, state.index)
    return Successor((state.abox - to_remove) | to_add, to_remove, to_add)


def step(state, action, binding, tbox=(), audit=False):
    """
    Runs ``action`` under ``binding``: ``Blocked`` when its blocking query
    holds on the source, otherwise the successor. With ``audit``, the
    successor is checked against ``tbox`` and ``Inconsistent`` returned on
    failure.
    """
    state = _as_state(state)
    match = first_match(action.blocking, state.index, binding)

    if match is not None:
        return Blocked(*match)

    result = successor_of(state, action, binding)

    if audit:
        violation = find_violation(tbox, result.abox)
        if violation is not None:
            return Inconsistent(result.abox, *violation)

    return result


def partial_step(state, action, binding, focus, tbox=(), audit=False, minted=()):
    result = step(state, action, binding, tbox=tbox, audit=audit)

    if isinstance(result, Successor):
        return Successor(focus.apply(result.abox, minted), result.removed, result.added)

    return result


def quotient_key(abox, minted):
    """The assertion set with minted names renamed by order of first appearance."""
    minted = set(minted)

    def masked(assertion):
        return (assertion.predicate, tuple('' if arg in minted else arg for arg in assertion.args))

    renaming = {}
    renamed = []

    for assertion in sorted(abox, key=lambda a: (masked(a), a)):
        args = []
        for arg in assertion.args:
            if arg in minted:
                renaming.setdefault(arg, '#%d' % (len(renaming) + 1))
                arg = renaming[arg]
            args.append(arg)
        renamed.append(Assertion(assertion.predicate, tuple(args)))

    return frozenset(renamed)


class TransitionSystem(object):
    """States are numbered densely in discovery order."""

    def __init__(self, bounds=None, quotient_iso=False):
        self.bounds = bounds or Bounds()
        self.quotient_iso = quotient_iso
        self.states = []
        self.edges = []
        self.blocked = []
        self.initial = None
        self.truncated = False
        self.reasons = []
        self._ids = {}

    def _key(self, abox, minted):
        if self.quotient_iso:
            return quotient_key(abox, minted)
        return frozenset(abox)

    def lookup(self, abox, minted=()):
        return self._ids.get(self._key(abox, minted))

    def add_state(self, abox, minted=()):
        """Returns ``(id, is_new)``, or ``(None, False)`` when the state bound is hit."""
        key = self._key(abox, minted)

        if key in self._ids:
            return (self._ids[key], False)

        if len(self.states) >= self.bounds.max_states:
            self.truncate('max-states')
            return (None, False)

        state = State(abox, id=len(self.states))
        self.states.append(state)
        self._ids[key] = state.id

        if self.initial is None:
            self.initial = state.id

        return (state.id, True)

    def add_edge(self, source, label, target):
        self.edges.append(Edge(source, label, target))

    def truncate(self, reason):
        self.truncated = True
        if reason not in self.reasons:
            self.reasons.append(reason)

    def state(self, id):
        return self.states[id]

    def successors(self, id):
        return [edge for edge in self.edges if edge.source == id]

    def paths_to(self, id):
        """The label sequence of the BFS-tree path from the initial state to ``id``."""
        parents = {}
        for edge in self.edges:
            if edge.target not in parents and edge.target != self.initial:
                parents[edge.target] = edge

        labels = []
        while id != self.initial:
            edge = parents[id]
            labels.append(edge.label)
            id = edge.source

        return list(reversed(labels))

    def serialize(self):
        lines = []

        for state in self.states:
            if state.abox:
                lines.append('state %d: %s' % (state.id, state))
            else:
                lines.append('state %d:' % state.id)

        for edge in self.edges:
            lines.append('edge %d -> %d: %s' % (edge.source, edge.target, edge.label))

        for blocked in self.blocked:
            lines.append('blocked %d: %s: %s%s' % (
                blocked.source, blocked.label, blocked.reason,
                '' if blocked.consistent is None else ' (successor %s)' % ('consistent' if blocked.consistent else 'inconsistent'),
            ))

        if self.truncated:
            lines.append('truncated: true %s' % ','.join(self.reasons))
        else:
            lines.append('truncated: false')

        return '\n'.join(lines) + '\n'

    def as_dict(self):
        return {
            'states': [{'id': s.id, 'abox': ['%s' % (a,) for a in s.assertions]} for s in self.states],
            'edges': [{
                'source': e.source,
                'target': e.target,
                'action': e.label.action,
                'binding': dict(e.label.binding),
            } for e in self.edges],
            'blocked': [{
                'source': b.source,
                'action': b.label.action,
                'binding': dict(b.label.binding),
                'reason': b.reason,
                'successor_consistent': b.consistent,
            } for b in self.blocked],
            'truncated': self.truncated,
            'reason': ','.join(self.reasons),
        }


def _gvquote(text):
    return '"%s"' % text.replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n')


def to_dot(system):
    """Yields the lines of a DOT digraph for ``system``."""
    yield 'digraph "dkb" {'
    yield '  rankdir=LR;'
    yield '  node [shape=box, fontname="Helvetica"];'

    for state in system.states:
        label = '\n'.join('%s' % (a,) for a in state.assertions) or '{}'
        extra = ', peripheries=2' if state.id == system.initial else ''
        yield '  s%d [label=%s%s];' % (state.id, _gvquote(label), extra)

    for edge in system.edges:
        label = '%s%s' % (edge.label.action, edge.label.binding)
        yield '  s%d -> s%d [label=%s];' % (edge.source, edge.target, _gvquote(label))

    for number, blocked in enumerate(system.blocked):
        yield '  b%d [shape=point];' % number
        label = 'BLOCKED: %s' % (blocked.reason,)
        yield '  s%d -> b%d [style=dashed, label=%s];' % (blocked.source, number, _gvquote(label))

    yield '}'


def _guard_answers(state, actions):
    return [(action, eval_cq(action.guard, state.index)) for action in actions]


def explore(doc, bounds=None, partial=None, audit=False, explain=False, quotient_iso=False, threads=None, actions=None):
    """
    Breadth-first construction of the transition system of ``doc`` up to
    ``bounds``. With ``partial``, successors are filtered by its focus and
    exploration starts from its initial ABox, which must be part of the document's ABox.
    """
    bounds = bounds or Bounds()
    threads = threads or DEFAULT_THREADS
    tbox = doc.kb.tbox
    full_initial = doc.kb.abox

    if actions is None:
        actions = rewrite_actions(doc.actions, tbox, threads=threads)

    if partial is not None:
        initial = frozenset(partial.initial)
        if not initial <= full_initial:
            raise PreconditionViolation("The partial initial ABox is not a subset of the initial ABox.")
    else:
        initial = full_initial
        violation = find_violation(tbox, initial)
        if violation is not None:
            raise InconsistentInitialState("The initial ABox violates '%s' with %s." % violation)

    system = TransitionSystem(bounds, quotient_iso=quotient_iso)
    fresh = FreshNames(bounds.fresh_pool, reserved=adom(full_initial))
    root, _ = system.add_state(initial)
    frontier = [system.state(root)]
    depth = 0

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    try:
        while frontier:
            if executor is not None:
                evaluated = list(executor.map(lambda state: _guard_answers(state, actions), frontier))
            else:
                evaluated = [_guard_answers(state, actions) for state in frontier]

            if depth >= bounds.max_depth:
                if any(answers for results in evaluated for _, answers in results):
                    system.truncate('depth')
                break

            next_frontier = []

            for state, results in zip(frontier, evaluated):
                individuals = state.individuals()

                for action, answers in results:
                    for answer in answers:
                        if action.fresh:
                            names = fresh.take(len(action.fresh), avoid=individuals)
                            if names is None:
                                system.truncate('fresh-pool')
                                break
                            binding = answer.extend(zip(action.fresh, names))
                        else:
                            binding = answer

                        label = TransitionLabel(action.name, binding)

                        if partial is not None:
                            result = partial_step(state, action, binding, partial.focus, tbox=tbox, audit=audit, minted=fresh.minted)
                        else:
                            result = step(state, action, binding, tbox=tbox, audit=audit)

                        if isinstance(result, Inconsistent):
                            raise InvariantViolation(
                                "'%s' from state %d passed its blocking query but violates '%s'." % (label, state.id, result.disjunct))

                        if isinstance(result, Blocked):
                            if explain:
                                consistent = is_consistent(tbox, successor_of(state, action, binding).abox)
                                reason = '%s' % (result.disjunct.substitute(binding),)
                                system.blocked.append(BlockedEdge(state.id, label, reason, consistent))
                            continue

                        target, is_new = system.add_state(result.abox, fresh.minted)
                        if target is None:
                            continue

                        system.add_edge(state.id, label, target)
                        if is_new:
                            next_frontier.append(system.state(target))

            log.debug("Explored depth %d: %d states, %d edges.", depth, len(system.states), len(system.edges))
            frontier = next_frontier
            depth += 1
    finally:
        if executor is not None:
            executor.shutdown()

    if system.truncated:
        log.warning("Exploration truncated (%s) at %s.", ','.join(system.reasons), bounds)

    return system


class Walk(namedtuple('Walk', ['labels', 'states', 'truncated'])):
    """A random walk; ``truncated`` when the fresh pool kept an action with guard answers from firing."""
    __slots__ = ()


def simulate(doc, steps, seed=None, fresh_pool=None, actions=None):
    """
    A random walk over the complete system: at each state one enabled
    ``(action, binding)`` is picked uniformly. Fresh names are minted only
    for the picked pair, so every candidate of a step shares them.
    """
    rng = random.Random(seed)
    tbox = doc.kb.tbox

    if actions is None:
        actions = rewrite_actions(doc.actions, tbox)

    violation = find_violation(tbox, doc.kb.abox)
    if violation is not None:
        raise InconsistentInitialState("The initial ABox violates '%s' with %s." % violation)

    fresh = FreshNames(DEFAULT_FRESH_POOL if fresh_pool is None else fresh_pool, reserved=adom(doc.kb.abox))
    state = State(doc.kb.abox, id=0)
    states = [state]
    labels = []
    truncated = False

    for number in range(steps):
        individuals = state.individuals()
        enabled = []

        for action in actions:
            answers = eval_cq(action.guard, state.index)
            names = fresh.peek(len(action.fresh), avoid=individuals)

            if names is None:
                truncated = truncated or bool(answers)
                continue

            for answer in answers:
                binding = answer.extend(zip(action.fresh, names))
                result = step(state, action, binding)
                if isinstance(result, Successor):
                    enabled.append((action, TransitionLabel(action.name, binding), result))

        if not enabled:
            break

        action, label, result = rng.choice(enabled)
        fresh.take(len(action.fresh), avoid=individuals)
        state = State(result.abox, id=number + 1)
        labels.append(label)
        states.append(state)

    if truncated:
        log.warning("Walk truncated (fresh-pool): %d fresh names minted.", len(fresh.minted))

    return Walk(labels, states, truncated)
