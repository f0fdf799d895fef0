# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import argparse
import io
import json
import logging
import os
import sys

from django.core.management.color import color_style, no_style

import dkb
from dkb.actions import rewrite_actions
from dkb.blocking import build_partial_path, check_completion, replay
from dkb.consistency import find_violation
from dkb.constants import DEFAULT_FRESH_POOL, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES, DEFAULT_THREADS
from dkb.exceptions import (DkbError, InconsistentInitialState, InvariantViolation, ParseError, PathError,
                            PreconditionViolation, UnknownAction, UnreadableInput)
from dkb.kb import format_abox
from dkb.parser import parse_abox, parse_dkb, parse_focus, parse_path, parse_query
from dkb.query import UnionQuery, eval_ucq
from dkb.rewriting import perfect_ref
from dkb.transition import Bounds, Partial, explore, simulate, to_dot


log = logging.getLogger('dkb')

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def get_style():
    if os.environ.get('DKB_COLOR', '1') == '0':
        return no_style()
    return color_style()


class Command(object):
    """Shared state of one ``dkb`` invocation: options, output streams and styling."""

    def __init__(self, options, stdout, stderr):
        self.options = options
        self.stdout = stdout
        self.stderr = stderr
        self.style = get_style()

    def write(self, text='', style_func=None):
        if style_func is not None:
            text = style_func(text)
        self.stdout.write(text + '\n')

    def warn(self, text, style_func=None):
        style_func = style_func or self.style.WARNING
        self.stderr.write(style_func(text) + '\n')

    def write_json(self, data):
        self.stdout.write(json.dumps(data, sort_keys=True, indent=2) + '\n')

    def read(self, path):
        try:
            with io.open(path, encoding='utf-8') as handle:
                return handle.read()
        except (IOError, OSError, UnicodeDecodeError) as e:
            raise UnreadableInput("Cannot read '%s': %s" % (path, e))

    def load(self, strict=None):
        document = parse_dkb(self.read(self.options.kb), strict=strict)
        for diagnostic in document.diagnostics:
            self.warn('%s: %s' % (self.options.kb, diagnostic.format()))
        return document


def _diagnostic_dict(diagnostic):
    return {
        'level': diagnostic.level,
        'message': diagnostic.message,
        'line': diagnostic.span.line if diagnostic.span else None,
        'column': diagnostic.span.column if diagnostic.span else None,
    }


def cmd_validate(command):
    options = command.options
    strict = True if options.strict else None

    try:
        document = parse_dkb(command.read(options.kb), strict=strict)
        diagnostics = document.diagnostics
    except ParseError as e:
        diagnostics = e.diagnostics

    ok = not any(d.is_error for d in diagnostics)

    if options.json:
        command.write_json({'diagnostics': [_diagnostic_dict(d) for d in diagnostics], 'ok': ok})
    else:
        for diagnostic in diagnostics:
            style_func = command.style.ERROR if diagnostic.is_error else command.style.WARNING
            command.warn('%s: %s' % (options.kb, diagnostic.format()), style_func)
        if ok:
            command.write('ok', command.style.SUCCESS)

    return EXIT_OK if ok else EXIT_USAGE


def cmd_rewrite(command):
    document = command.load()
    actions = rewrite_actions(document.actions, document.kb.tbox, threads=command.options.threads)

    if command.options.json:
        command.write_json({'actions': [{
            'name': action.name,
            'base': action.base.name,
            'guard': '%s' % (action.guard,),
            'new': list(action.fresh),
            'add': ['%s' % (atom,) for atom in action.add],
            'del': ['%s' % (atom,) for atom in action.delete],
            'ent': ['%s' % (atom,) for atom in action.ent.atoms()],
            'blocking': '%s' % (action.blocking,),
        } for action in actions]})
        return EXIT_OK

    for number, action in enumerate(actions):
        if number:
            command.write()
        command.write('[action] %s' % action.name, command.style.SQL_TABLE)
        command.write('guard: %s' % ', '.join('%s' % (atom,) for atom in action.guard.atoms))
        command.write('new: %s' % ', '.join(action.fresh))
        command.write('add: %s' % ', '.join('%s' % (atom,) for atom in action.add))
        command.write('del: %s' % ', '.join('%s' % (atom,) for atom in action.delete))
        command.write('ent: %s' % (action.ent,))
        command.write('blocking: %s' % (action.blocking,))

    return EXIT_OK


def _bounds(options):
    return Bounds(options.depth, options.max_states, options.fresh_pool)


def cmd_explore(command):
    options = command.options
    document = command.load()
    partial = None

    if options.partial or options.init or options.focus:
        initial = parse_abox(command.read(options.init)) if options.init else document.kb.abox
        focus = parse_focus(options.focus or 'all')
        partial = Partial(focus, initial)

    bounds = _bounds(options)
    system = explore(
        document,
        bounds=bounds,
        partial=partial,
        audit=options.audit,
        explain=options.explain,
        quotient_iso=options.quotient_iso,
        threads=options.threads,
    )

    if options.dot:
        lines = '\n'.join(to_dot(system)) + '\n'
        if options.dot == '-':
            command.stdout.write(lines)
        else:
            with io.open(options.dot, 'w', encoding='utf-8') as handle:
                handle.write(lines)

    if options.json:
        command.write_json(system.as_dict())
    elif options.dot != '-':
        command.stdout.write(system.serialize())

    if system.truncated:
        command.warn('exploration truncated (%s) at %s' % (', '.join(system.reasons), bounds))

    return EXIT_OK


def cmd_query(command):
    options = command.options
    document = command.load()
    kb = document.kb
    query = parse_query(options.query, kb.individuals())

    if find_violation(kb.tbox, kb.abox) is not None:
        command.warn('%s: the knowledge base is inconsistent, every tuple is a certain answer' % options.kb)

    rewriting = _rewrite_query(query, kb.tbox)
    answers = eval_ucq(rewriting, kb.abox)
    boolean = not query.free_vars

    if options.json:
        command.write_json({
            'query': '%s' % query,
            'rewriting': '%s' % rewriting,
            'answers': [dict(answer) for answer in answers],
            'boolean': bool(answers) if boolean else None,
        })
        return EXIT_OK

    if boolean:
        command.write('true' if answers else 'false')
    else:
        for answer in answers:
            command.write(answer.format(query.free_vars))

    return EXIT_OK


def _rewrite_query(query, tbox):
    if query.is_top or query.is_bottom:
        return query

    rewriting = UnionQuery.bottom()
    for cq in query:
        rewriting = rewriting.union(perfect_ref(cq, tbox))
    return rewriting


def cmd_consistent(command):
    document = command.load()
    violation = find_violation(document.kb.tbox, document.kb.abox)

    if command.options.json:
        command.write_json({
            'consistent': violation is None,
            'witness': None if violation is None else {'query': '%s' % (violation[0],), 'binding': dict(violation[1])},
        })
    elif violation is None:
        command.write('consistent', command.style.SUCCESS)
    else:
        command.write('inconsistent: %s %s' % violation, command.style.ERROR)

    return EXIT_OK if violation is None else EXIT_NEGATIVE


def cmd_check_path(command):
    options = command.options
    document = command.load()
    labels = parse_path(command.read(options.path))
    initial = parse_abox(command.read(options.partial_init)) if options.partial_init else document.kb.abox
    focus = parse_focus(options.focus) if options.focus else None
    actions = rewrite_actions(document.actions, document.kb.tbox, threads=options.threads)

    path = build_partial_path(initial, labels, actions, document.kb.tbox, focus)
    verdict = check_completion(path, document.kb.abox)
    outcome = replay(document.kb.abox, path.labels, document.kb.tbox) if options.replay else None

    if options.json:
        command.write_json({
            'blocking_query': '%s' % (verdict.query,),
            'verdict': verdict.kind,
            'witness': None if verdict.witness is None else {
                'query': None if verdict.disjunct is None else '%s' % (verdict.disjunct,),
                'binding': dict(verdict.witness),
            },
            'replay': None if outcome is None else {
                'ok': outcome.ok,
                'states': [['%s' % (a,) for a in state.assertions] for state in outcome.states],
                'failure': None if outcome.ok else {
                    'kind': outcome.failure.kind,
                    'index': outcome.failure.index,
                    'detail': outcome.failure.detail,
                },
            },
        })
    else:
        command.write('blocking query: %s' % (verdict.query,))
        style_func = command.style.SUCCESS if verdict.is_certified else command.style.ERROR
        command.write('verdict: %s' % (verdict,), style_func)

        if outcome is not None:
            for state in outcome.states:
                command.write('state %d: %s' % (state.id, format_abox(state.abox)))
            if outcome.ok:
                command.write('replay: ok', command.style.SUCCESS)
            else:
                command.write('replay: %s' % (outcome.failure,), command.style.ERROR)

    return EXIT_OK if verdict.is_certified else EXIT_NEGATIVE


def cmd_simulate(command):
    options = command.options
    document = command.load()
    labels, states, truncated = simulate(document, options.steps, seed=options.seed, fresh_pool=options.fresh_pool)

    if options.json:
        command.write_json({
            'initial': ['%s' % (a,) for a in states[0].assertions],
            'steps': [{
                'action': label.action,
                'binding': dict(label.binding),
                'abox': ['%s' % (a,) for a in state.assertions],
            } for label, state in zip(labels, states[1:])],
            'truncated': truncated,
        })
        return EXIT_OK

    command.write('# state 0: %s' % (states[0],))
    for label, state in zip(labels, states[1:]):
        binding = ', '.join('%s=%s' % item for item in sorted(label.binding.items()))
        command.write('step: %s%s' % (label.action, ' with %s' % binding if binding else ''))
        command.write('# state %d: %s' % (state.id, state))

    if truncated:
        command.warn('walk truncated (fresh-pool)')

    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--json', action='store_true', help='Machine-readable output.')
    common.add_argument('--threads', type=int, default=DEFAULT_THREADS, help='Worker threads (default: %(default)s).')

    parser = argparse.ArgumentParser(prog='dkb', description='Dynamic knowledge bases: actions over DL-Lite knowledge bases.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + dkb.__version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    validate = commands.add_parser('validate', parents=[common], help='Check a document.')
    validate.add_argument('kb')
    validate.add_argument('--strict', action='store_true', help='Treat functional-role specialization as an error.')
    validate.set_defaults(handler=cmd_validate)

    rewrite = commands.add_parser('rewrite', parents=[common], help='Print the rewritten actions.')
    rewrite.add_argument('kb')
    rewrite.set_defaults(handler=cmd_rewrite)

    explore_parser = commands.add_parser('explore', parents=[common], help='Build the transition system.')
    explore_parser.add_argument('kb')
    explore_parser.add_argument('--depth', type=int, default=DEFAULT_MAX_DEPTH)
    explore_parser.add_argument('--max-states', type=int, default=DEFAULT_MAX_STATES)
    explore_parser.add_argument('--fresh-pool', type=int, default=DEFAULT_FRESH_POOL)
    explore_parser.add_argument('--partial', action='store_true', help='Explore the partial system.')
    explore_parser.add_argument('--init', help='ABox file with the partial initial state.')
    explore_parser.add_argument('--focus', help="Focus policy: all, sig:A,B, ind:a,b or sig:..;ind:..")
    explore_parser.add_argument('--dot', help="Write a DOT graph to this file ('-' for standard output).")
    explore_parser.add_argument('--quotient-iso', action='store_true', help='Identify states differing only in minted names.')
    explore_parser.add_argument('--explain', action='store_true', help='Record blocked transitions.')
    explore_parser.add_argument('--audit', action='store_true', help='Check every state for consistency.')
    explore_parser.set_defaults(handler=cmd_explore)

    query = commands.add_parser('query', parents=[common], help='Certain answers of a query.')
    query.add_argument('kb')
    query.add_argument('query')
    query.set_defaults(handler=cmd_query)

    consistent = commands.add_parser('consistent', parents=[common], help='Check consistency.')
    consistent.add_argument('kb')
    consistent.set_defaults(handler=cmd_consistent)

    check_path = commands.add_parser('check-path', parents=[common], help='Certify a partial path.')
    check_path.add_argument('kb')
    check_path.add_argument('path')
    check_path.add_argument('--partial-init', help='ABox file with the partial initial state.')
    check_path.add_argument('--focus', help='Default focus policy of every step.')
    check_path.add_argument('--replay', action='store_true', help='Also run the labels from the full initial ABox.')
    check_path.set_defaults(handler=cmd_check_path)

    simulate_parser = commands.add_parser('simulate', parents=[common], help='Random walk over the complete system.')
    simulate_parser.add_argument('kb')
    simulate_parser.add_argument('--steps', type=int, default=10)
    simulate_parser.add_argument('--seed', type=int, default=None)
    simulate_parser.add_argument('--fresh-pool', type=int, default=DEFAULT_FRESH_POOL)
    simulate_parser.set_defaults(handler=cmd_simulate)

    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    options = build_parser().parse_args(argv)
    command = Command(options, stdout, stderr)

    try:
        return options.handler(command)
    except ParseError as e:
        for diagnostic in e.diagnostics:
            command.warn(diagnostic.format(), command.style.ERROR)
        return EXIT_USAGE
    except (PathError, UnknownAction, PreconditionViolation, UnreadableInput) as e:
        command.warn('%s' % e, command.style.ERROR)
        return EXIT_USAGE
    except InconsistentInitialState as e:
        command.warn('%s' % e, command.style.ERROR)
        return EXIT_NEGATIVE
    except InvariantViolation as e:
        log.exception("Internal invariant violated.")
        command.warn('internal error: %s' % e, command.style.ERROR)
        return EXIT_INTERNAL
    except DkbError as e:
        command.warn('%s' % e, command.style.ERROR)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == '__main__':
    run()
