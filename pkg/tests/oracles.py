# encoding: utf-8
"""
Brute-force reasoners the library is checked against. They work on the
TBox directly and share no code with ``dkb`` beyond the data types.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from dkb.kb import ConceptInclusion, Functionality, RoleExpr, RoleInclusion


NULL_PREFIX = '_:'


def is_null(term):
    return term.startswith(NULL_PREFIX)


def _has_concept(facts, concept, term):
    if not concept.exists:
        return (concept.name, (term,)) in facts
    position = 1 if concept.inverted else 0
    return any(f[0] == concept.name and len(f[1]) == 2 and f[1][position] == term for f in facts)


def _role_pairs(facts, role):
    for predicate, args in list(facts):
        if predicate == role.name and len(args) == 2:
            yield (args[1], args[0]) if role.inverted else args


def _oriented(role, first, second):
    return (role.name, (second, first) if role.inverted else (first, second))


def _terms(facts):
    found = set()
    for _, args in facts:
        found.update(args)
    return sorted(found)


def chase(tbox, abox, depth=3, folded=False):
    """
    The chase of ``abox`` under the positive inclusions of ``tbox``.

    Nulls are created up to ``depth`` levels below the individuals. With
    ``folded`` every existential ``exists Q`` shares one null per role
    expression, which keeps the result finite and preserves every
    (non-)violation of a negative inclusion.
    """
    facts = set((a.predicate, tuple(a.args)) for a in abox)
    level = dict((term, 0) for term in _terms(facts))
    applied = set()
    counter = [0]

    concept_rules = [a for a in tbox if isinstance(a, ConceptInclusion) and not a.negated]
    role_rules = [a for a in tbox if isinstance(a, RoleInclusion) and not a.negated]

    def null_for(role, term):
        if folded:
            name = '%s%s%s' % (NULL_PREFIX, role.name, '-' if role.inverted else '')
        else:
            counter[0] += 1
            name = '%s%d' % (NULL_PREFIX, counter[0])
        level.setdefault(name, level[term] + 1)
        return name

    changed = True
    while changed:
        changed = False

        for rule in role_rules:
            for first, second in list(_role_pairs(facts, rule.lhs)):
                fact = _oriented(rule.rhs, first, second)
                if fact not in facts:
                    facts.add(fact)
                    changed = True

        for rule in concept_rules:
            for term in _terms(facts):
                if not _has_concept(facts, rule.lhs, term):
                    continue

                rhs = rule.rhs
                if not rhs.exists:
                    fact = (rhs.name, (term,))
                    if fact not in facts:
                        facts.add(fact)
                        changed = True
                    continue

                key = (rule, term)
                if key in applied:
                    continue
                if not folded and (level[term] >= depth or _has_concept(facts, rhs, term)):
                    continue

                applied.add(key)
                facts.add(_oriented(rhs.role, term, null_for(rhs.role, term)))
                changed = True

    return facts


def _violates(facts, assertion, individuals_only=False):
    if isinstance(assertion, Functionality):
        successors = {}
        for first, second in _role_pairs(facts, assertion.role):
            if individuals_only and (is_null(first) or is_null(second)):
                continue
            successors.setdefault(first, set()).add(second)
        return any(len(values) > 1 for values in successors.values())

    if isinstance(assertion, ConceptInclusion):
        return any(_has_concept(facts, assertion.lhs, t) and _has_concept(facts, assertion.rhs, t) for t in _terms(facts))

    pairs = set(_role_pairs(facts, assertion.rhs))
    for pair in _role_pairs(facts, assertion.lhs):
        # folding merges distinct null-to-null edges, those are checked per creation edge instead
        if pair in pairs and not (is_null(pair[0]) and is_null(pair[1])):
            return True
    return False


def _creation_edge(null, role_rules):
    """The role facts on a single edge created for the null ``null``."""
    name = null[len(NULL_PREFIX):]
    role = RoleExpr(name.rstrip('-'), name.endswith('-'))
    facts = set([_oriented(role, 's', 't')])

    changed = True
    while changed:
        changed = False
        for rule in role_rules:
            for first, second in list(_role_pairs(facts, rule.lhs)):
                fact = _oriented(rule.rhs, first, second)
                if fact not in facts:
                    facts.add(fact)
                    changed = True

    return facts


def consistent(tbox, abox):
    """Checks every negative inclusion and functionality of ``tbox`` against the folded chase."""
    facts = chase(tbox, abox, folded=True)

    for assertion in tbox:
        if isinstance(assertion, Functionality):
            if _violates(facts, assertion, individuals_only=True):
                return False
        elif assertion.negated and _violates(facts, assertion):
            return False

    role_rules = [a for a in tbox if isinstance(a, RoleInclusion) and not a.negated]
    role_negatives = [a for a in tbox if isinstance(a, RoleInclusion) and a.negated]

    for null in set(t for t in _terms(facts) if is_null(t)):
        edge = _creation_edge(null, role_rules)
        if any(_violates(edge, assertion) for assertion in role_negatives):
            return False

    return True


def _match(atoms, by_predicate, assignment):
    if not atoms:
        yield dict(assignment)
        return

    atom, rest = atoms[0], atoms[1:]

    for args in by_predicate.get(atom.predicate, ()):
        if len(args) != len(atom.terms):
            continue

        extended = dict(assignment)
        ok = True

        for term, value in zip(atom.terms, args):
            if term.is_const:
                ok = term.name == value
            elif term.is_var:
                ok = extended.setdefault(term.name, value) == value
            if not ok:
                break

        if ok:
            for match in _match(rest, by_predicate, extended):
                yield match


def homomorphisms(q, facts):
    """Every assignment of the variables of ``q`` mapping its atoms into ``facts``."""
    by_predicate = {}
    for predicate, args in facts:
        by_predicate.setdefault(predicate, []).append(args)

    for match in _match(list(q.positive_atoms), by_predicate, {}):
        if all(_constraint_holds(c, match) for c in q.constraints):
            yield match


def _constraint_holds(atom, match):
    values = [t.name if t.is_const else match.get(t.name) for t in atom.terms]
    if atom.kind == 'eq':
        return values[0] == values[1]
    return values[0] != values[1]


def certain_answers(q, tbox, abox, depth=3):
    """Answers of ``q`` over the chase that mention no null, as tuples in free-variable order."""
    facts = chase(tbox, abox, depth=depth)
    answers = set()

    for match in homomorphisms(q, facts):
        answer = tuple(match[name] for name in q.free_vars)
        if not any(is_null(value) for value in answer):
            answers.add(answer)

    return answers
