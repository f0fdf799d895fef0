# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

from django.test import SimpleTestCase

from dkb.exceptions import ParseError
from dkb.kb import (ERROR, WARNING, BasicConcept, ConceptInclusion, Functionality, RoleExpr, RoleInclusion,
                    concept_assertion, role_assertion)
from dkb.parser import (format_assertion, parse_abox, parse_dkb, parse_focus, parse_path, parse_query, serialize_dkb,
                        tokenize)
from dkb.query import Binding, Const, Var, concept_atom, neq, role_atom
from dkb.transition import FocusPolicy
from tests.core import load_document, read_fixture


class TokenizeTestCase(SimpleTestCase):
    def test_tokens(self):
        tokens = tokenize('P-(x, "a b") <= create#2')
        self.assertEqual([t.value for t in tokens], ['P', '-', '(', 'x', ',', 'a b', ')', '<=', 'create#2'])
        self.assertEqual(tokens[5].kind, 'string')
        self.assertEqual(tokens[7].column, 14)


class ParseDocumentTestCase(SimpleTestCase):
    def test_example1(self):
        doc = load_document('example1.dkb')
        self.assertEqual(len(doc.kb.tbox), 2)
        self.assertEqual(doc.kb.abox, frozenset([concept_assertion('Technician', 't1'), concept_assertion('Product', 'p1')]))
        self.assertEqual([a.name for a in doc.actions], ['create', 'fire'])

        create = doc.action('create')
        self.assertEqual(create.fresh, ('y',))
        self.assertEqual(create.add, (concept_atom('Product', Var('y')),))
        self.assertEqual(create.delete, ())
        self.assertEqual(doc.action('fire').delete, (concept_atom('Employee', Var('x')),))
        self.assertIsNone(doc.action('hire'))

    def test_tbox_forms(self):
        doc = parse_dkb('\n'.join([
            '[tbox]',
            'Technician <= Employee',
            'Employee <= not Product',
            'exists worksFor- <= Company',
            'Manager <= exists manages',
            'manages <= worksFor-',
            'leads <= not manages',
            'funct manages-',
            '[abox]',
        ]))
        self.assertEqual(doc.kb.tbox, (
            ConceptInclusion(BasicConcept.atomic('Technician'), BasicConcept.atomic('Employee')),
            ConceptInclusion(BasicConcept.atomic('Employee'), BasicConcept.atomic('Product'), negated=True),
            ConceptInclusion(BasicConcept.exists_role(RoleExpr('worksFor', True)), BasicConcept.atomic('Company')),
            ConceptInclusion(BasicConcept.atomic('Manager'), BasicConcept.exists_role(RoleExpr('manages'))),
            RoleInclusion(RoleExpr('manages'), RoleExpr('worksFor', True)),
            RoleInclusion(RoleExpr('leads'), RoleExpr('manages'), negated=True),
            Functionality(RoleExpr('manages', True)),
        ))

    def test_empty_document(self):
        doc = parse_dkb('')
        self.assertEqual(doc.kb.tbox, ())
        self.assertEqual(doc.kb.abox, frozenset())
        self.assertEqual(doc.actions, [])

    def test_comments(self):
        doc = parse_dkb('# nothing here\n[tbox]\nA <= B  # trailing\n[abox]\n# A(a)\nB(b)\n')
        self.assertEqual(len(doc.kb.tbox), 1)
        self.assertEqual(doc.kb.abox, frozenset([concept_assertion('B', 'b')]))

    def test_inverse_assertion(self):
        doc = parse_dkb('[tbox]\nrole worksFor\n[abox]\nworksFor-(acme, t1), Technician(t1)\n')
        self.assertIn(role_assertion('worksFor', 't1', 'acme'), doc.kb.abox)

    def test_quoted_individual(self):
        doc = parse_dkb('[tbox]\n[abox]\nProduct("big box")\n')
        self.assertEqual(doc.kb.abox, frozenset([concept_assertion('Product', 'big box')]))

    def test_unknown_predicate_warns(self):
        doc = parse_dkb('[tbox]\nA <= B\n[abox]\nC(c)\n')
        self.assertEqual([d.level for d in doc.diagnostics], [WARNING])

    def test_bad_delete(self):
        with self.assertRaises(ParseError) as context:
            load_document('bad_delete.dkb')

        diagnostics = context.exception.diagnostics
        self.assertEqual(len(diagnostics), 1)
        self.assertEqual(diagnostics[0].level, ERROR)
        self.assertIn('_y', diagnostics[0].message)

    def test_errors_carry_positions(self):
        with self.assertRaises(ParseError) as context:
            parse_dkb('[tbox]\nA <= B\nA <=\n[abox]\nC(c, d, e)\n')

        spans = [(d.span.line, d.span.column) for d in context.exception.diagnostics]
        self.assertEqual(spans, [(3, 5), (5, 1)])

    def test_content_outside_section(self):
        self.assertRaises(ParseError, parse_dkb, 'A(a)\n[tbox]\n')

    def test_unknown_section(self):
        self.assertRaises(ParseError, parse_dkb, '[rules]\n')

    def test_duplicate_action(self):
        self.assertRaises(ParseError, parse_dkb, '[action] a\nguard: A(x)\n[action] a\nguard: B(x)\n')

    def test_missing_guard(self):
        self.assertRaises(ParseError, parse_dkb, '[action] a\nadd: A(x)\n')

    def test_wildcard_is_reserved_in_actions(self):
        self.assertRaises(ParseError, parse_dkb, '[action] a\nguard: P(x, _)\n')

    def test_fresh_in_guard(self):
        self.assertRaises(ParseError, parse_dkb, '[action] a\nguard: A(x)\nnew: x\nadd: B(x)\n')

    def test_role_used_as_concept(self):
        self.assertRaises(ParseError, parse_dkb, '[tbox]\nexists P <= A\n[abox]\nP(a)\n')

    def test_mixed_inclusion(self):
        self.assertRaises(ParseError, parse_dkb, '[tbox]\nrole P\nP <= exists R\n')

    def test_functional_specialization(self):
        doc = load_document('funct_specialized.dkb')
        self.assertEqual([d.level for d in doc.diagnostics], [WARNING])
        self.assertRaises(ParseError, parse_dkb, read_fixture('funct_specialized.dkb'), strict=True)


class SerializeTestCase(SimpleTestCase):
    def test_empty(self):
        self.assertEqual(serialize_dkb(parse_dkb('')), '[tbox]\n[abox]\n')

    def test_example1(self):
        self.assertEqual(serialize_dkb(load_document('example1.dkb')), '\n'.join([
            '[tbox]',
            'Employee <= not Product',
            'Technician <= Employee',
            '[abox]',
            'Product(p1)',
            'Technician(t1)',
            '',
            '[action] create',
            'guard: Employee(x)',
            'new: y',
            'add: Product(y)',
            'del:',
            '',
            '[action] fire',
            'guard: Employee(x)',
            'new:',
            'add:',
            'del: Employee(x)',
        ]) + '\n')

    def test_reads_back(self):
        for name in ('example1.dkb', 'example2.dkb', 'example3.dkb', 'funct_specialized.dkb'):
            doc = load_document(name)
            self.assertEqual(parse_dkb(serialize_dkb(doc)), doc)

    def test_roles_are_declared(self):
        doc = parse_dkb('[tbox]\nmanages <= worksFor-\n[abox]\n')
        text = serialize_dkb(doc)
        self.assertIn('role manages, worksFor\n', text)
        self.assertEqual(parse_dkb(text), doc)

    def test_format_assertion(self):
        self.assertEqual(format_assertion(role_assertion('P', 'a', 'big box')), 'P(a, "big box")')


class ParseAboxTestCase(SimpleTestCase):
    def test_with_and_without_header(self):
        self.assertEqual(parse_abox(read_fixture('example3_p1.abox')), frozenset([concept_assertion('Product', 'p1')]))
        self.assertEqual(parse_abox(read_fixture('example3_p2.abox')), frozenset([concept_assertion('Product', 'p2')]))

    def test_several_per_line(self):
        self.assertEqual(parse_abox('A(a), P(a, b)\n\nB(b)'), frozenset([
            concept_assertion('A', 'a'), role_assertion('P', 'a', 'b'), concept_assertion('B', 'b'),
        ]))

    def test_error(self):
        self.assertRaises(ParseError, parse_abox, 'A(a\n')


class ParseQueryTestCase(SimpleTestCase):
    def test_conjunction(self):
        query = parse_query('Employee(x) & worksFor(x, _c)')
        self.assertEqual(len(query), 1)
        self.assertEqual(query.free_vars, ('x',))
        self.assertEqual(query.disjuncts[0].exist_vars, frozenset(['_c']))

    def test_union(self):
        query = parse_query('(A(x) & B(x)) | C(x)')
        self.assertEqual('%s' % query, '(A(x) & B(x)) | C(x)')

    def test_individuals(self):
        query = parse_query('worksFor(x, acme) & x != "big boss"', individuals=['acme'])
        self.assertEqual(query.disjuncts[0].atoms, (
            role_atom('worksFor', Var('x'), Const('acme')),
            neq(Var('x'), Const('big boss')),
        ))

    def test_inverse(self):
        self.assertEqual(parse_query('worksFor-(c, x)').disjuncts[0].atoms, (role_atom('worksFor', Var('x'), Var('c')),))

    def test_constants(self):
        self.assertTrue(parse_query('true').is_top)
        self.assertTrue(parse_query(' false ').is_bottom)

    def test_disjuncts_must_share_free_variables(self):
        self.assertRaises(ParseError, parse_query, 'A(x) | B(y)')

    def test_syntax_error(self):
        self.assertRaises(ParseError, parse_query, 'A(x) &')
        self.assertRaises(ParseError, parse_query, 'A(x, _)')


class ParseFocusTestCase(SimpleTestCase):
    def test_forms(self):
        self.assertEqual(parse_focus('all'), FocusPolicy.keep_all())
        self.assertEqual(parse_focus(''), FocusPolicy.keep_all())
        self.assertEqual(parse_focus('sig:A, B'), FocusPolicy.only_signature(['A', 'B']))
        self.assertEqual(parse_focus('ind:a'), FocusPolicy.only_individuals(['a']))
        self.assertEqual(parse_focus('sig:A;ind:a,b'), FocusPolicy.both(['A'], ['a', 'b']))

    def test_bad(self):
        self.assertRaises(ParseError, parse_focus, 'pred:A')
        self.assertRaises(ParseError, parse_focus, 'sig:A;sig:B')


class ParsePathTestCase(SimpleTestCase):
    def test_fixture(self):
        labels = parse_path(read_fixture('example3_p1.path'))
        self.assertEqual([label.action for label in labels], ['pack', 'ship'])
        self.assertEqual(labels[0].binding, Binding(x='p1'))
        self.assertEqual(labels[1].focus, FocusPolicy.only_signature(['Shipped']))

    def test_rewritten_ids(self):
        labels = parse_path('step: create#2 with x=t1, y=n1\nstep: fire#2 with x=t1  # done\n')
        self.assertEqual([label.action for label in labels], ['create#2', 'fire#2'])
        self.assertEqual(labels[0].binding, {'x': 't1', 'y': 'n1'})
        self.assertIsNone(labels[0].focus)

    def test_no_binding(self):
        self.assertEqual(parse_path('step: reset')[0].binding, Binding())

    def test_errors(self):
        with self.assertRaises(ParseError) as context:
            parse_path('step: a with x=a, x=b\nmove: b\nstep: c keep pred:A\n')
        self.assertEqual([d.span.line for d in context.exception.diagnostics], [1, 2, 3])
