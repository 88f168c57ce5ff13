from __future__ import annotations

import random

import pytest

from conftest import PIZZA_SEED_QUERY, INDUSTRY_TEMPLATE_QUERY
from splithygiene import kgstore
from splithygiene.errors import UnboundVariable
from splithygiene.qlang import ASK, Iri, Placeholder, QueryAst, Var, parse_query
from references import ref_eval

DBR = "http://dbpedia.org/resource/"
DBO_INDUSTRY = "http://dbpedia.org/ontology/industry"


# ---------------------------------------------------------------------------
# load_ntriples
# ---------------------------------------------------------------------------

def test_load_single_triple(tmp_path):
    path = tmp_path / "g.nt"
    path.write_text(f"<{DBR}Peter_Piper_Pizza> <{DBO_INDUSTRY}> <{DBR}Pizza> .\n")
    graph = kgstore.load_ntriples(path)
    assert len(graph) == 1
    assert (f"{DBR}Peter_Piper_Pizza", DBO_INDUSTRY, f"{DBR}Pizza") in graph


def test_load_duplicate_lines_collapse(tmp_path):
    path = tmp_path / "g.nt"
    line = "<e:s> <p:p> <e:o> .\n"
    path.write_text(line + line)
    assert len(kgstore.load_ntriples(path)) == 1


def test_load_skips_literals_and_counts(tmp_path):
    path = tmp_path / "g.nt"
    path.write_text(
        '<e:s> <p:p> "a literal" .\n'
        "<e:s> <p:p> <e:o1> .\n"
        "<e:s> <p:p> <e:o2> .\n"
    )
    graph = kgstore.load_ntriples(path)
    assert len(graph) == 2
    assert graph.load_report.skipped_literals == 1
    assert graph.load_report.malformed_lines == ()


def test_load_collects_malformed_lines(tmp_path):
    path = tmp_path / "g.nt"
    path.write_text(
        "# a comment\n"
        "\n"
        "not a triple at all\n"
        "<e:s> <p:p> <e:o> .\n"
        "<e:s> <p:p> missing_brackets .\n"
    )
    graph = kgstore.load_ntriples(path)
    assert len(graph) == 1
    assert graph.load_report.malformed_lines == (3, 5)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _graph(*triples):
    return kgstore.Graph(triples)


def test_ask_true_on_matching_graph():
    graph = _graph((f"{DBR}Peter_Piper_Pizza", DBO_INDUSTRY, f"{DBR}Pizza"))
    assert kgstore.evaluate(graph, parse_query(PIZZA_SEED_QUERY)) is True


def test_ask_false_on_empty_graph():
    assert kgstore.evaluate(_graph(), parse_query(PIZZA_SEED_QUERY)) is False


def test_select_rows_on_three_triple_graph():
    triples = [
        (f"{DBR}Peter_Piper_Pizza", DBO_INDUSTRY, f"{DBR}Pizza"),
        (f"{DBR}Robot_Comics", DBO_INDUSTRY, f"{DBR}Publishing"),
        (f"{DBR}Tiger_Aircraft", DBO_INDUSTRY, f"{DBR}Aerospace"),
    ]
    ast = parse_query(INDUSTRY_TEMPLATE_QUERY)
    rows = kgstore.evaluate(_graph(*triples), ast)
    assert rows == ref_eval(triples, ast)
    assert len(rows) == 3
    assert {(r["a"], r["b"]) for r in rows} == {(o, s) for s, _, o in triples}


def test_select_distinct_deduplicates():
    triples = [("e:s1", "p:p", "e:o"), ("e:s2", "p:p", "e:o")]
    ast = parse_query("SELECT DISTINCT ?o WHERE { ?s <p:p> ?o }")
    assert kgstore.evaluate(_graph(*triples), ast) == [{"o": "e:o"}]


def test_row_order_is_lexicographic():
    triples = [("e:s2", "p:p", "e:o2"), ("e:s1", "p:p", "e:o1"), ("e:s3", "p:p", "e:o0")]
    ast = parse_query("SELECT DISTINCT ?o, ?s WHERE { ?s <p:p> ?o }")
    rows = kgstore.evaluate(_graph(*triples), ast)
    assert rows == sorted(rows, key=lambda r: (r["o"], r["s"]))


def test_evaluate_rejects_placeholders():
    ast = parse_query("ASK WHERE { <Placeholder:A> <p:p> <e:o> }")
    with pytest.raises(ValueError):
        kgstore.evaluate(_graph(("e:s", "p:p", "e:o")), ast)


def test_unbound_select_variable():
    ast = QueryAst("select_distinct", ("ghost",), ((Var("s"), Iri("p:p"), Var("o")),))
    with pytest.raises(UnboundVariable):
        kgstore.evaluate(_graph(("e:s", "p:p", "e:o")), ast)


def _random_case(rnd: random.Random):
    entities = [f"e:{i}" for i in range(rnd.randrange(3, 10))]
    preds = [f"p:{i}" for i in range(rnd.randrange(1, 4))]
    triples = {(rnd.choice(entities), rnd.choice(preds), rnd.choice(entities))
               for _ in range(rnd.randrange(1, 200))}
    variables = ["x", "y", "z", "w"]
    patterns = []
    for _ in range(rnd.randrange(1, 4)):
        s = rnd.choice([Var(rnd.choice(variables)), Iri(rnd.choice(entities))])
        p = Iri(rnd.choice(preds))
        o = rnd.choice([Var(rnd.choice(variables)), Iri(rnd.choice(entities))])
        patterns.append((s, p, o))
    pattern_vars = sorted({t.name for pat in patterns for t in pat if isinstance(t, Var)})
    if pattern_vars and rnd.random() < 0.7:
        k = rnd.randrange(1, len(pattern_vars) + 1)
        ast = QueryAst("select_distinct", tuple(rnd.sample(pattern_vars, k)), tuple(patterns))
    else:
        ast = QueryAst(ASK, (), tuple(patterns))
    return sorted(triples), ast


def test_evaluate_matches_nested_loop_reference():
    rnd = random.Random(99)
    for _ in range(200):
        triples, ast = _random_case(rnd)
        assert kgstore.evaluate(kgstore.Graph(triples), ast) == ref_eval(triples, ast)


def test_ask_agrees_with_select_nonemptiness():
    rnd = random.Random(17)
    for _ in range(100):
        triples, ast = _random_case(rnd)
        graph = kgstore.Graph(triples)
        pattern_vars = sorted({t.name for pat in ast.patterns for t in pat if isinstance(t, Var)})
        ask = QueryAst(ASK, (), ast.patterns)
        if pattern_vars:
            select = QueryAst("select_distinct", tuple(pattern_vars), ast.patterns)
            assert kgstore.evaluate(graph, ask) == bool(kgstore.evaluate(graph, select))
        else:
            assert kgstore.evaluate(graph, ask) == ref_eval(triples, ask)
