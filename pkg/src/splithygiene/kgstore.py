"""In-memory triple store with basic-graph-pattern evaluation.

Stands in for a live SPARQL endpoint: holds IRI-only triples loaded from an
N-Triples file and answers the ASK / SELECT DISTINCT subset of qlang.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import UnboundVariable
from .qlang import ASK, Iri, QueryAst, Var

_TRIPLE_LINE = re.compile(r"^<([^<>\s]+)>\s+<([^<>\s]+)>\s+(.+?)\s*\.\s*$")
_IRI_OBJECT = re.compile(r"^<([^<>\s]+)>$")


@dataclass(frozen=True)
class LoadReport:
    triple_count: int
    skipped_literals: int
    malformed_lines: tuple[int, ...]


class Graph:
    """Immutable set of (subject, predicate, object) IRI triples with indexes."""

    def __init__(self, triples, load_report: LoadReport | None = None):
        self.triples: frozenset[tuple[str, str, str]] = frozenset(triples)
        self.load_report = load_report
        by_p: dict[str, list[tuple[str, str]]] = {}
        by_ps: dict[tuple[str, str], list[str]] = {}
        by_po: dict[tuple[str, str], list[str]] = {}
        for s, p, o in sorted(self.triples):
            by_p.setdefault(p, []).append((s, o))
            by_ps.setdefault((p, s), []).append(o)
            by_po.setdefault((p, o), []).append(s)
        self._by_p = by_p
        self._by_ps = by_ps
        self._by_po = by_po
        self._all = sorted(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self.triples


def load_ntriples(path) -> Graph:
    """Load IRI-object triples from an N-Triples file.

    Literal-object lines are skipped and counted; lines that are neither
    comments, blank, nor well-formed triples are recorded as malformed
    (1-based line numbers) in the graph's load report, not raised.
    """
    triples: set[tuple[str, str, str]] = set()
    skipped = 0
    malformed: list[int] = []
    with open(Path(path), encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            m = _TRIPLE_LINE.match(stripped)
            if not m:
                malformed.append(line_no)
                continue
            obj_text = m.group(3)
            obj = _IRI_OBJECT.match(obj_text)
            if obj:
                triples.add((m.group(1), m.group(2), obj.group(1)))
            elif obj_text.startswith('"'):
                skipped += 1
            else:
                malformed.append(line_no)
    report = LoadReport(len(triples), skipped, tuple(malformed))
    return Graph(triples, report)


def _resolve(term, binding: dict[str, str]):
    if isinstance(term, Var) and term.name in binding:
        return Iri(binding[term.name])
    return term


def _estimate(graph: Graph, pattern, binding: dict[str, str]) -> int:
    s, p, o = (_resolve(t, binding) for t in pattern)
    if isinstance(p, Iri):
        if isinstance(s, Iri) and isinstance(o, Iri):
            return 1
        if isinstance(s, Iri):
            return len(graph._by_ps.get((p.value, s.value), ()))
        if isinstance(o, Iri):
            return len(graph._by_po.get((p.value, o.value), ()))
        return len(graph._by_p.get(p.value, ()))
    return len(graph._all)


def _extend(graph: Graph, pattern, binding: dict[str, str]):
    """Yield bindings extending `binding` to solutions of one pattern."""
    s, p, o = (_resolve(t, binding) for t in pattern)

    def unify(new_binding, term, value) -> dict[str, str] | None:
        if isinstance(term, Iri):
            return new_binding if term.value == value else None
        name = term.name
        if name in new_binding:
            return new_binding if new_binding[name] == value else None
        nb = dict(new_binding)
        nb[name] = value
        return nb

    if isinstance(p, Iri):
        if isinstance(s, Iri) and isinstance(o, Iri):
            if (s.value, p.value, o.value) in graph.triples:
                yield binding
            return
        if isinstance(s, Iri):
            for obj in graph._by_ps.get((p.value, s.value), ()):
                nb = unify(binding, o, obj)
                if nb is not None:
                    yield nb
            return
        if isinstance(o, Iri):
            for subj in graph._by_po.get((p.value, o.value), ()):
                nb = unify(binding, s, subj)
                if nb is not None:
                    yield nb
            return
        for subj, obj in graph._by_p.get(p.value, ()):
            nb = unify(binding, s, subj)
            if nb is None:
                continue
            nb = unify(nb, o, obj)
            if nb is not None:
                yield nb
        return
    for subj, pred, obj in graph._all:
        nb = unify(binding, s, subj)
        if nb is None:
            continue
        nb = unify(nb, p, pred)
        if nb is None:
            continue
        nb = unify(nb, o, obj)
        if nb is not None:
            yield nb


def _solutions(graph: Graph, patterns, binding: dict[str, str], stop_at_first: bool):
    if not patterns:
        yield binding
        return
    # greedy: evaluate the currently most selective pattern first
    idx = min(range(len(patterns)), key=lambda i: (_estimate(graph, patterns[i], binding), i))
    rest = patterns[:idx] + patterns[idx + 1:]
    for nb in _extend(graph, patterns[idx], binding):
        for sol in _solutions(graph, rest, nb, stop_at_first):
            yield sol
            if stop_at_first:
                return


def evaluate(graph: Graph, ast: QueryAst):
    """Evaluate a placeholder-free query.

    ASK returns a bool; SELECT DISTINCT returns deduplicated binding rows,
    ordered lexicographically by the bound IRIs in select-variable order.
    """
    if ast.has_placeholders():
        raise ValueError("query still contains placeholder terms")
    if ast.form == ASK:
        return next(_solutions(graph, list(ast.patterns), {}, True), None) is not None
    pattern_vars = ast.variables()
    for v in ast.select_vars:
        if v not in pattern_vars:
            raise UnboundVariable(f"?{v} never appears in the query patterns")
    rows = {
        tuple(sol[v] for v in ast.select_vars)
        for sol in _solutions(graph, list(ast.patterns), {}, False)
    }
    return [dict(zip(ast.select_vars, row)) for row in sorted(rows)]
