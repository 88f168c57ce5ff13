"""Independent brute-force reference implementations used as test oracles.

These deliberately share no code with the package: n-gram clipping is done by
multiset intersection, BGP evaluation by exhaustive nested loops over the
triple list, slot matching by enumerating every segmentation, and subsequence
checking by trying every index mapping.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

from splithygiene.qlang import Iri, Slot, Word


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def ref_corpus_bleu(candidates, references) -> dict:
    correct = [0, 0, 0, 0]
    total = [0, 0, 0, 0]
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand = list(cand)
        ref = list(ref)
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, 5):
            cand_grams = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
            ref_grams = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
            total[n - 1] += len(cand_grams)
            # multiset intersection, one gram at a time
            remaining = dict(ref_grams)
            for gram in cand_grams:
                if remaining.get(gram, 0) > 0:
                    remaining[gram] -= 1
                    correct[n - 1] += 1
    precisions = [c / t if t else 0.0 for c, t in zip(correct, total)]
    if cand_len == 0:
        bp = 0.0
    elif cand_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1 - ref_len / cand_len)
    if all(p > 0 for p in precisions):
        bleu = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / 4)
    else:
        bleu = 0.0
    return {"bleu": bleu, "precisions": precisions, "bp": bp,
            "candidate_len": cand_len, "reference_len": ref_len}


# ---------------------------------------------------------------------------
# Basic graph pattern evaluation
# ---------------------------------------------------------------------------

def _ref_unify(pattern, triple, binding):
    out = dict(binding)
    for term, value in zip(pattern, triple):
        if isinstance(term, Iri):
            if term.value != value:
                return None
        else:  # Var
            if out.get(term.name, value) != value:
                return None
            out[term.name] = value
    return out


def ref_eval(triples, ast):
    """Exhaustive nested-loop BGP join over a triple list."""
    triples = sorted(triples)
    bindings = [{}]
    for pattern in ast.patterns:
        new = []
        for binding in bindings:
            for triple in triples:
                unified = _ref_unify(pattern, triple, binding)
                if unified is not None:
                    new.append(unified)
        bindings = new
    if ast.form == "ask":
        return bool(bindings)
    rows = {tuple(b[v] for v in ast.select_vars) for b in bindings}
    return [dict(zip(ast.select_vars, row)) for row in sorted(rows)]


# ---------------------------------------------------------------------------
# Slot matching
# ---------------------------------------------------------------------------

def ref_match_all(pattern, nlq):
    """Every valid slot segmentation, as tuples of per-slot (start, end)."""
    elems = pattern.elements
    tokens = list(nlq)
    slots = [e.label for e in elems if isinstance(e, Slot)]
    results = []

    def walk(e, i, acc):
        if e == len(elems):
            if i == len(tokens):
                results.append(tuple(acc))
            return
        el = elems[e]
        if isinstance(el, Word):
            if i < len(tokens) and tokens[i].casefold() == el.token.casefold():
                walk(e + 1, i + 1, acc)
            return
        for end in range(i + 1, len(tokens) + 1):
            walk(e + 1, end, acc + [(i, end)])

    walk(0, 0, [])
    return slots, results


def ref_match_nlq(pattern, nlq):
    """Leftmost-shortest segmentation: lexicographically minimal span lengths."""
    slots, results = ref_match_all(pattern, nlq)
    if not results:
        return None
    best = min(results, key=lambda spans: tuple(end - start for start, end in spans))
    return dict(zip(slots, best))


def ref_subsequence(template_preds, instance_preds) -> bool:
    a, b = list(template_preds), list(instance_preds)
    if len(a) > len(b):
        return False
    for positions in itertools.combinations(range(len(b)), len(a)):
        if all(a[i] == b[p] for i, p in enumerate(positions)):
            return True
    return False


# ---------------------------------------------------------------------------
# De-duplication
# ---------------------------------------------------------------------------

def ref_dedup_keys(keys):
    """Pairwise-comparison dedup of canonical keys, first occurrence kept."""
    kept = []
    for key in keys:
        if not any(key == existing for existing in kept):
            kept.append(key)
    return kept
