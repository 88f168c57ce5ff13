"""Leaky and sanitized corpus partitioning, plus training-set subsampling.

Leaky partitioning shuffles instances and cuts them 80/10/10 regardless of
templates. Sanitized partitioning first splits templates by their seeds, then
routes to the test split only instances whose attributed templates are
held-out ones; everything else forms a pool that is re-split 90/10 into train
and validation. The guarantee is strict: no test instance shares an
attributed template with any train or validation instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor

from . import rng
from .attribution import AttributionIndex, template_matches_seed
from .errors import RatioError


@dataclass(frozen=True)
class Split3:
    """Train/valid/test instance lists; disjoint by id, union = input."""

    train: tuple
    valid: tuple
    test: tuple

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.valid), len(self.test))


@dataclass(frozen=True)
class TemplateSplit:
    """Disjoint template-id sets coordinated by the seed split."""

    train_template_ids: frozenset[str]
    test_template_ids: frozenset[str]
    source_ratio: float
    # templates matching both train and test seeds; routed to test
    both_matched_ids: frozenset[str] = frozenset()


def _exact(value: float) -> Fraction:
    # str() round-trips the shortest decimal, so 0.1 means 1/10, not its
    # binary approximation; split arithmetic must be exact
    return Fraction(str(value))


def _check_ratios(ratios) -> tuple[Fraction, Fraction, Fraction]:
    if len(ratios) != 3:
        raise RatioError(f"need three ratios, got {len(ratios)}")
    fracs = tuple(_exact(r) for r in ratios)
    if any(f < 0 for f in fracs):
        raise RatioError(f"ratios must be non-negative: {ratios}")
    if abs(float(sum(fracs)) - 1.0) > 1e-9:
        raise RatioError(f"ratios must sum to 1: {ratios}")
    return fracs


def _ordered_subset(items, indices) -> tuple:
    chosen = set(indices)
    return tuple(item for i, item in enumerate(items) if i in chosen)


def leaky_partition(instances, ratios=(0.8, 0.1, 0.1), rng_seed: int = 0) -> Split3:
    """Random template-naive split.

    With N instances and ratios (r_train, r_valid, r_test):
    n_valid = floor(r_valid*N), n_test = ceil(r_test*N), n_train = the rest;
    a seeded shuffle assigns the train block, then valid, then test.
    """
    _, r_valid, r_test = _check_ratios(ratios)
    items = list(instances)
    n = len(items)
    n_valid = floor(r_valid * n)
    n_test = ceil(r_test * n)
    n_train = n - n_valid - n_test
    order = rng.permutation(n, rng_seed, "leaky-partition")
    return Split3(
        train=_ordered_subset(items, order[:n_train]),
        valid=_ordered_subset(items, order[n_train:n_train + n_valid]),
        test=_ordered_subset(items, order[n_train + n_valid:]),
    )


def split_templates(templates, seeds, seed_test_ids) -> TemplateSplit:
    """Coordinate a template split with a seed split.

    A template goes to test iff it matches at least one seed whose id is in
    `seed_test_ids`; templates matching both sides are routed to test and
    reported via `both_matched_ids`.
    """
    test_ids: set[str] = set()
    train_ids: set[str] = set()
    both: set[str] = set()
    seed_list = list(seeds)
    test_seed_ids = set(seed_test_ids)
    for t in templates:
        matched = [s.id for s in seed_list if template_matches_seed(t, s)]
        in_test = any(sid in test_seed_ids for sid in matched)
        in_train = any(sid not in test_seed_ids for sid in matched)
        if in_test:
            test_ids.add(t.id)
            if in_train:
                both.add(t.id)
        else:
            train_ids.add(t.id)
    ratio = len(test_seed_ids) / len(seed_list) if seed_list else 0.0
    return TemplateSplit(
        train_template_ids=frozenset(train_ids),
        test_template_ids=frozenset(test_ids),
        source_ratio=ratio,
        both_matched_ids=frozenset(both),
    )


def sanitized_partition(
    instances,
    tsplit: TemplateSplit,
    index: AttributionIndex,
    rng_seed: int = 0,
    valid_fraction: float = 0.1,
) -> Split3:
    """Template-coordinated split whose test set is strictly unseen.

    An instance is a test candidate iff its attributed set is non-empty,
    intersects the test templates, and avoids the train templates. Ambiguous
    and unattributed instances always join the train pool. Candidates that
    still share an attributed template with any pool instance are demoted to
    the pool until none remain, which makes the no-shared-template guarantee
    unconditional. The pool is then shuffled and cut 90/10 into train/valid.
    """
    items = list(instances)
    test_tids = tsplit.test_template_ids
    train_tids = tsplit.train_template_ids

    def is_candidate(inst) -> bool:
        attributed = set(index.attributed(inst.id))
        return bool(attributed) and bool(attributed & test_tids) and not (attributed & train_tids)

    in_test = {inst.id: is_candidate(inst) for inst in items}
    while True:
        pool_templates = {
            tid for inst in items if not in_test[inst.id] for tid in index.attributed(inst.id)
        }
        demote = [
            inst.id for inst in items
            if in_test[inst.id] and set(index.attributed(inst.id)) & pool_templates
        ]
        if not demote:
            break
        for iid in demote:
            in_test[iid] = False

    test = tuple(inst for inst in items if in_test[inst.id])
    pool = [inst for inst in items if not in_test[inst.id]]
    n_valid = floor(_exact(valid_fraction) * len(pool))
    order = rng.permutation(len(pool), rng_seed, "sanitized-valid")
    valid_idx = set(order[:n_valid])
    return Split3(
        train=tuple(inst for i, inst in enumerate(pool) if i not in valid_idx),
        valid=tuple(inst for i, inst in enumerate(pool) if i in valid_idx),
        test=test,
    )


def subsample_train(split: Split3, fraction: float, rng_seed: int = 0) -> Split3:
    """Replace train with a seeded sample of floor(fraction*|train|) instances.

    The same rng_seed yields nested samples across growing fractions; valid
    and test are untouched.
    """
    frac = _exact(fraction)
    if not (0 < frac <= 1):
        raise RatioError(f"fraction must be in (0, 1]: {fraction}")
    if frac == 1:
        return split
    k = floor(frac * len(split.train))
    order = rng.permutation(len(split.train), rng_seed, "subsample-train")
    return Split3(
        train=_ordered_subset(split.train, order[:k]),
        valid=split.valid,
        test=split.test,
    )


def diagnostics(split: Split3, index: AttributionIndex, tsplit: TemplateSplit | None = None) -> dict:
    """Ambiguity/attribution counters and per-split template histograms."""
    all_instances = list(split.train) + list(split.valid) + list(split.test)
    ambiguous = sum(1 for inst in all_instances if inst.id in index.ambiguous_ids)
    unattributed = sum(1 for inst in all_instances if not index.attributed(inst.id))
    histograms = {}
    for name, instances in (("train", split.train), ("valid", split.valid), ("test", split.test)):
        hist: dict[str, int] = {}
        for inst in instances:
            for tid in index.attributed(inst.id):
                hist[tid] = hist.get(tid, 0) + 1
        histograms[name] = dict(sorted(hist.items()))
    out = {
        "ambiguous_count": ambiguous,
        "unattributed_count": unattributed,
        "template_histograms": histograms,
    }
    if tsplit is not None:
        out["templates_matching_both_seed_splits"] = sorted(tsplit.both_matched_ids)
    return out
