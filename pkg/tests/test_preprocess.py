from fractions import Fraction

import numpy as np
import pytest

from fairdep.data import Dataset, Example, MAJORITY, MINORITY
from fairdep.preprocess import (
    MassagingPlan,
    MixupConfig,
    apply_massaging,
    discrimination,
    massaging_plan,
    mixup_balance,
    relabel_pair_count,
)
from fairdep.synth import preset_config, generate


def counted_dataset(minority_pos, minority_total, majority_pos, majority_total, dim=2, seed=0):
    """One example per subject with the given (group, class) counts."""
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(minority_total):
        label = 1.0 if i < minority_pos else 0.0
        examples.append(Example(rng.normal(size=dim), label, MINORITY, f"min{i:03d}"))
    for i in range(majority_total):
        label = 1.0 if i < majority_pos else 0.0
        examples.append(Example(rng.normal(size=dim), label, MAJORITY, f"maj{i:03d}"))
    return Dataset.from_examples(examples, group_names=("female", "male"))


# subject counts per source dataset: (minority pos/total, majority pos/total)
MUMTAZ = (13, 21, 17, 37)
MODMA = (11, 20, 13, 33)
REST = (34, 74, 12, 47)


class TestMixup:
    def test_balances_37_21(self):
        ds = counted_dataset(*MUMTAZ)
        out = mixup_balance(ds, MixupConfig(alpha=0.4), seed=5)
        assert len(out) == len(ds) + 16
        groups = out.groups
        assert int(np.sum(groups == MINORITY)) == int(np.sum(groups == MAJORITY)) == 37

    def test_originals_untouched_as_prefix(self):
        ds = counted_dataset(*MUMTAZ)
        out = mixup_balance(ds, MixupConfig(), seed=5)
        n = len(ds)
        assert np.array_equal(out.features[:n], ds.features)
        assert np.array_equal(out.labels[:n], ds.labels)
        assert out.subject_ids[:n] == ds.subject_ids

    def test_synthetics_in_convex_hull(self):
        ds = counted_dataset(*MUMTAZ)
        out = mixup_balance(ds, MixupConfig(), seed=7)
        n = len(ds)
        assert np.all(out.labels[n:] >= 0.0)
        assert np.all(out.labels[n:] <= 1.0)
        assert all(sid.startswith("synthetic:mixup:") for sid in out.subject_ids[n:])
        assert np.all(out.groups[n:] == MINORITY)

    def test_synthetic_features_bounded_by_parents(self):
        ds = counted_dataset(*MUMTAZ)
        out = mixup_balance(ds, MixupConfig(), seed=11)
        pool = ds.features[ds.groups == MINORITY]
        lo, hi = pool.min(axis=0), pool.max(axis=0)
        synth = out.features[len(ds):]
        assert np.all(synth >= lo - 1e-12)
        assert np.all(synth <= hi + 1e-12)

    def test_balanced_dataset_unchanged(self):
        ds = counted_dataset(3, 6, 3, 6)
        out = mixup_balance(ds, MixupConfig(), seed=1)
        assert out is ds

    def test_single_minority_example_errors(self):
        ds = counted_dataset(1, 1, 2, 4)
        with pytest.raises(ValueError):
            mixup_balance(ds, MixupConfig(), seed=1)

    def test_deterministic(self):
        ds = counted_dataset(*MUMTAZ)
        a = mixup_balance(ds, MixupConfig(), seed=9)
        b = mixup_balance(ds, MixupConfig(), seed=9)
        assert np.array_equal(a.features, b.features)


class TestDiscrimination:
    def test_mumtaz_counts(self):
        disc, favoured = discrimination(counted_dataset(*MUMTAZ))
        assert disc == pytest.approx(float(Fraction(124, 777)), abs=1e-15)
        assert favoured == MINORITY  # female is favoured and the minority

    def test_rest_counts(self):
        disc, favoured = discrimination(counted_dataset(*REST))
        assert disc == pytest.approx(float(Fraction(710, 3478)), abs=1e-15)
        # in Rest the larger (female) group is favoured
        assert favoured == MAJORITY

    def test_equal_rates_tie(self):
        disc, favoured = discrimination(counted_dataset(2, 4, 3, 6))
        assert disc == 0.0
        assert favoured == MAJORITY  # tie convention

    def test_soft_labels_rejected(self):
        ds = counted_dataset(2, 4, 2, 4)
        soft = ds.with_labels(np.full(len(ds), 0.5))
        with pytest.raises(ValueError):
            discrimination(soft)


class TestMassagingPlan:
    @pytest.mark.parametrize(
        "counts,expected_m",
        [(MUMTAZ, 3), (MODMA, 2), (REST, 6)],
        ids=["mumtaz", "modma", "rest"],
    )
    def test_pair_counts_from_study_tables(self, counts, expected_m):
        assert relabel_pair_count(counted_dataset(*counts)) == expected_m

    def test_plan_selects_boundary_closest(self):
        ds = counted_dataset(*MUMTAZ)
        rng = np.random.default_rng(3)
        probs = rng.uniform(size=len(ds))
        plan = massaging_plan(ds, probs)
        assert plan.m == 3
        assert len(plan.demote) == len(plan.promote) == 3
        # demotions: favoured positives with the lowest p(1|x)
        fav_pos = [i for i in range(len(ds)) if ds.groups[i] == plan.favoured and ds.labels[i] == 1.0]
        assert sorted(plan.demote, key=lambda i: probs[i]) == list(plan.demote)
        assert max(probs[i] for i in plan.demote) <= min(
            probs[i] for i in fav_pos if i not in plan.demote
        )
        assert set(plan.demote).isdisjoint(plan.promote)

    def test_zero_discrimination_empty_plan(self):
        ds = counted_dataset(2, 4, 3, 6)
        plan = massaging_plan(ds, np.full(len(ds), 0.5))
        assert plan.m == 0
        assert plan.demote == () and plan.promote == ()

    def test_shortfall_errors(self):
        # favoured group has positives but fewer than m after planning
        ds = counted_dataset(0, 12, 10, 12, seed=2)
        with pytest.raises(ValueError, match="demote|promote"):
            massaging_plan(ds, np.full(len(ds), 0.5))

    def test_deterministic_given_inputs(self):
        ds = counted_dataset(*MODMA)
        probs = np.random.default_rng(8).uniform(size=len(ds))
        assert massaging_plan(ds, probs) == massaging_plan(ds, probs)


class TestApplyMassaging:
    def test_mumtaz_flow_reduces_discrimination(self):
        ds = counted_dataset(*MUMTAZ)
        probs = np.random.default_rng(4).uniform(size=len(ds))
        plan = massaging_plan(ds, probs)
        out = apply_massaging(ds, plan)
        assert int(np.sum(out.labels == 1.0)) == int(np.sum(ds.labels == 1.0)) == 30
        disc_before, _ = discrimination(ds)
        disc_after, _ = discrimination(out)
        assert disc_after < disc_before
        assert disc_after <= 0.02
        assert int(np.sum(out.labels != ds.labels)) == 2 * plan.m

    def test_empty_plan_is_identity(self):
        ds = counted_dataset(2, 4, 3, 6)
        plan = massaging_plan(ds, np.full(len(ds), 0.5))
        out = apply_massaging(ds, plan)
        assert np.array_equal(out.labels, ds.labels)

    def test_four_example_toy_zeroes_discrimination(self):
        # favoured group has both positives, deprived none
        examples = [
            Example(np.array([0.1]), 1.0, MAJORITY, "a"),
            Example(np.array([0.2]), 1.0, MAJORITY, "b"),
            Example(np.array([0.3]), 0.0, MINORITY, "c"),
            Example(np.array([0.4]), 0.0, MINORITY, "d"),
        ]
        ds = Dataset.from_examples(examples)
        plan = massaging_plan(ds, np.array([0.9, 0.6, 0.2, 0.45]))
        assert plan.m == 1
        out = apply_massaging(ds, plan)
        disc, _ = discrimination(out)
        assert disc == 0.0

    def test_stale_plan_rejected(self):
        ds = counted_dataset(*MUMTAZ)
        probs = np.random.default_rng(4).uniform(size=len(ds))
        plan = massaging_plan(ds, probs)
        flipped = ds.with_labels(1.0 - ds.labels)
        with pytest.raises(ValueError, match="stale"):
            apply_massaging(flipped, plan)


def test_massaging_on_segmented_preset():
    # 1 segment per subject keeps the pair count at the subject-table value
    ds = generate(preset_config("mumtaz-like", segments_per_subject=1, seed=0))
    assert relabel_pair_count(ds) == 3
    disc, _ = discrimination(ds)
    assert disc == pytest.approx(float(Fraction(124, 777)), abs=1e-15)
