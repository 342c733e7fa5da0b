import numpy as np
import pytest

from fairdep.data import (
    Dataset,
    Example,
    MAJORITY,
    MINORITY,
    SplitSpec,
    canonical_order,
    encode_groups,
    split,
    validate,
)


def make_dataset(n_minority=6, n_majority=10, dim=3, seed=0):
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n_minority):
        examples.append(
            Example(rng.normal(size=dim), float(i % 2), MINORITY, f"min{i:02d}")
        )
    for i in range(n_majority):
        examples.append(
            Example(rng.normal(size=dim), float(i % 2), MAJORITY, f"maj{i:02d}")
        )
    return Dataset.from_examples(examples, group_names=("female", "male"))


class TestEncodeGroups:
    def test_minority_is_smaller_group(self):
        codes, names = encode_groups(["m", "m", "m", "f"])
        assert names == ("f", "m")
        assert codes.tolist() == [1, 1, 1, 0]

    def test_tie_breaks_lexicographically(self):
        codes, names = encode_groups(["b", "a"])
        assert names == ("a", "b")
        assert codes.tolist() == [1, 0]

    def test_rejects_wrong_token_count(self):
        with pytest.raises(ValueError):
            encode_groups(["a", "b", "c"])
        with pytest.raises(ValueError):
            encode_groups(["a", "a"])


class TestValidate:
    def test_well_formed_dataset_has_no_violations(self):
        assert validate(make_dataset()) == []

    def test_label_out_of_range_names_the_index(self):
        ds = make_dataset()
        labels = ds.labels.copy()
        labels[2] = 1.5
        bad = ds.with_labels(labels)
        violations = validate(bad)
        assert len(violations) == 1
        assert "example 2" in violations[0]

    def test_nonpositive_weight_flagged(self):
        ds = make_dataset()
        weights = ds.weights.copy()
        weights[1] = 0.0
        violations = validate(ds.with_weights(weights))
        assert any("example 1" in v for v in violations)

    def test_missing_group_flagged_unless_partition(self):
        rng = np.random.default_rng(1)
        examples = [
            Example(rng.normal(size=2), float(i % 2), MAJORITY, f"s{i}") for i in range(4)
        ]
        ds = Dataset.from_examples(examples)
        assert any("has no examples" in v for v in validate(ds))
        part = Dataset.from_examples(examples, is_partition=True)
        assert validate(part) == []

    def test_nonfinite_feature_flagged(self):
        ds = make_dataset()
        feats = ds.features.copy()
        feats[0, 0] = np.nan
        bad = Dataset(
            features=feats,
            labels=ds.labels,
            groups=ds.groups,
            subject_ids=ds.subject_ids,
            weights=ds.weights,
            group_names=ds.group_names,
        )
        assert any("example 0" in v and "non-finite" in v for v in validate(bad))


class TestSplit:
    def test_kfold_sizes(self):
        ds = make_dataset(n_minority=40, n_majority=60)
        pairs = split(ds, SplitSpec(kind="kfold", k=5, seed=7))
        assert len(pairs) == 5
        for train, test in pairs:
            assert len(train) == 80
            assert len(test) == 20

    def test_kfold_partition_property(self):
        ds = make_dataset(n_minority=12, n_majority=20)
        pairs = split(ds, SplitSpec(kind="kfold", k=4, seed=3))
        seen = []
        for _, test in pairs:
            seen.extend(test.subject_ids)
        assert sorted(seen) == sorted(ds.subject_ids)

    def test_deterministic_for_fixed_seed(self):
        ds = make_dataset(n_minority=20, n_majority=30)
        a = split(ds, SplitSpec(kind="kfold", k=5, seed=11))
        b = split(ds, SplitSpec(kind="kfold", k=5, seed=11))
        for (tr_a, te_a), (tr_b, te_b) in zip(a, b):
            assert te_a.subject_ids == te_b.subject_ids
            assert np.array_equal(tr_a.features, tr_b.features)

    def test_small_stratum_error_names_it(self):
        rng = np.random.default_rng(0)
        examples = [
            Example(rng.normal(size=2), 1.0 if i < 3 else 0.0,
                    MINORITY if i % 2 else MAJORITY, f"s{i}")
            for i in range(10)
        ]
        ds = Dataset.from_examples(examples)
        with pytest.raises(ValueError, match="label=1"):
            split(ds, SplitSpec(kind="kfold", k=5, seed=1, stratify_on="label"))

    def test_stratification_keeps_cells_in_every_fold(self):
        ds = make_dataset(n_minority=20, n_majority=40)
        for train, test in split(ds, SplitSpec(kind="kfold", k=5, seed=2)):
            for part in (train, test):
                for g in (MINORITY, MAJORITY):
                    for label in (0.0, 1.0):
                        assert np.any((part.groups == g) & (part.labels == label))

    def test_holdout_fraction(self):
        ds = make_dataset(n_minority=20, n_majority=20)
        [(train, test)] = split(ds, SplitSpec(kind="holdout", train_fraction=0.8, seed=5))
        # 4 strata of 10; 8 of each go to the train side
        assert len(train) == 32
        assert len(test) == 8
        assert set(train.subject_ids).isdisjoint(test.subject_ids)

    def test_by_subject_keeps_segments_together(self):
        rng = np.random.default_rng(4)
        examples = []
        for s in range(12):
            grp = MINORITY if s < 6 else MAJORITY
            label = float(s % 2)
            for k in range(5):
                examples.append(Example(rng.normal(size=2), label, grp, f"subj{s:02d}"))
        ds = Dataset.from_examples(examples)
        pairs = split(ds, SplitSpec(kind="kfold", k=3, seed=9, by_subject=True))
        for train, test in pairs:
            assert set(train.subject_ids).isdisjoint(set(test.subject_ids))

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError):
            SplitSpec(kind="kfold", k=1)
        with pytest.raises(ValueError):
            SplitSpec(kind="holdout", train_fraction=1.0)
        with pytest.raises(ValueError):
            SplitSpec(kind="bootstrap")


def test_canonical_order_is_storage_independent():
    ds = make_dataset(n_minority=8, n_majority=8)
    perm = np.random.default_rng(3).permutation(len(ds))
    shuffled = ds.subset(perm)
    base = [ds.subject_ids[i] for i in canonical_order(ds)]
    moved = [shuffled.subject_ids[i] for i in canonical_order(shuffled)]
    assert base == moved
