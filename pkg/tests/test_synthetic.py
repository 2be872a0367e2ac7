"""Shape and label guarantees of the bundled synthetic corpora."""

import numpy as np
import pytest

from valnov.corpus import (
    Split,
    Task,
    class_distribution,
    extract_triplets,
    load_corpus,
    mapped_value,
    topic_overlap,
)
from valnov.evaluation import confusion
from valnov.synthetic import (
    SPLIT_CLASS_COUNTS,
    make_confusion_fixture,
    make_profile_split,
    make_profile_splits,
    make_random_eval_fixture,
    make_separable_corpus,
    write_profile_csvs,
)


class TestProfileFixture:
    def test_joint_class_counts(self):
        splits = make_profile_splits()
        assert class_distribution(splits[Split.TRAIN]).counts == (331, 18, 296, 105)
        assert class_distribution(splits[Split.DEV]).counts == (33, 44, 87, 38)
        assert class_distribution(splits[Split.TEST]).counts == (110, 96, 184, 130)

    def test_topic_counts_and_overlaps(self):
        splits = make_profile_splits()
        topics = {s: {i.topic for i in insts} for s, insts in splits.items()}
        assert len(topics[Split.TRAIN]) == 22
        assert len(topics[Split.DEV]) == 8
        assert len(topics[Split.TEST]) == 15
        assert topic_overlap(splits[Split.TRAIN], splits[Split.DEV]) == 0
        assert topic_overlap(splits[Split.TRAIN], splits[Split.TEST]) == 0
        assert topic_overlap(splits[Split.DEV], splits[Split.TEST]) == 8

    def test_sizes_follow_counts(self):
        for split, counts in SPLIT_CLASS_COUNTS.items():
            assert len(make_profile_split(split)) == sum(counts)

    def test_deterministic_per_seed(self):
        assert make_profile_split(Split.DEV, seed=1) == make_profile_split(
            Split.DEV, seed=1
        )
        a = [i.id for i in make_profile_split(Split.DEV, seed=1)]
        b = [(i.validity_raw, i.novelty_raw) for i in make_profile_split(Split.DEV, seed=1)]
        c = [(i.validity_raw, i.novelty_raw) for i in make_profile_split(Split.DEV, seed=2)]
        assert len(a) == len(set(a))
        assert b != c

    def test_middle_class_only_in_train(self):
        splits = make_profile_splits()
        train_raws = {i.validity_raw for i in splits[Split.TRAIN]} | {
            i.novelty_raw for i in splits[Split.TRAIN]
        }
        assert 0 in train_raws
        for split in (Split.DEV, Split.TEST):
            raws = {i.validity_raw for i in splits[split]} | {
                i.novelty_raw for i in splits[split]
            }
            assert 0 not in raws

    def test_train_yields_triplets(self):
        train = make_profile_split(Split.TRAIN)
        assert len(extract_triplets(train)) > 0

    def test_csv_round_trip_preserves_statistics(self, tmp_path):
        paths = write_profile_csvs(tmp_path)
        loaded = load_corpus(paths[Split.TRAIN], split=Split.TRAIN)
        assert class_distribution(loaded).counts == (331, 18, 296, 105)
        assert len({i.topic for i in loaded}) == 22
        assert all(i.split is Split.TRAIN for i in loaded)


class TestSeparableCorpus:
    def test_markers_decide_labels(self):
        train, dev = make_separable_corpus(n_train=40, n_dev=12)
        for inst in train + dev:
            assert ("affirmed" in inst.premise) == (inst.validity_raw == 1)
            assert ("retracted" in inst.premise) == (inst.validity_raw == -1)
            assert ("fresh" in inst.conclusion) == (inst.novelty_raw == 1)
            assert ("stale" in inst.conclusion) == (inst.novelty_raw == -1)

    def test_balanced_joint_classes(self):
        train, dev = make_separable_corpus(n_train=40, n_dev=20)
        assert class_distribution(train).counts == (10, 10, 10, 10)
        assert class_distribution(dev).counts == (5, 5, 5, 5)

    def test_pairs_share_premise_and_topic(self):
        train, _ = make_separable_corpus(n_train=20, n_dev=0)
        for k in range(10):
            a, b = train[2 * k], train[2 * k + 1]
            assert a.premise == b.premise
            assert a.topic == b.topic
            assert a.novelty_raw != b.novelty_raw

    def test_every_pair_yields_a_triplet(self):
        train, _ = make_separable_corpus(n_train=60, n_dev=0)
        assert len(extract_triplets(train)) == 30

    def test_split_assignment_and_ids(self):
        train, dev = make_separable_corpus(n_train=8, n_dev=4)
        assert all(i.split is Split.TRAIN for i in train)
        assert all(i.split is Split.DEV for i in dev)
        ids = [i.id for i in train + dev]
        assert len(ids) == len(set(ids)) == 12


class TestConfusionFixture:
    @pytest.mark.parametrize(
        "counts",
        [
            ((240, 54), (181, 45)),
            ((265, 29), (145, 81)),
            ((120, 86), (59, 255)),
            ((75, 131), (18, 296)),
            ((0, 3), (2, 0)),
        ],
    )
    def test_realizes_requested_matrix(self, counts):
        golds, preds = make_confusion_fixture(Task.NOVELTY, counts)
        matrix = confusion(list(preds), golds, Task.NOVELTY)
        assert matrix.counts == counts
        assert len(golds) == sum(map(sum, counts))

    def test_task_and_naming(self):
        golds, preds = make_confusion_fixture(
            Task.VALIDITY, ((1, 1), (1, 1)), prefix="vx", source="oracle"
        )
        assert all(g.id.startswith("vx-") for g in golds)
        assert all(p.task is Task.VALIDITY and p.source == "oracle" for p in preds)
        assert preds.source_tag == "oracle"


class TestRandomEvalFixture:
    def test_full_coverage_both_sides(self):
        rng = np.random.default_rng(0)
        golds, set_a, set_b = make_random_eval_fixture(rng, n=10)
        assert len(golds) == 10
        for ps, tag in ((set_a, "a"), (set_b, "b")):
            assert ps.source_tag == tag
            assert len(ps) == 20
            for task in Task:
                covered = {p.instance_id for p in ps.for_task(task)}
                assert covered == {g.id for g in golds}

    def test_labels_are_binary(self):
        rng = np.random.default_rng(1)
        golds, _, _ = make_random_eval_fixture(rng, n=6)
        for g in golds:
            assert g.validity_raw in (-1, 1)
            assert g.novelty_raw in (-1, 1)
            for task in Task:
                mapped_value(g, task)  # must not raise
