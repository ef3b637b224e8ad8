"""Unit tests for the loss-based membership inference attack."""
import numpy as np
import pytest

from src.errors import InvalidInputError
from src.evaluate.mia import MIAClassifier, balance, mia_from_losses, mia_score


class TestMIAClassifier:
    """One-feature hinge separator."""

    def test_separates_low_member_losses(self):
        clf = MIAClassifier().fit(np.linspace(0.0, 0.1, 20), np.linspace(2.0, 3.0, 20))
        assert clf.w < 0
        assert clf.predict_member([0.05]).all()
        assert not clf.predict_member([2.5]).any()

    def test_ties_go_to_non_member(self):
        clf = MIAClassifier()
        clf.reference = np.array([0.0, 1.0])
        clf.w, clf.b = 0.0, 0.0
        assert not clf.predict_member([0.5]).any()

    def test_features_in_unit_interval(self):
        clf = MIAClassifier().fit([0.1, 0.2, 0.3], [0.4, 0.5, 0.6])
        features = clf.features([-10.0, 0.35, 10.0])
        assert features[0] == -1.0 and features[-1] == 1.0
        assert -1.0 < features[1] < 1.0

    def test_single_class_rejected(self):
        with pytest.raises(InvalidInputError):
            MIAClassifier().fit([0.1, 0.2], [])


class TestMIAScore:
    """Fraction of forget samples called members."""

    def test_perfectly_separated(self):
        """Member-side forget losses score exactly 1."""
        rng = np.random.default_rng(0)
        retain = rng.uniform(0.0, 0.1, size=50)
        test = rng.uniform(2.0, 3.0, size=50)
        forget = rng.uniform(0.0, 0.1, size=20)
        score, _ = mia_from_losses(retain, test, forget, seed=0)
        assert score == 1.0

    def test_forget_on_test_side(self):
        rng = np.random.default_rng(1)
        score, _ = mia_from_losses(rng.uniform(0, 0.1, 40), rng.uniform(2, 3, 40), rng.uniform(2, 3, 10), seed=0)
        assert score == 0.0

    def test_identical_distributions_near_chance(self):
        """Same-distribution losses average 0.5 +- 0.1 over 20 seeds."""
        scores = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            retain, test, forget = (rng.normal(1.0, 0.3, size=n) for n in (200, 200, 100))
            scores.append(mia_from_losses(retain, test, forget, seed=seed)[0])
        assert abs(np.mean(scores) - 0.5) <= 0.1

    def test_invariant_under_monotone_transform(self):
        """exp and affine maps of all losses leave the member count unchanged."""
        rng = np.random.default_rng(2)
        retain, test, forget = rng.gamma(1.0, 0.3, 60), rng.gamma(2.0, 0.5, 45), rng.gamma(1.5, 0.4, 25)
        base, _ = mia_from_losses(retain, test, forget, seed=4)
        for transform in (np.exp, lambda x: 3.0 * x + 7.0, np.sqrt):
            score, _ = mia_from_losses(transform(retain), transform(test), transform(forget), seed=4)
            assert score == base

    def test_balance_subsamples_larger_class(self):
        member, nonmember = balance(np.arange(10.0), np.arange(4.0), seed=0)
        assert member.size == nonmember.size == 4
        assert set(member) <= set(np.arange(10.0))

    def test_seeded(self):
        rng = np.random.default_rng(3)
        retain, test, forget = rng.random(80), rng.random(30), rng.random(20)
        assert mia_from_losses(retain, test, forget, seed=5)[0] == mia_from_losses(retain, test, forget, seed=5)[0]

    @pytest.mark.parametrize("empty", ["retain", "test", "forget"])
    def test_empty_split_rejected(self, empty):
        splits = {"retain": [0.1], "test": [0.2], "forget": [0.3]}
        splits[empty] = []
        with pytest.raises(InvalidInputError):
            mia_from_losses(splits["retain"], splits["test"], splits["forget"], seed=0)

    def test_model_score_in_range(self, tiny_model, tiny_retain, tiny_test, tiny_forget):
        score, clf = mia_score(tiny_model, tiny_retain, tiny_test, tiny_forget, seed=0)
        assert 0.0 <= score <= 1.0
        assert clf.reference.size == 2 * min(len(tiny_retain), len(tiny_test))
