import random

import pytest

from oracles import (
    oracle_agreement,
    oracle_alpha,
    oracle_alpha_bruteforce,
    oracle_kappa,
    oracle_pi,
)
from gaze_aoi.reliability import (
    ConfusionTable,
    cohens_kappa,
    confusion,
    krippendorffs_alpha,
    percent_agreement,
    reliability_report,
    scotts_pi,
)


def sequences_for_table(counts, categories=("A", "B", "C")):
    """Label-pair sequences realizing a confusion-count matrix."""
    a, b = [], []
    for i, row in enumerate(counts):
        for j, c in enumerate(row):
            a += [categories[i]] * c
            b += [categories[j]] * c
    return a, b


# the hand-checked 2x2 table: [[20, 5], [10, 15]]
HAND_TABLE = [[20, 5], [10, 15]]
HAND_A, HAND_B = sequences_for_table(HAND_TABLE, ("A", "B"))


class TestConfusion:
    def test_diagonal(self):
        table = confusion(["H", "H", "T"], ["H", "H", "T"])
        assert table.n == 3
        assert table.trace() == 3

    def test_single_off_diagonal(self):
        table = confusion(["H"], ["T"])
        assert table.categories == ("H", "T")
        assert table.counts[0][1] == 1
        assert table.trace() == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion(["H"], ["H", "T"])

    def test_missing_units_excluded(self):
        table = confusion(["H", None, "T"], ["H", "T", None])
        assert table.n == 1

    def test_fixed_categories(self):
        table = confusion(["H"], ["H"], categories=["H", "T", "X"])
        assert table.categories == ("H", "T", "X")

    def test_label_outside_fixed_set_rejected(self):
        with pytest.raises(ValueError):
            confusion(["H", "Q"], ["H", "H"], categories=["H", "T"])

    def test_empty_table_makes_statistics_undefined(self):
        table = confusion([], [])
        for stat in (percent_agreement, cohens_kappa, scotts_pi):
            with pytest.raises(ValueError):
                stat(table)


class TestHandCheckedValues:
    """Frozen expectations for [[20,5],[10,15]]: agreement 0.7, kappa 0.4,
    pi 0.393939...; every value confirmed by the from-definition oracle."""

    def test_oracle_confirms_frozen_values(self):
        assert oracle_agreement(HAND_A, HAND_B) == pytest.approx(0.7, abs=1e-12)
        assert oracle_kappa(HAND_A, HAND_B) == pytest.approx(0.4, abs=1e-12)
        assert oracle_pi(HAND_A, HAND_B) == pytest.approx(0.393939, abs=1e-6)
        assert oracle_alpha(HAND_A, HAND_B) == pytest.approx(0.4, abs=1e-12)
        assert oracle_alpha_bruteforce(HAND_A, HAND_B) == pytest.approx(0.4, abs=1e-12)

    def test_agreement(self):
        assert percent_agreement(confusion(HAND_A, HAND_B)) == pytest.approx(0.7)

    def test_kappa(self):
        assert cohens_kappa(confusion(HAND_A, HAND_B)) == pytest.approx(0.4)

    def test_pi(self):
        assert scotts_pi(confusion(HAND_A, HAND_B)) == pytest.approx(0.393939, abs=1e-6)

    def test_alpha(self):
        assert krippendorffs_alpha(HAND_A, HAND_B) == pytest.approx(0.4)


class TestKappa:
    def test_perfect_agreement(self):
        a, b = sequences_for_table([[25, 0], [0, 25]], ("A", "B"))
        assert cohens_kappa(confusion(a, b)) == 1.0

    def test_independence_case(self):
        a, b = sequences_for_table([[25, 25], [25, 25]], ("A", "B"))
        assert cohens_kappa(confusion(a, b)) == pytest.approx(0.0)

    def test_degenerate_single_category(self):
        table = confusion(["A"] * 5, ["A"] * 5)
        assert cohens_kappa(table) == 1.0


class TestPi:
    def test_perfect_agreement(self):
        a, b = sequences_for_table([[25, 0], [0, 25]], ("A", "B"))
        assert scotts_pi(confusion(a, b)) == 1.0

    def test_independence_case(self):
        a, b = sequences_for_table([[25, 25], [25, 25]], ("A", "B"))
        assert scotts_pi(confusion(a, b)) == pytest.approx(0.0)

    def test_degenerate_single_category(self):
        assert scotts_pi(confusion(["A"] * 5, ["A"] * 5)) == 1.0


class TestAlpha:
    def test_identical_sequences(self):
        a = ["H", "T", "H", "S", "T"]
        assert krippendorffs_alpha(a, list(a)) == 1.0

    def test_total_disagreement_two_units(self):
        assert krippendorffs_alpha(["H", "T"], ["T", "H"]) == pytest.approx(-0.5)

    def test_single_unit_undefined(self):
        with pytest.raises(ValueError):
            krippendorffs_alpha(["H"], ["T"])

    def test_single_pooled_value_undefined(self):
        with pytest.raises(ValueError):
            krippendorffs_alpha(["H", "H"], ["H", "H"])

    def test_units_with_missing_are_dropped(self):
        a = ["H", "T", None, "H"]
        b = ["H", "T", "H", None]
        assert krippendorffs_alpha(a, b) == 1.0


class TestProperties:
    def random_pair(self, rng, n_max=60, k_max=4, missing=0.0):
        cats = ["C%d" % i for i in range(rng.randint(1, k_max))]
        n = rng.randint(2, n_max)
        def draw():
            return [None if rng.random() < missing else rng.choice(cats)
                    for _ in range(n)]
        return draw(), draw()

    def test_relabeling_invariance(self):
        rng = random.Random(21)
        for _ in range(200):
            a, b = self.random_pair(rng)
            mapping = {"C0": "X3", "C1": "X1", "C2": "X0", "C3": "X2"}
            a2 = [mapping.get(v) if v is not None else None for v in a]
            b2 = [mapping.get(v) if v is not None else None for v in b]
            for impl in (lambda x, y: percent_agreement(confusion(x, y)),
                         lambda x, y: cohens_kappa(confusion(x, y)),
                         lambda x, y: scotts_pi(confusion(x, y))):
                assert impl(a, b) == pytest.approx(impl(a2, b2), abs=1e-12)
            try:
                first = krippendorffs_alpha(a, b)
            except ValueError:
                with pytest.raises(ValueError):
                    krippendorffs_alpha(a2, b2)
            else:
                assert first == pytest.approx(krippendorffs_alpha(a2, b2), abs=1e-12)

    def test_symmetry_in_coders(self):
        rng = random.Random(22)
        for _ in range(200):
            a, b = self.random_pair(rng, missing=0.1)
            for impl in (lambda x, y: percent_agreement(confusion(x, y)),
                         lambda x, y: cohens_kappa(confusion(x, y)),
                         lambda x, y: scotts_pi(confusion(x, y))):
                assert impl(a, b) == pytest.approx(impl(b, a), abs=1e-12)
            try:
                forward = krippendorffs_alpha(a, b)
            except ValueError:
                continue
            assert forward == pytest.approx(krippendorffs_alpha(b, a), abs=1e-12)

    def test_range_and_perfection(self):
        rng = random.Random(23)
        for _ in range(300):
            a, b = self.random_pair(rng)
            table = confusion(a, b)
            p_o = percent_agreement(table)
            for value in (cohens_kappa(table), scotts_pi(table)):
                assert -1.0 - 1e-12 <= value <= 1.0 + 1e-12
                if p_o < 1.0:
                    assert value < 1.0
            try:
                alpha = krippendorffs_alpha(a, b)
            except ValueError:
                continue
            assert -1.0 - 1e-12 <= alpha <= 1.0 + 1e-12
            assert (alpha == 1.0) == (p_o == 1.0)

    def test_alpha_pi_small_sample_gap(self):
        # alpha equals pi up to a correction that vanishes as 3/(N-1)
        rng = random.Random(24)
        for _ in range(300):
            a, b = self.random_pair(rng, n_max=120, k_max=3)
            try:
                alpha = krippendorffs_alpha(a, b)
            except ValueError:
                continue
            pi = scotts_pi(confusion(a, b))
            big_n = 2 * len([1 for x, y in zip(a, b) if x is not None and y is not None])
            assert abs(alpha - pi) <= 3.0 / (big_n - 1) + 1e-12

    def test_random_permutation_kappa_near_zero(self):
        rng = random.Random(25)
        a = [rng.choice(["H", "T", "S"]) for _ in range(2000)]
        b = list(a)
        rng.shuffle(b)
        assert abs(cohens_kappa(confusion(a, b))) <= 0.1


class TestReliabilityReport:
    def test_identical_sequences_all_ones(self):
        seq = ["H", "T", "H", "N", "T"]
        report = reliability_report(seq, list(seq))
        assert report.agreement == 1.0
        assert report.scotts_pi == 1.0
        assert report.cohens_kappa == 1.0
        assert report.krippendorffs_alpha == 1.0
        assert report.n == 5

    def test_categories_are_sorted_union(self):
        report = reliability_report(["A", "B"], ["C", "B"])
        assert report.categories == ("A", "B", "C")

    def test_matches_oracles_on_random_data(self):
        rng = random.Random(26)
        for _ in range(100):
            cats = ["H", "T", "S", "N"][:rng.randint(2, 4)]
            n = rng.randint(3, 80)
            a = [rng.choice(cats) for _ in range(n)]
            b = [rng.choice(cats) for _ in range(n)]
            try:
                report = reliability_report(a, b)
            except ValueError:
                assert oracle_alpha(a, b) is None
                continue
            assert report.agreement == pytest.approx(oracle_agreement(a, b), abs=1e-12)
            assert report.cohens_kappa == pytest.approx(oracle_kappa(a, b), abs=1e-12)
            assert report.scotts_pi == pytest.approx(oracle_pi(a, b), abs=1e-12)
            assert report.krippendorffs_alpha == pytest.approx(oracle_alpha(a, b), abs=1e-12)
