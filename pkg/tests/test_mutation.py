import itertools
import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from permoll.core import HamProblem, Permutation, fitness, ham_evaluate, random_permutation
from permoll.mutation import (
    ElementaryMutation,
    MutationFamily,
    MutationList,
    apply_code,
    apply_mutation,
    apply_mutation_list,
    decode,
    encode,
    mutation_space_size,
    sample_crossover_size,
    sample_mutation_count,
    sample_mutation_list,
    subsample_preserving_order,
    undo_code,
)
from permoll.rng import RandomSource

FAMILIES = ("exchange", "reverse", "jump")


def pairs_oracle(kind, n):
    """All (i, j) in codec order."""
    if kind == "jump":
        return list(itertools.permutations(range(1, n + 1), 2))
    return list(itertools.combinations(range(1, n + 1), 2))


def apply_oracle(kind, x, i, j):
    y = list(x)
    if kind == "exchange":
        y[i - 1], y[j - 1] = y[j - 1], y[i - 1]
    elif kind == "reverse":
        y[i - 1:j] = y[i - 1:j][::-1]
    else:
        v = y.pop(i - 1)
        y.insert(j - 1, v)
    return y


def within_3_sigma(count, trials, p):
    return abs(count - trials * p) <= 3 * math.sqrt(trials * p * (1 - p))


class TestSpace:
    def test_sizes(self):
        assert mutation_space_size(MutationFamily("exchange", 16)) == 120
        assert mutation_space_size(MutationFamily("jump", 4)) == 12
        assert mutation_space_size(MutationFamily("exchange", 2)) == 1
        assert mutation_space_size(MutationFamily("reverse", 10)) == 45

    def test_invalid(self):
        with pytest.raises(ValueError):
            MutationFamily("exchange", 1)
        with pytest.raises(ValueError):
            MutationFamily("swap", 5)


class TestCodec:
    def test_examples(self):
        fam = MutationFamily("exchange", 4)
        assert decode(0, fam) == (1, 2)
        assert decode(5, fam) == (3, 4)

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_matches_lexicographic_order(self, kind):
        for n in range(2, 51):
            fam = MutationFamily(kind, n)
            expected = pairs_oracle(kind, n)
            assert fam.m == len(expected)
            for code, pair in enumerate(expected):
                assert decode(code, fam) == pair
                assert encode(*pair, fam) == code

    def test_out_of_range(self):
        fam = MutationFamily("exchange", 4)
        with pytest.raises(ValueError):
            decode(6, fam)
        with pytest.raises(ValueError):
            decode(-1, fam)
        with pytest.raises(ValueError):
            encode(2, 1, fam)
        with pytest.raises(ValueError):
            encode(2, 2, MutationFamily("jump", 4))
        with pytest.raises(ValueError):
            ElementaryMutation(6, fam)

    def test_large_n_round_trip(self):
        rng = np.random.default_rng(1)
        for kind in FAMILIES:
            fam = MutationFamily(kind, 4096)
            for code in rng.integers(0, fam.m, 2000).tolist() + [0, fam.m - 1]:
                assert encode(*decode(code, fam), fam) == code


class TestApply:
    def test_examples(self):
        x = Permutation.of([2, 1, 3])
        assert apply_mutation(x, MutationFamily("exchange", 3).mutation(1, 2)) == Permutation.of([1, 2, 3])
        rev = MutationFamily("reverse", 3).mutation(1, 3)
        assert apply_mutation(Permutation.of([3, 2, 1]), rev) == Permutation.of([1, 2, 3])
        jump = MutationFamily("jump", 3).mutation(1, 3)
        assert apply_mutation(Permutation.of([2, 3, 1]), jump) == Permutation.of([3, 1, 2])
        assert apply_oracle("jump", [2, 3, 1], 1, 3) == [3, 1, 2]

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_all_pairs_against_oracle(self, kind):
        n = 6
        fam = MutationFamily(kind, n)
        rng = RandomSource(11)
        for _ in range(20):
            x = random_permutation(n, rng)
            for i, j in pairs_oracle(kind, n):
                y = apply_mutation(x, fam.mutation(i, j))
                assert list(y.elements) == apply_oracle(kind, x.elements, i, j)

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_kernel_delta_and_undo(self, kind):
        n = 9
        fam = MutationFamily(kind, n)
        rng = RandomSource(12)
        target = random_permutation(n, rng).to_array()
        for _ in range(30):
            x = random_permutation(n, rng).to_array()
            for code in range(fam.m):
                before = x.copy()
                f0 = fitness(x, target)
                d = apply_code(fam.code, n, x, target, code)
                assert d == fitness(x, target) - f0
                undo_code(fam.code, n, x, target, code)
                assert np.array_equal(x, before)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            apply_mutation(Permutation.of([1, 2, 3]), MutationFamily("jump", 4).mutation(1, 3))


class TestMutationList:
    def test_order_matters(self):
        problem = HamProblem.identity(3)
        fam = MutationFamily("exchange", 3)
        x = Permutation.of([2, 3, 1])
        forward = MutationList.of_pairs(fam, [(1, 3), (2, 3)])
        y = apply_mutation_list(x, forward)
        assert y == Permutation.of([1, 2, 3])
        assert ham_evaluate(problem, y) - ham_evaluate(problem, x) == 3
        z = apply_mutation_list(x, forward.reversed())
        assert z == Permutation.of([3, 1, 2])
        assert ham_evaluate(problem, z) - ham_evaluate(problem, x) == 0

    def test_step_by_step_oracle(self):
        # second step of the reversed order loses a match: [2,3,1] -> [2,1,3] -> [3,1,2]
        x = [2, 3, 1]
        step1 = apply_oracle("exchange", x, 2, 3)
        step2 = apply_oracle("exchange", step1, 1, 3)
        assert step1 == [2, 1, 3] and step2 == [3, 1, 2]

    def test_empty(self):
        x = Permutation.of([2, 3, 1])
        assert apply_mutation_list(x, MutationList(MutationFamily("exchange", 3), ())) == x

    def test_duplicates_rejected(self):
        fam = MutationFamily("exchange", 4)
        with pytest.raises(ValueError):
            MutationList(fam, (1, 1))
        assert len(MutationList(fam, (1, 1), allow_repeats=True)) == 2


class TestSampling:
    def test_count_degenerate(self, rng):
        assert {sample_mutation_count(5, 1.0, rng) for _ in range(100)} == {5}
        assert {sample_mutation_count(1, 0.01, rng) for _ in range(100)} == {1}

    def test_count_errors(self, rng):
        with pytest.raises(ValueError):
            sample_mutation_count(4, 0.0, rng)
        with pytest.raises(ValueError):
            sample_mutation_count(4, 1.5, rng)

    def test_count_frequency(self):
        rng = RandomSource(101)
        trials = 1_000_000
        p_one = 4 * 0.5 ** 4 / (1 - 0.5 ** 4)
        assert p_one == pytest.approx(0.2667, abs=1e-4)
        counts = Counter(sample_mutation_count(4, 0.5, rng) for _ in range(trials))
        assert set(counts) <= {1, 2, 3, 4}
        assert within_3_sigma(counts[1], trials, p_one)

    @pytest.mark.parametrize("m, p", [(32640, 10 / 32640), (32640, 1 / 32640), (500, 0.3), (20, 0.9)])
    def test_count_matches_conditional_pmf(self, m, p):
        from scipy.stats import binom
        rng = RandomSource(m)
        trials = 100_000
        counts = Counter(sample_mutation_count(m, p, rng) for _ in range(trials))
        zero = binom.pmf(0, m, p)
        ks = sorted(counts)
        expected = [trials * binom.pmf(k, m, p) / (1 - zero) for k in ks]
        # pool sparse tails
        obs, exp = [], []
        acc_o = acc_e = 0.0
        for o, e in zip([counts[k] for k in ks], expected):
            acc_o += o
            acc_e += e
            if acc_e >= 20:
                obs.append(acc_o)
                exp.append(acc_e)
                acc_o = acc_e = 0.0
        obs[-1] += acc_o
        exp[-1] += acc_e
        scale = sum(obs) / sum(exp)
        assert chisquare(obs, [e * scale for e in exp]).pvalue > 0.001

    def test_crossover_size(self, rng):
        assert {sample_crossover_size(1, 0.3, rng) for _ in range(100)} == {1}
        assert {sample_crossover_size(7, 1.0, rng) for _ in range(100)} == {7}
        trials = 200_000
        hits = sum(sample_crossover_size(3, 1 / 3, rng) == 3 for _ in range(trials))
        assert 1 / 19 == pytest.approx(0.05263, abs=1e-5)
        assert within_3_sigma(hits, trials, 1 / 19)

    def test_list_is_distinct_and_full_draw_is_uniform(self):
        fam = MutationFamily("exchange", 3)
        rng = RandomSource(5)
        orders = Counter(sample_mutation_list(fam, 3, rng).codes for _ in range(30000))
        assert set(orders) == set(itertools.permutations(range(3)))
        assert chisquare(list(orders.values())).pvalue > 0.001

    def test_ordered_pairs_uniform(self):
        fam = MutationFamily("exchange", 3)
        rng = RandomSource(6)
        pairs = Counter(sample_mutation_list(fam, 2, rng).codes for _ in range(30000))
        assert len(pairs) == 6
        assert chisquare(list(pairs.values())).pvalue > 0.001

    def test_large_space_ordered_uniform(self):
        # sparse draws: first and second code each uniform, never equal
        fam = MutationFamily("exchange", 10)
        rng = RandomSource(7)
        first, second = Counter(), Counter()
        for _ in range(45000):
            ms = sample_mutation_list(fam, 12, rng)
            assert len(set(ms.codes)) == 12
            first[ms.codes[0]] += 1
            second[ms.codes[11]] += 1
        assert chisquare([first[c] for c in range(45)]).pvalue > 0.001
        assert chisquare([second[c] for c in range(45)]).pvalue > 0.001

    def test_list_errors(self, rng):
        fam = MutationFamily("exchange", 3)
        with pytest.raises(ValueError):
            sample_mutation_list(fam, 4, rng)
        with pytest.raises(ValueError):
            sample_mutation_list(fam, 0, rng)


class TestSubsample:
    def test_full_subset_is_identity(self, rng):
        fam = MutationFamily("exchange", 6)
        ms = sample_mutation_list(fam, 5, rng)
        assert subsample_preserving_order(ms, 5, rng) == ms

    def test_preserves_order(self, rng):
        fam = MutationFamily("exchange", 20)
        for _ in range(200):
            ms = sample_mutation_list(fam, 12, rng)
            sub = subsample_preserving_order(ms, 5, rng)
            positions = [ms.codes.index(c) for c in sub.codes]
            assert positions == sorted(positions) and len(set(positions)) == 5

    def test_single_uniform(self):
        rng = RandomSource(8)
        ms = MutationList(MutationFamily("exchange", 4), (4, 0, 2))
        counts = Counter(subsample_preserving_order(ms, 1, rng).codes[0] for _ in range(30000))
        for code in ms.codes:
            assert within_3_sigma(counts[code], 30000, 1 / 3)

    def test_too_large(self, rng):
        ms = MutationList(MutationFamily("exchange", 4), (1, 2))
        with pytest.raises(ValueError):
            subsample_preserving_order(ms, 3, rng)
