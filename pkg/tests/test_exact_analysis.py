import csv
import io
import itertools
from fractions import Fraction as F

import pytest

from dpselect import exact_analysis as ea
from dpselect.select_core import CostTally, SelectionTask, quickselect_dual


def naive_grand(n_max):
    """Direct O(n^2) evaluation of the random-rank recurrence."""
    e = [F(0), F(0), F(1)]
    for n in range(3, n_max + 1):
        s = sum((p - 1) * (n - p) * e[p - 1] for p in range(1, n + 1))
        e.append(F(19, 12) * (n + 1) - 3 + F(6, n * n * (n - 1)) * s)
    return e


def naive_extremal(n_max):
    e = [F(0), F(0), F(1)]
    for n in range(3, n_max + 1):
        s = sum((n - p) * e[p - 1] for p in range(1, n + 1))
        e.append(F(19, 12) * (n + 1) - 3 + s / F(n * (n - 1), 2))
    return e


@pytest.mark.parametrize("n, h", [(1, F(1)), (2, F(3, 2)), (4, F(25, 12))])
def test_harmonic(n, h):
    assert ea.harmonic(n) == h


def test_harmonic_domain():
    with pytest.raises(ea.DomainError):
        ea.harmonic(0)


@pytest.mark.parametrize("n, t", [(3, F(10, 3)), (4, F(59, 12)), (8, F(45, 4))])
def test_expected_toll(n, t):
    assert ea.expected_toll(n) == t


def test_toll_formula_fails_at_two():
    assert ea.brute_force_toll(2) == 1
    with pytest.raises(ea.DomainError):
        ea.expected_toll(2)


@pytest.mark.parametrize("n", range(3, 9))
def test_toll_enumeration(n):
    assert ea.brute_force_toll(n) == ea.expected_toll(n)


def test_grand_recurrence_values():
    s = ea.grand_average_recurrence(8)
    assert s.mode == "grand" and s.source == "recurrence"
    assert (s[0], s[1], s[2], s[3], s[4]) == (0, 0, 1, F(10, 3), F(31, 6))


def test_extremal_recurrence_values():
    s = ea.extremal_average_recurrence(8)
    assert (s[0], s[1], s[2], s[3], s[4]) == (0, 0, 1, F(10, 3), F(61, 12))


def test_prefix_sums_match_naive_recurrences():
    assert list(ea.grand_average_recurrence(60).values.values()) == naive_grand(60)
    assert list(ea.extremal_average_recurrence(60).values.values()) == naive_extremal(60)


def test_closed_forms_at_four_and_eight():
    assert ea.grand_average_closed(4) == F(31, 6)
    assert ea.extremal_average_closed(4) == F(61, 12)
    assert ea.grand_average_closed(8) == ea.grand_average_recurrence(8)[8]
    assert ea.extremal_average_closed(8) == ea.extremal_average_recurrence(8)[8]


@pytest.mark.parametrize("f", [ea.grand_average_closed, ea.extremal_average_closed])
def test_closed_form_domain(f):
    with pytest.raises(ea.DomainError):
        f(3)


def test_closed_forms_match_recurrence_to_300():
    g, e = ea.grand_average_recurrence(300), ea.extremal_average_recurrence(300)
    cg, ce = ea.closed_form_series("grand", 300), ea.closed_form_series("extremal_min", 300)
    assert all(g[n] == cg[n] and e[n] == ce[n] for n in range(4, 301))


def test_leading_coefficients():
    # the increment over [1000, 2000] removes the constant; the log term leaves ~0.005
    for f, c in ((ea.grand_average_closed, 19 / 6), (ea.extremal_average_closed, 19 / 8)):
        slope = float(f(2000) - f(1000)) / 1000
        assert abs(slope - c) < 0.006


def test_monotone():
    g, e = ea.grand_average_recurrence(200), ea.extremal_average_recurrence(200)
    assert all(g[n] < g[n + 1] and e[n] < e[n + 1] for n in range(2, 200))


@pytest.mark.parametrize("mode, n, value", [
    ("grand", 3, F(10, 3)), ("grand", 4, F(31, 6)), ("min", 4, F(61, 12)),
])
def test_brute_force_examples(mode, n, value):
    assert ea.brute_force_average(n, mode) == value


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("mode", ["grand", "min", "max", 2])
def test_engines_agree(n, mode):
    if isinstance(mode, int):
        mode = min(mode, n)
    assert (ea.brute_force_average(n, mode, engine="python")
            == ea.brute_force_average(n, mode, engine="compiled"))


def test_brute_force_limits():
    with pytest.raises(ea.ResourceError):
        ea.brute_force_average(10)
    with pytest.raises(ea.DomainError):
        ea.brute_force_average(4, 9)


def test_fixed_rank_average_matches_direct_loop():
    total = 0
    for perm in itertools.permutations(range(1, 6)):
        t = CostTally()
        quickselect_dual(SelectionTask(list(perm), 3), t)
        total += t.comparisons
    assert ea.brute_force_average(5, 3) == F(total, 120)


def test_randomness_preservation_small():
    rep3 = ea.randomness_preservation_check(3)
    assert rep3.uniform
    rep4 = ea.randomness_preservation_check(4)
    assert rep4.uniform
    # pivots at 0 and 3 leave the two middle keys, in both orders equally often
    c = rep4.counts[(0, 3)]
    assert len(c) == 2 and len(set(c.values())) == 1


def test_uniformity_criterion_detects_bias():
    rep = ea.randomness_preservation_check(5)
    key, counts = next((k, c) for k, c in rep.counts.items() if len(c) > 1)
    assert ea.cell_is_uniform(5, *key, counts)
    skewed = counts.copy()
    skewed[next(iter(skewed))] += 1
    assert not ea.cell_is_uniform(5, *key, skewed)
    missing = counts.copy()
    del missing[next(iter(missing))]
    assert not ea.cell_is_uniform(5, *key, missing)


def test_toll_conditional_mean_examples():
    law3 = ea.toll_law(3)
    assert law3.averaged() == F(10, 3)
    assert ea.toll_conditional_mean(3, 1, 2, law3) == 2 + 3 * law3.bernoulli_theta[(1, 2)]
    law8 = ea.toll_law(8)
    assert law8.averaged() == F(45, 4)
    assert all(m >= 7 for m in law8.conditional_means.values())
    with pytest.raises(ea.DomainError):
        ea.toll_conditional_mean(5, 3, 3)


def test_series_csv():
    rec = ea.grand_average_recurrence(10)
    text = rec.to_csv(residual_against=ea.closed_form_series("grand", 10))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["n", "exact_num", "exact_den", "decimal", "source", "residual"]
    row4 = rows[4]
    assert (row4["exact_num"], row4["exact_den"], row4["residual"]) == ("31", "6", "0")
    assert row4["decimal"] == "5.16666666666667"
    assert rows[2]["residual"] == ""
