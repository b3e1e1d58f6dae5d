import numpy as np
import pytest
from scipy import stats as st

from voreal.stats import friedman, holm, significance_matrix


def test_friedman_matches_scipy(rng):
    for _ in range(20):
        table = rng.normal(size=(15, 4))
        table[:, 0] += rng.random()
        ours = friedman(table)
        ref = st.friedmanchisquare(*table.T)
        assert ours[0] == pytest.approx(ref.statistic)
        assert ours[1] == pytest.approx(ref.pvalue)


def test_friedman_ties_match_scipy(rng):
    table = rng.integers(0, 3, size=(20, 3)).astype(float)
    assert friedman(table)[0] == pytest.approx(st.friedmanchisquare(*table.T).statistic)


def test_friedman_two_groups_is_sign_test_like():
    table = np.column_stack([np.arange(10.0), np.arange(10.0) + 1])
    chi2, p = friedman(table)
    assert chi2 == pytest.approx(10.0)
    assert p < 0.01


def test_friedman_constant():
    assert friedman(np.ones((5, 3))) == (0.0, 1.0)


def test_holm():
    np.testing.assert_allclose(holm([0.01, 0.04, 0.03]), [0.03, 0.06, 0.06])
    np.testing.assert_allclose(holm([0.5, 0.9]), [1.0, 1.0])


def test_holm_against_statsmodels(rng):
    multitest = pytest.importorskip("statsmodels.stats.multitest")
    p = rng.random(12) ** 3
    np.testing.assert_allclose(holm(p), multitest.multipletests(p, method="holm")[1])


class TestMatrix:
    def test_separated(self, rng):
        m = significance_matrix({"a": rng.normal(0.9, 0.01, 50), "b": rng.normal(0.5, 0.01, 50)})
        assert m.cell("a", "b") == "+" and m.cell("b", "a") == "-"
        assert m.wins("a") == 1 and m.losses("b") == 1
        assert m.cell("a", "a") == "~"

    def test_identical(self):
        x = np.linspace(0, 1, 30)
        m = significance_matrix({"a": x, "b": x.copy()})
        assert m.cells == [["~", "~"], ["~", "~"]]
        assert m.friedman_p == 1.0

    def test_three_way(self, rng):
        m = significance_matrix({"hi": rng.normal(3, 0.1, 30), "mid": rng.normal(2, 0.1, 30),
                                 "lo": rng.normal(1, 0.1, 30)})
        assert m.cells == [["~", "+", "+"], ["-", "~", "+"], ["-", "-", "~"]]

    def test_errors(self):
        with pytest.raises(ValueError):
            significance_matrix({"a": [1, 2], "b": [1]})
        with pytest.raises(ValueError):
            significance_matrix({"a": [1], "b": [2]}, alpha=1.5)

    def test_single_algorithm(self):
        assert significance_matrix({"a": [1, 2, 3]}).cells == [["~"]]
