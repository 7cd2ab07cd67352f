import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_channel, random_pmf
from picput.probspace import (
    Channel,
    JointPmf,
    ValidationError,
    compose,
    empirical_from_samples,
    is_standardized,
    joint_from_marginal,
    l1_distance,
    marginals,
    prune_support,
    read_pmf_json,
    read_samples_csv,
    require_standardized,
    standardize,
    write_json,
)


class TestJointPmf:
    def test_valid(self):
        j = JointPmf([[0.25, 0.25], [0.25, 0.25]], ["a", "b"], ["x", "y"])
        assert j.shape == (2, 2)
        assert j.row_labels == ("a", "b")
        with pytest.raises(ValueError):
            j.p[0, 0] = 1.0

    @pytest.mark.parametrize("p", [
        [[0.5, 0.5]],                      # single row
        [[0.5, 0.6], [0.0, -0.1]],         # negative entry
        [[0.3, 0.3], [0.3, 0.3]],          # sums to 1.2
        [[np.nan, 0.5], [0.25, 0.25]],
    ])
    def test_rejects(self, p):
        with pytest.raises(ValidationError):
            JointPmf(p)

    def test_sum_tolerance(self):
        JointPmf([[0.25, 0.25], [0.25, 0.25 + 5e-13]])
        with pytest.raises(ValidationError):
            JointPmf([[0.25, 0.25], [0.25, 0.25 + 1e-9]])

    def test_label_count(self):
        with pytest.raises(ValidationError):
            JointPmf([[0.25, 0.25], [0.25, 0.25]], ["a"])

    def test_json_roundtrip(self, tmp_path):
        j = JointPmf([[0.1, 0.2, 0.1], [0.3, 0.2, 0.1]], ["s0", "s1"], ["a", "b", "c"])
        write_json(j.to_dict(), tmp_path / "j.json")
        back = read_pmf_json(tmp_path / "j.json")
        np.testing.assert_array_equal(back.p, j.p)
        assert back.col_labels == j.col_labels


class TestChannel:
    def test_rows_must_sum(self):
        with pytest.raises(ValidationError):
            Channel([[0.5, 0.4], [0.5, 0.5]])

    def test_bsc(self):
        np.testing.assert_allclose(Channel.bsc(0.1).w, [[0.9, 0.1], [0.1, 0.9]])


class TestCompose:
    def test_s_marginal_untouched(self, rng):
        for _ in range(20):
            j = JointPmf(random_pmf(rng, 3, 4))
            c = Channel(random_channel(rng, 4, 5))
            out = compose(j, c)
            np.testing.assert_allclose(marginals(out)[0], marginals(j)[0], atol=1e-15)

    def test_size_mismatch(self, dsbs):
        with pytest.raises(ValidationError):
            compose(dsbs, Channel(np.eye(3)))

    def test_joint_from_marginal(self):
        j = joint_from_marginal([0.25, 0.75], Channel.bsc(0.2))
        np.testing.assert_allclose(j.p, [[0.2, 0.05], [0.15, 0.6]])


class TestSupport:
    def test_prune(self):
        j = JointPmf([[0.5, 0.0, 0.2], [0.0, 0.0, 0.0], [0.1, 0.0, 0.2]])
        pruned = prune_support(j)
        assert pruned.shape == (2, 2)
        assert pruned.row_labels == ("0", "2")
        assert pruned.col_labels == ("0", "2")

    def test_prune_too_small(self):
        with pytest.raises(ValidationError):
            prune_support(JointPmf([[0.5, 0.5], [0.0, 0.0]]))

    def test_no_prune_returns_same(self, dsbs):
        assert prune_support(dsbs) is dsbs


class TestStandardize:
    def test_standardize(self):
        pmf = np.array([0.2, 0.3, 0.5])
        f = standardize([1.0, 5.0, -2.0], pmf)
        assert is_standardized(f, pmf)
        require_standardized(f, pmf)

    def test_constant_rejected(self):
        with pytest.raises(ValidationError):
            standardize([2.0, 2.0], [0.5, 0.5])

    def test_require(self):
        with pytest.raises(ValidationError):
            require_standardized([1.0, 0.0], [0.5, 0.5])


class TestSamples:
    def test_empirical(self):
        j = empirical_from_samples([(0, 0), (0, 1), (1, 1), (1, 1)], 2, 2)
        np.testing.assert_allclose(j.p, [[0.25, 0.25], [0.0, 0.5]])

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            empirical_from_samples([(0, 2)], 2, 2)

    def test_csv_labels(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("# comment\ns,x\na,u\nb,v\na,v\nb,v\n")
        j = read_samples_csv(path)
        assert j.row_labels == ("a", "b")
        np.testing.assert_allclose(j.p, [[0.25, 0.25], [0.0, 0.5]])

    def test_csv_indices(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("s,x\n0,1\n1,0\n1,1\n0,0\n")
        np.testing.assert_allclose(read_samples_csv(path).p, np.full((2, 2), 0.25))

    def test_convergence_in_median(self):
        truth = JointPmf([[0.1, 0.2], [0.3, 0.4]])
        medians = []
        for n in (100, 1000, 10000):
            dists = []
            for k in range(25):
                r = np.random.default_rng([7, n, k])
                counts = r.multinomial(n, truth.p.ravel()).reshape(2, 2)
                dists.append(l1_distance(JointPmf(counts / n), truth))
            medians.append(np.median(dists))
        assert medians[0] > medians[1] > medians[2]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_compose_is_pmf(r, c, o, seed):
    g = np.random.default_rng(seed)
    out = compose(JointPmf(random_pmf(g, r, c)), Channel(random_channel(g, c, o)))
    assert out.shape == (r, o)
    assert abs(out.p.sum() - 1) <= 1e-12
