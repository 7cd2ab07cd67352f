import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import chi2_direct, max_correlation_variational, mmse_direct, random_channel, random_pmf
from picput.pic import (
    chi2,
    chi2_of_chain,
    chi2_via_trace,
    conditional_expectation,
    decompose,
    delta,
    maximal_correlation,
    mmse_decomposition_check,
    mmse_of_function,
)
from picput.probspace import Channel, JointPmf, ValidationError, marginals, standardize


class TestDecompose:
    def test_dsbs(self, dsbs):
        dec = decompose(dsbs)
        np.testing.assert_allclose(dec.lambdas, [0.64], atol=1e-12)
        np.testing.assert_allclose(dec.f, [[1, 1], [1, -1]], atol=1e-12)
        np.testing.assert_allclose(dec.g, [[1, 1], [1, -1]], atol=1e-12)

    def test_independent(self):
        j = JointPmf(np.outer([0.3, 0.7], [0.2, 0.5, 0.3]))
        dec = decompose(j)
        np.testing.assert_array_equal(dec.lambdas, [0.0])
        assert chi2(j) == pytest.approx(0.0, abs=1e-15)

    def test_identity_coupling(self):
        p = np.diag([0.2, 0.3, 0.5])
        np.testing.assert_allclose(decompose(JointPmf(p)).lambdas, [1, 1], atol=1e-12)
        assert chi2(JointPmf(p)) == pytest.approx(2.0)

    def test_zero_marginal_rejected(self):
        with pytest.raises(ValidationError):
            decompose(JointPmf([[0.5, 0.0], [0.5, 0.0]]))

    @pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 6), (6, 4)])
    def test_structure(self, rng, shape):
        for _ in range(10):
            j = JointPmf(random_pmf(rng, *shape))
            dec = decompose(j)
            lam = dec.lambdas
            assert lam.size == min(shape) - 1
            assert np.all(np.diff(lam) <= 1e-15)
            assert np.all((lam >= 0) & (lam <= 1))
            pu, pv = marginals(j)
            np.testing.assert_allclose(dec.f.T @ (pu[:, None] * dec.f), np.eye(shape[0]), atol=1e-8)
            np.testing.assert_allclose(dec.g.T @ (pv[:, None] * dec.g), np.eye(shape[1]), atol=1e-8)
            np.testing.assert_allclose(dec.reconstruct(), j.p, atol=1e-10)
            assert lam.sum() == pytest.approx(chi2(j), abs=1e-8)

    def test_sign_convention(self, rng):
        dec = decompose(JointPmf(random_pmf(rng, 4, 3)))
        for k in range(dec.g.shape[1]):
            col = dec.g[:, k]
            assert col[np.flatnonzero(np.abs(col) > 1e-9)[0]] > 0

    def test_serialization(self, dsbs):
        d = decompose(dsbs).to_dict()
        assert set(d) == {"lambdas", "f", "g"}
        assert d["f"][1] == pytest.approx([1, -1])


class TestVariationalOracle:
    @pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 3), (3, 2)])
    def test_lambda1(self, shape):
        g = np.random.default_rng(sum(shape))
        for _ in range(4):
            p = random_pmf(g, *shape)
            assert decompose(JointPmf(p)).lambdas[0] == pytest.approx(
                max_correlation_variational(p), abs=1e-4)


class TestChi2:
    def test_matches_direct(self, rng):
        for _ in range(20):
            p = random_pmf(rng, 3, 5)
            assert chi2(JointPmf(p)) == pytest.approx(chi2_direct(p), abs=1e-12)

    def test_trace_identities(self, rng):
        for _ in range(30):
            j = JointPmf(random_pmf(rng, 3, 4))
            c = Channel(random_channel(rng, 4, 3))
            np.testing.assert_allclose(chi2_via_trace(j, c), chi2_of_chain(j, c), atol=1e-10)

    def test_maximal_correlation(self, dsbs):
        assert maximal_correlation(dsbs) == pytest.approx(0.8)

    def test_delta(self, dsbs, rng):
        assert delta(dsbs) == pytest.approx(0.64)
        assert delta(JointPmf(random_pmf(rng, 2, 3))) == 0.0


class TestMmse:
    def test_matches_direct(self, rng):
        for _ in range(20):
            p = random_pmf(rng, 4, 3)
            f = rng.normal(size=4)
            assert mmse_of_function(f, JointPmf(p)) == pytest.approx(mmse_direct(f, p), abs=1e-12)

    def test_spectral_identity(self, rng):
        for _ in range(20):
            j = JointPmf(random_pmf(rng, 4, 3))
            pu, _ = marginals(j)
            f = standardize(rng.normal(size=4), pu)
            dec = decompose(j)
            assert mmse_decomposition_check(f, dec) == pytest.approx(mmse_of_function(f, j), abs=1e-10)

    def test_conditional_expectation(self, dsbs):
        np.testing.assert_allclose(conditional_expectation([-1, 1], dsbs), [-0.8, 0.8])

    def test_nonzero_mean_rejected(self, dsbs):
        with pytest.raises(ValidationError):
            mmse_decomposition_check([1.0, 1.0], decompose(dsbs))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_data_processing(r, c, o, seed):
    g = np.random.default_rng(seed)
    j = JointPmf(random_pmf(g, r, c))
    ch = Channel(random_channel(g, c, o))
    _, c_sy = chi2_of_chain(j, ch)
    assert c_sy <= chi2(j) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_sum_of_pics_is_chi2(r, c, seed):
    p = random_pmf(np.random.default_rng(seed), r, c)
    assert decompose(JointPmf(p)).chi2() == pytest.approx(chi2_direct(p), abs=1e-8)
