import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import l2_grid, parity_exhaustive, random_channel
from picput.mmsebounds import (
    CorrelationSpec,
    all_subsets,
    b_m,
    dual_value,
    estimability_bound,
    l_n,
    mmse_lower_bound,
    one_bit_guess_bound,
    one_bit_report,
    parity_mmse,
    parity_mmse_exhaustive,
    spec_from_joint,
)
from picput.pic import conditional_expectation, mmse_of_function
from picput.probspace import JointPmf, ValidationError


def q_ary_joint(q, eps):
    w = (1 - eps) * np.eye(q) + eps / q
    return JointPmf(w / q)


def orthonormal_refs(g, q, m=None):
    """m orthonormal zero-mean functions under the uniform pmf on [q]."""
    m = q - 1 if m is None else m
    basis = np.linalg.qr(np.column_stack([np.ones(q), g.normal(size=(q, q - 1))]))[0]
    return basis[:, 1:m + 1].T * np.sqrt(q)


class TestLn:
    def test_unconstrained(self):
        assert l_n([1, 1], [1, 1]).value == pytest.approx(np.sqrt(2))

    def test_blocked(self):
        assert l_n([1, 1], [0, 0]).value == pytest.approx(0.0)

    def test_worked_example(self):
        res = l_n([1, 1], [0.5, 1])
        assert res.value == pytest.approx(0.5 + np.sqrt(0.75), abs=1e-12)
        assert res.value == pytest.approx(l2_grid([1, 1], [0.5, 1]), abs=2e-3)

    def test_small_norm_weights(self):
        # ||a|| < 1: the normalized direction a/||a|| overshoots b
        res = l_n([0.1, 0.1], [0.1, 0.1])
        assert res.value == pytest.approx(0.02)
        assert res.value == pytest.approx(l2_grid([0.1, 0.1], [0.1, 0.1]), abs=2e-3)

    def test_grid_oracle(self, rng):
        for _ in range(20):
            a, b = rng.uniform(0.05, 1.5, 2), rng.random(2)
            assert l_n(a, b).value == pytest.approx(l2_grid(a, b), abs=2e-3)

    def test_certificates(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 7))
            a = rng.uniform(0.01, 2, n)
            b = rng.random(n) * (rng.random(n) < 0.8)
            res = l_n(a, b)
            assert res.primal(a) == pytest.approx(res.value, abs=1e-10)
            assert dual_value(a, b, res.u) == pytest.approx(res.value, abs=1e-10)
            assert np.linalg.norm(res.y) <= 1 + 1e-12
            assert np.all(res.y <= b + 1e-12)
            assert np.all(res.u >= -a - 1e-12)

    def test_errors(self):
        with pytest.raises(ValidationError):
            l_n([0, 1], [0.5, 0.5])
        with pytest.raises(ValidationError):
            l_n([1, 1], [1.5, 0.5])


class TestBm:
    def test_no_restriction(self):
        assert b_m(CorrelationSpec([0.6, 0.8], [1, 1])) == pytest.approx(1.0)

    def test_symmetric_channel(self):
        # with spanning references and a common ceiling 1 - eps, only the
        # orthogonality-aware form is tight; plain B_m can be loose
        rhos = np.full(4, 0.5)
        nus = np.full(4, 0.7)
        assert estimability_bound(CorrelationSpec(rhos, nus, t=4))[0] == pytest.approx(0.7)
        assert b_m(CorrelationSpec(rhos, nus)) == pytest.approx(1.0)
        assert b_m(CorrelationSpec([1.0], [0.7])) == pytest.approx(0.7)

    def test_half(self):
        assert b_m(CorrelationSpec([0.6, 0.8], [0.5, 0.5])) == pytest.approx(l2_grid([0.6, 0.8], [0.5, 0.5]), abs=2e-3)

    def test_rho0_included(self):
        spec = CorrelationSpec([0.6], [0.0])
        assert spec.rho0 == pytest.approx(0.8)
        # all of phi's mass outside the reference stays estimable
        assert b_m(spec) == pytest.approx(0.8)

    def test_monotone_in_nu(self, rng):
        for _ in range(30):
            rhos = rng.dirichlet(np.ones(3)) ** 0.5 * rng.uniform(0.5, 1)
            nus = rng.random(3)
            base = b_m(CorrelationSpec(rhos, nus))
            for i in range(3):
                bumped = nus.copy()
                bumped[i] = min(1.0, bumped[i] + 0.1)
                assert b_m(CorrelationSpec(rhos, bumped)) >= base - 1e-12

    def test_signed_rhos_folded(self):
        assert CorrelationSpec([-0.6, 0.8], [0.5, 0.5]).rhos[0] == 0.6

    def test_spec_errors(self):
        with pytest.raises(ValidationError):
            CorrelationSpec([0.8, 0.8], [1, 1])
        with pytest.raises(ValidationError):
            CorrelationSpec([0.5], [1.2])
        with pytest.raises(ValidationError):
            CorrelationSpec([0.5], [0.5], t=2)


class TestMmseLowerBound:
    def test_tighter_equality(self):
        assert mmse_lower_bound(CorrelationSpec([0.6, 0.8], [0.7, 0.7], t=2)) == pytest.approx(0.51)

    def test_nu_one_gives_zero(self):
        assert mmse_lower_bound(CorrelationSpec([0.6, 0.8], [1, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_tighter_never_weaker(self, rng):
        for _ in range(30):
            rhos = rng.dirichlet(np.ones(4)) ** 0.5 * rng.uniform(0.3, 1)
            nus = rng.random(4)
            loose = mmse_lower_bound(CorrelationSpec(rhos, nus, 0))
            for t in range(1, 5):
                assert mmse_lower_bound(CorrelationSpec(rhos, nus, t)) >= loose - 1e-12

    def test_q_ary_sharpness(self):
        g = np.random.default_rng(4)
        j = q_ary_joint(4, 0.3)
        refs = orthonormal_refs(g, 4)
        for _ in range(5):
            phi = g.normal(size=4)
            phi = (phi - phi.mean()) / np.sqrt(((phi - phi.mean()) ** 2).mean())
            spec = spec_from_joint(j, phi, refs, t=3)
            measured = np.sqrt(np.mean(conditional_expectation(phi, j) ** 2))
            assert measured == pytest.approx(0.7, abs=1e-10)
            assert estimability_bound(spec)[0] == pytest.approx(measured, abs=1e-10)

    def test_consistent_with_measured_mmse(self):
        # random channel on a uniform 4-ary X, references from its principal functions
        g = np.random.default_rng(11)
        for _ in range(20):
            w = random_channel(g, 4, 4)
            j = JointPmf(w / 4)
            refs = orthonormal_refs(g, 4, int(g.integers(1, 4)))
            phi = g.normal(size=4)
            phi = (phi - phi.mean()) / np.sqrt(((phi - phi.mean()) ** 2).mean())
            spec = spec_from_joint(j, phi, refs, t=0)
            assert mmse_of_function(phi, j) >= mmse_lower_bound(spec) - 1e-9

    def test_cross_orthogonality_enforced(self):
        g = np.random.default_rng(1)
        w = random_channel(g, 4, 4)
        j = JointPmf(w / 4)
        refs = orthonormal_refs(g, 4)
        phi = refs[0] * 0.6 + refs[1] * 0.8
        with pytest.raises(ValidationError):
            spec_from_joint(j, phi, refs, t=3)


class TestParity:
    def test_two_bits(self):
        assert parity_mmse({(0, 1): 1.0}, 0.1) == pytest.approx(0.5904, abs=1e-12)
        assert parity_exhaustive(2, 0.1, lambda x: x[0] * x[1]) == pytest.approx(0.5904, abs=1e-12)

    def test_single_bit(self):
        assert parity_mmse({(0,): 1.0}, 0.2) == pytest.approx(1 - 0.6 ** 2)

    def test_constant(self):
        assert parity_mmse({(): 1.0}, 0.3) == pytest.approx(0.0)

    def test_mixed_against_enumeration(self, rng):
        n = 3
        subsets = list(all_subsets(n))[1:]
        c = rng.normal(size=len(subsets))
        c /= np.linalg.norm(c)
        coeffs = dict(zip(subsets, c))
        assert parity_mmse(coeffs, 0.15) == pytest.approx(parity_mmse_exhaustive(coeffs, n, 0.15), abs=1e-12)

    def test_unnormalized(self):
        with pytest.raises(ValidationError):
            parity_mmse({(0,): 0.5}, 0.1)


class TestOneBit:
    def test_perfect_estimability(self):
        assert one_bit_guess_bound([0.6, 0.8], [0.0, 0.0]) == pytest.approx(0.0)

    def test_nothing_estimable(self):
        assert one_bit_guess_bound([0.6, 0.8], [0.5, 0.5]) == pytest.approx(0.5)

    def test_half(self):
        expected = (1 - l2_grid([0.6, 0.8], [0.5, 0.5])) / 2
        assert one_bit_guess_bound([0.6, 0.8], [0.25, 0.25]) == pytest.approx(expected, abs=1e-3)

    def test_alpha_range(self):
        with pytest.raises(ValidationError):
            one_bit_guess_bound([0.6, 0.8], [0.3, 0.1], means=[0.5, 0.0])

    def test_flag(self):
        assert one_bit_report([0.6, 0.8], [0.1, 0.1])["references_span_target"]
        assert not one_bit_report([0.6], [0.1])["references_span_target"]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-3, 3.0), st.floats(0.0, 1.0)), min_size=1, max_size=8))
def test_primal_dual_property(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    res = l_n(a, b)
    assert abs(res.primal(a) - res.dual(a, b)) <= 1e-10
    assert np.linalg.norm(res.y) <= 1 + 1e-12
