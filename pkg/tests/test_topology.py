import numpy as np
import pytest
from scipy.linalg import sqrtm

from darkwind.model import DisorderSpec, ModelSpec, sample_noise
from darkwind.topology import (
    mixing_angle,
    polar_unitary,
    winding_clean_dimer,
    winding_clean_trimer,
    winding_mean,
    winding_of_unitary,
    winding_real_space_dimer,
    winding_real_space_trimer,
)


def dimer(M, j1, j2=1.0, gamma=0.5):
    return ModelSpec(kind="dimer", n_sites=2 * M, j1=j1, j2=j2, gamma=gamma)


def trimer(M, j3, j1=1.0, j2=2.0, j=1.0, gamma=0.5):
    return ModelSpec(kind="trimer", n_sites=3 * M, j1=j1, j2=j2, j3=j3, j=j, gamma=gamma)


class TestPolarUnitary:
    def test_identity(self):
        u, s = polar_unitary(np.eye(4))
        assert np.allclose(u, np.eye(4), atol=1e-14)
        assert np.allclose(s, 1.0)

    def test_positive_scaling_invariant(self):
        # scaled open shift: polar factor keeps the unit shift pattern
        M = 6
        shift = np.zeros((M, M))
        shift[np.arange(1, M), np.arange(M - 1)] = 1.0
        u, s = polar_unitary(2.0 * shift)
        assert np.allclose(np.abs(u[1:, :-1] - np.eye(M - 1)), 0.0, atol=1e-12)

    def test_random_matrix_against_sqrtm(self):
        # oracle: u * (v^dag v)^(1/2) must reproduce v (Hermitian square root route)
        rng = np.random.default_rng(12)
        v = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        u, s = polar_unitary(v)
        assert np.abs(u.conj().T @ u - np.eye(5)).max() < 1e-10
        p = sqrtm(v.conj().T @ v)
        assert np.abs(u @ p - v).max() < 1e-10

    def test_gauge_invariance_scalar(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=(8, 8))
        u1, _ = polar_unitary(v)
        u2, _ = polar_unitary(137.0 * v)
        assert np.abs(u1 - u2).max() < 1e-10

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            polar_unitary(np.ones((3, 2)))


class TestDimerWinding:
    def test_fully_dimerized_exact(self):
        res = winding_real_space_dimer(dimer(100, j1=0.0), trunc_l=25)
        assert abs(res.w_real - 1.0) < 1e-12
        assert res.w_int == 1

    def test_trivial_phase(self):
        res = winding_real_space_dimer(dimer(500, j1=1.5), trunc_l=125)
        assert res.w_int == 0
        assert res.residual < 0.05

    def test_reentrant_disordered_mean(self):
        # anisotropic disorder drives j1 = 1.2 > j2 into the non-trivial phase
        spec = dimer(500, j1=1.2)
        dsp = DisorderSpec(mu1=1.5, mu2=0.75, base_seed=314)
        avg = winding_mean(spec, dsp, realizations=40, trunc_l=125)
        assert abs(avg.mean - 1.0) < 0.1

    def test_diagonal_disorder_rejected(self):
        spec = dimer(20, j1=0.5)
        noise = sample_noise(spec, DisorderSpec(mu_diag=0.5, base_seed=0), 0)
        with pytest.raises(ValueError):
            winding_real_space_dimer(spec, noise)

    def test_odd_chain_rejected(self):
        spec = ModelSpec(kind="dimer", n_sites=21, j1=0.5, j2=1.0, gamma=0.5)
        with pytest.raises(ValueError):
            winding_real_space_dimer(spec)


class TestTrimerWinding:
    @pytest.mark.parametrize("j3,total", [(0.5, 0), (2.0, 1), (3.5, 2)])
    def test_clean_sectors(self, j3, total):
        res = winding_real_space_trimer(trimer(100, j3=j3), trunc_l=25)
        assert res.total.w_int == total
        assert res.total.residual < 0.05

    def test_branch_split_at_j3_2(self):
        # delta_minus = |j - j2| / j3 = 0.5 < 1 localizes exactly one mode
        res = winding_real_space_trimer(trimer(100, j3=2.0), trunc_l=25)
        assert (res.minus.w_int, res.plus.w_int) == (1, 0)

    def test_branch_additivity(self):
        spec = trimer(60, j3=3.0)
        dsp = DisorderSpec(mu2=0.4, mu3=0.4, mu_j=0.4, base_seed=8)
        res = winding_real_space_trimer(spec, sample_noise(spec, dsp, 1))
        assert abs(res.total.w_real - (res.plus.w_real + res.minus.w_real)) < 1e-10

    def test_disordered_j1_rejected(self):
        spec = trimer(20, j3=3.0)
        noise = sample_noise(spec, DisorderSpec(mu1=0.5, base_seed=0), 0)
        with pytest.raises(ValueError):
            winding_real_space_trimer(spec, noise)

    def test_unequal_onsite_warns(self):
        spec = ModelSpec(kind="trimer", n_sites=60, j1=1.0, j2=2.0, j3=3.0, j=1.0,
                         gamma=0.5, eps_a=0.3, eps_b=0.0)
        with pytest.warns(UserWarning):
            winding_real_space_trimer(spec)


class TestCleanClosedForms:
    @pytest.mark.parametrize("j1,j2,w", [(0.5, 1.0, 1), (1.5, 1.0, 0), (-0.5, 1.0, 1)])
    def test_dimer(self, j1, j2, w):
        assert winding_clean_dimer(j1, j2) == w

    def test_dimer_boundary_signalled(self):
        with pytest.raises(ValueError):
            winding_clean_dimer(1.0, -1.0)

    @pytest.mark.parametrize("args,w", [
        ((1.0, 2.0, 3.5, 1.0), 2),
        ((1.0, 2.0, 0.5, 1.0), 0),
        ((2.0, 2.0, 3.0, 6.0), 0),
        ((2.0, 2.0, 3.0, 0.0), 2),
        ((2.0, 2.0, 3.0, 3.0), 1),
    ])
    def test_trimer(self, args, w):
        assert winding_clean_trimer(*args) == w

    def test_trimer_boundary_signalled(self):
        # j3 = j + j2 puts the plus branch argument exactly at zero
        with pytest.raises(ValueError):
            winding_clean_trimer(1.0, 2.0, 3.0, 1.0)

    def test_mixing_angle_symmetric_case(self):
        assert abs(mixing_angle(1.7) - np.pi / 2) < 1e-15


class TestAgreementWithClosedForms:
    def test_dimer_grid(self):
        # clean real-space value vs step function on a 20-point grid
        pts = [(j1, j2) for j1 in (0.1, 0.45, 0.75, 1.3, 1.8)
               for j2 in (0.9, 1.0, 1.6, 2.2) if abs(abs(j1) - abs(j2)) > 0.1]
        assert len(pts) >= 20
        for j1, j2 in pts:
            res = winding_real_space_dimer(dimer(200, j1=j1, j2=j2))
            assert res.w_int == winding_clean_dimer(j1, j2)
            assert res.residual < 0.05

    def test_trimer_j3_sweep(self):
        for j3 in (0.3, 0.7, 1.5, 2.4, 2.8, 3.3, 3.9):
            res = winding_real_space_trimer(trimer(80, j3=j3))
            assert res.total.w_int == winding_clean_trimer(1.0, 2.0, j3, 1.0)
            assert res.total.residual < 0.05


class TestQuantization:
    def test_residual_shrinks_with_size(self):
        # j1 = 0.9 sits near the boundary: truncation error is measurable
        r200 = winding_real_space_dimer(dimer(200, j1=0.9))
        r400 = winding_real_space_dimer(dimer(400, j1=0.9))
        assert r200.residual < 0.05
        assert r400.residual < r200.residual

    def test_unitarity_of_polar_factors(self):
        spec = trimer(60, j3=2.5)
        dsp = DisorderSpec(mu2=0.5, mu3=0.5, mu_j=0.5, base_seed=21)
        from darkwind.model import sublattice_blocks
        blocks = sublattice_blocks(spec, sample_noise(spec, dsp, 0))
        for mat in (blocks["V"][:60] + blocks["V"][60:], blocks["H_AC"], blocks["H_BC"]):
            u, s = polar_unitary(mat)
            assert np.abs(u.conj().T @ u - np.eye(60)).max() < 1e-8


class TestWindingMean:
    def test_no_disorder_zero_stderr(self):
        spec = dimer(100, j1=0.5)
        avg = winding_mean(spec, DisorderSpec(base_seed=1), realizations=5)
        single = winding_real_space_dimer(spec)
        assert avg.stderr == 0.0
        assert avg.mean == pytest.approx(single.w_real, abs=1e-14)

    def test_deep_nontrivial_mean(self):
        spec = dimer(500, j1=0.5)
        dsp = DisorderSpec(mu1=0.3, mu2=0.3, base_seed=10)
        avg = winding_mean(spec, dsp, realizations=40, trunc_l=125)
        assert abs(avg.mean - 1.0) < 0.05

    def test_critical_region_intermediate(self):
        spec = dimer(250, j1=1.0)
        dsp = DisorderSpec(mu1=1.0, mu2=1.0, base_seed=5)
        avg = winding_mean(spec, dsp, realizations=40)
        assert 0.2 < avg.mean < 0.8

    def test_order_independence_of_mean(self):
        # realization seeds are index-keyed: a second call reproduces exactly
        spec = dimer(60, j1=0.8)
        dsp = DisorderSpec(mu1=0.7, mu2=0.7, base_seed=77)
        a = winding_mean(spec, dsp, realizations=8)
        b = winding_mean(spec, dsp, realizations=8)
        assert a.mean == b.mean and a.stderr == b.stderr
