import numpy as np
import pytest

from darkwind.model import (
    BondNoise,
    DisorderSpec,
    ModelSpec,
    build_hamiltonian,
    load_matrix,
    sample_noise,
    save_matrix,
    sublattice_blocks,
    sublattice_permutation,
)


def dimer(n, j1=0.5, j2=1.0, gamma=0.5, **kw):
    return ModelSpec(kind="dimer", n_sites=n, j1=j1, j2=j2, gamma=gamma, **kw)


def trimer(n, j1=1.0, j2=2.0, j3=3.0, j=1.0, gamma=0.5, **kw):
    return ModelSpec(kind="trimer", n_sites=n, j1=j1, j2=j2, j3=j3, j=j, gamma=gamma, **kw)


class TestSampleNoise:
    def test_zero_disorder_gives_zero_offsets(self):
        spec = dimer(40)
        noise = sample_noise(spec, DisorderSpec(base_seed=99), 3)
        assert not noise.dj1.any() and not noise.dj2.any() and not noise.deps.any()

    def test_deterministic_per_realization(self):
        spec = dimer(40)
        dsp = DisorderSpec(mu1=1.0, mu2=0.5, base_seed=7)
        a = sample_noise(spec, dsp, 7)
        b = sample_noise(spec, dsp, 7)
        assert np.array_equal(a.dj1, b.dj1) and np.array_equal(a.dj2, b.dj2)
        assert a.seed == b.seed

    def test_realizations_differ(self):
        spec = dimer(40)
        dsp = DisorderSpec(mu1=1.0, base_seed=7)
        assert not np.array_equal(sample_noise(spec, dsp, 0).dj1,
                                  sample_noise(spec, dsp, 1).dj1)

    def test_offsets_bounded_by_half_width(self):
        spec = trimer(90)
        dsp = DisorderSpec(mu1=0.3, mu2=1.2, mu3=2.0, mu_j=0.7, mu_diag=0.1, base_seed=1)
        noise = sample_noise(spec, dsp, 0)
        for arr, mu in ((noise.dj1, 0.3), (noise.dj2, 1.2), (noise.dj3, 2.0),
                        (noise.dj, 0.7), (noise.deps, 0.1)):
            assert np.all(np.abs(arr) <= mu)

    def test_uniform_moments(self):
        # 1e5 offsets: mean 0 +- 0.01, variance 1/3 +- 0.01 (Monte Carlo)
        spec = dimer(2000)
        dsp = DisorderSpec(mu1=1.0, base_seed=2024)
        samples = np.concatenate([sample_noise(spec, dsp, r).dj1 for r in range(100)])
        assert samples.size == 100_000
        assert abs(samples.mean()) < 0.01
        assert abs(samples.var() - 1.0 / 3.0) < 0.01

    def test_negative_realization_rejected(self):
        with pytest.raises(ValueError):
            sample_noise(dimer(4), DisorderSpec(), -1)


class TestBuildHamiltonian:
    def test_single_cell_dimer(self):
        H = build_hamiltonian(dimer(2))
        expected = np.array([[0.0, 0.5], [0.5, -0.5j]])
        assert np.allclose(H, expected, atol=0)

    def test_j1_zero_isolates_first_site(self):
        # fully dimerized limit: column of site A1 is purely diagonal
        H = build_hamiltonian(dimer(20, j1=0.0))
        col = H[:, 0].copy()
        col[0] = 0.0
        assert not col.any()

    def test_trimer_pattern_n6(self):
        # independent index-by-index assembly of the two-cell trimer
        spec = trimer(6, j1=1.0, j2=2.0, j3=3.0, j=1.0, gamma=0.5)
        H = build_hamiltonian(spec)
        expected = np.zeros((6, 6), dtype=complex)
        bonds = {(0, 1): 1.0, (1, 2): 2.0, (0, 2): 1.0, (2, 3): 3.0,
                 (3, 4): 1.0, (4, 5): 2.0, (3, 5): 1.0}
        for (a, b), v in bonds.items():
            expected[a, b] = expected[b, a] = v
        expected[2, 2] = expected[5, 5] = -0.5j
        assert np.array_equal(H, expected)

    def test_symmetric_and_leaky_diagonal(self):
        for spec in (dimer(12, j1=0.3, j2=1.1, gamma=0.7), trimer(12, gamma=0.2)):
            dsp = DisorderSpec(mu1=0.5 if spec.kind == "dimer" else 0.0,
                               mu2=0.5, mu3=0.5, mu_j=0.5, base_seed=3)
            H = build_hamiltonian(spec, sample_noise(spec, dsp, 0))
            assert np.array_equal(H, H.T)
            imag_diag = np.diag(H).imag
            leaky = spec.leaky_sites()
            assert np.allclose(imag_diag[leaky], -spec.gamma)
            mask = np.ones(spec.n_sites, bool)
            mask[leaky] = False
            assert not imag_diag[mask].any()

    def test_translation_covariance_clean(self):
        spec = trimer(30)
        H = build_hamiltonian(spec)
        n = spec.cell_size
        # interior cell blocks identical under shift by one cell
        b1 = H[n:2 * n, n:2 * n]
        b2 = H[2 * n:3 * n, 2 * n:3 * n]
        assert np.array_equal(b1, b2)
        c1 = H[n:2 * n, 2 * n:3 * n]
        c2 = H[2 * n:3 * n, 3 * n:4 * n]
        assert np.array_equal(c1, c2)

    def test_shape_mismatch_rejected(self):
        noise = BondNoise.zero(dimer(10))
        with pytest.raises(ValueError):
            build_hamiltonian(dimer(12), noise)


class TestSublatticeBlocks:
    def test_dimer_m2(self):
        blocks = sublattice_blocks(dimer(4, j1=0.5, j2=1.0))
        assert np.allclose(blocks["V"], [[0.5, 0.0], [1.0, 0.5]], atol=0)
        assert np.allclose(blocks["Lambda"], np.zeros((2, 2)), atol=0)

    def test_dimer_j2_zero_decouples(self):
        blocks = sublattice_blocks(dimer(8, j1=0.7, j2=0.0))
        V = blocks["V"]
        assert np.allclose(V, np.diag(np.diag(V)), atol=0)
        vv = V.conj().T @ V
        assert np.allclose(vv, np.diag(np.diag(vv)), atol=0)

    def test_trimer_m2(self):
        blocks = sublattice_blocks(trimer(6, j1=1.0, j2=2.0, j3=3.0, j=1.0))
        assert np.allclose(blocks["H_AC"], [[1.0, 0.0], [3.0, 1.0]], atol=0)
        assert np.allclose(blocks["H_BC"], 2.0 * np.eye(2), atol=0)

    @pytest.mark.parametrize("make,mus", [
        (dimer, dict(mu1=0.4, mu2=0.8)),
        (trimer, dict(mu1=0.2, mu2=0.4, mu3=0.6, mu_j=0.8, mu_diag=0.3)),
    ])
    def test_reassembly_matches_hamiltonian(self, make, mus):
        spec = make(18, gamma=0.6)
        noise = sample_noise(spec, DisorderSpec(base_seed=11, **mus), 2)
        H = build_hamiltonian(spec, noise)
        blocks = sublattice_blocks(spec, noise)
        perm = sublattice_permutation(spec)
        Hp = H[np.ix_(perm, perm)]
        k = (spec.cell_size - 1) * spec.n_cells
        assert np.allclose(Hp[:k, :k], blocks["Lambda"], atol=0)
        assert np.allclose(Hp[:k, k:], blocks["V"], atol=0)
        assert np.allclose(Hp[k:, :k], np.asarray(blocks["V"]).T, atol=0)

    def test_incomplete_cell_rejected(self):
        with pytest.raises(ValueError):
            sublattice_blocks(trimer(8))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        spec = dimer(6, gamma=0.25)
        H = build_hamiltonian(spec, sample_noise(spec, DisorderSpec(mu1=1.0, base_seed=5), 0))
        path = tmp_path / "h.txt"
        save_matrix(path, H)
        assert load_matrix(path).tolist() == H.tolist()
        assert open(path).readline().strip() == "N=6"

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n1,0 0,0\n0,0 1,0\n")
        with pytest.raises(ValueError):
            load_matrix(path)


class TestSpecValidation:
    def test_bad_kind(self):
        with pytest.raises(ValueError):
            ModelSpec(kind="tetramer", n_sites=4, j1=1, j2=1)

    def test_negative_gamma(self):
        with pytest.raises(ValueError):
            dimer(4, gamma=-0.1)

    def test_negative_half_width(self):
        with pytest.raises(ValueError):
            DisorderSpec(mu1=-0.5)

    def test_bond_counts_open_chain(self):
        assert dimer(10).bond_counts() == {"j1": 5, "j2": 4}
        assert trimer(9).bond_counts() == {"j1": 3, "j2": 3, "j": 3, "j3": 2}
        assert trimer(5).bond_counts() == {"j1": 2, "j2": 1, "j": 1, "j3": 1}
