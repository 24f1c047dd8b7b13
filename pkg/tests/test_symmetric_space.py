import math

import numpy as np
import pytest

from bosonlab import (
    HamiltonianSpec,
    PotentialTerm,
    SymmetricState,
    build_hamiltonian,
    build_symmetric_operator,
    embed_product_state,
    enumerate_basis,
    rdm,
)

from .conftest import SZ, random_spec, substream
from . import oracles


class TestEnumerateBasis:
    def test_two_modes_three_particles(self):
        basis = enumerate_basis(2, 3)
        np.testing.assert_array_equal(basis.vectors, [[3, 0], [2, 1], [1, 2], [0, 3]])

    def test_single_mode(self):
        basis = enumerate_basis(1, 7)
        np.testing.assert_array_equal(basis.vectors, [[7]])

    def test_three_modes_two_particles_size(self):
        assert enumerate_basis(3, 2).size == 6  # stars and bars

    @pytest.mark.parametrize("d,n", [(2, 5), (3, 4), (4, 3)])
    def test_size_formula_and_ordering(self, d, n):
        basis = enumerate_basis(d, n)
        assert basis.size == math.comb(n + d - 1, d - 1)
        assert basis.vectors.sum(axis=1).tolist() == [n] * basis.size
        rows = [tuple(v) for v in basis.vectors]
        assert rows == sorted(rows, reverse=True)  # lexicographically descending

    def test_index_of_roundtrip(self):
        basis = enumerate_basis(3, 4)
        for i, occ in enumerate(basis.vectors):
            assert basis.index_of(occ) == i

    def test_index_of_rejects_wrong_total(self):
        basis = enumerate_basis(2, 3)
        with pytest.raises(KeyError):
            basis.index_of((2, 2))

    def test_oversized_sector_rejected(self):
        with pytest.raises(ValueError, match="refusing to enumerate"):
            enumerate_basis(64, 64)


class TestEmbedProductState:
    def test_basis_mode_maps_to_dicke_corner(self):
        state = embed_product_state(np.array([1.0, 0.0]), 5)
        expected = np.zeros(6)
        expected[0] = 1.0  # occupation (5, 0) comes first
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)

    def test_two_particle_amplitudes(self):
        alpha, beta = 0.6, 0.8j
        state = embed_product_state(np.array([alpha, beta]), 2)
        np.testing.assert_allclose(
            state.amplitudes,
            [alpha**2, math.sqrt(2) * alpha * beta, beta**2],
            atol=1e-15,
        )

    def test_uniform_superposition_matches_fullspace_oracle(self):
        # squared amplitudes over occupations follow Binomial(6, 1/2)
        phi = np.array([1.0, 1.0]) / math.sqrt(2)
        state = embed_product_state(phi, 6)
        basis = state.basis
        t = oracles.symmetric_isometry(basis)
        full = phi
        for _ in range(5):
            full = np.kron(full, phi)
        np.testing.assert_allclose(state.amplitudes, t.conj().T @ full, atol=1e-13)
        probs = np.abs(state.amplitudes) ** 2
        binom = [math.comb(6, k) / 64 for k in range(7)]
        np.testing.assert_allclose(probs, binom, atol=1e-13)

    def test_random_phi_matches_fullspace_oracle(self, rng):
        phi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        phi /= np.linalg.norm(phi)
        state = embed_product_state(phi, 4)
        t = oracles.symmetric_isometry(state.basis)
        full = phi
        for _ in range(3):
            full = np.kron(full, phi)
        np.testing.assert_allclose(state.amplitudes, t.conj().T @ full, atol=1e-13)

    def test_norm_is_preserved(self, rng):
        phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi /= np.linalg.norm(phi)
        state = embed_product_state(phi, 6)
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_phi_rejected(self):
        with pytest.raises(ValueError, match="norm deviates"):
            embed_product_state(np.array([1.0, 1.0]), 3)


class TestSymmetricState:
    def test_norm_checked(self):
        basis = enumerate_basis(2, 2)
        with pytest.raises(ValueError, match="norm deviates"):
            SymmetricState(basis, np.array([1.0, 1.0, 1.0]))

    def test_length_checked(self):
        basis = enumerate_basis(2, 2)
        with pytest.raises(ValueError):
            SymmetricState(basis, np.array([1.0, 0.0]))


class TestBuildSymmetricOperator:
    def test_identity_pair_term_counts_pairs(self):
        basis = enumerate_basis(2, 5)
        op = build_symmetric_operator(PotentialTerm(2, np.eye(4)), basis, 1.0)
        np.testing.assert_allclose(op, math.comb(5, 2) * np.eye(basis.size), atol=1e-12)

    def test_total_spin_z(self):
        basis = enumerate_basis(2, 2)
        op = build_symmetric_operator(PotentialTerm(1, SZ), basis, 1.0)
        np.testing.assert_allclose(op, np.diag([2.0, 0.0, -2.0]), atol=1e-13)

    def test_matches_isometry_conjugated_brute_force(self, rng):
        d, n = 2, 3
        spec = random_spec(rng, d, (2,), unit_norm=False)
        term = spec.terms[2]
        basis = enumerate_basis(d, n)
        op = build_symmetric_operator(term, basis, 1.0)
        t = oracles.symmetric_isometry(basis)
        brute = np.zeros((d**n, d**n), dtype=complex)
        for sites in ((0, 1), (0, 2), (1, 2)):
            brute += oracles.embed_brute(term.matrix, sites, d, n)
        np.testing.assert_allclose(op, t.conj().T @ brute @ t, atol=1e-12)

    def test_order_exceeding_particle_number_rejected(self):
        basis = enumerate_basis(2, 2)
        with pytest.raises(ValueError, match="exceeds"):
            build_symmetric_operator(PotentialTerm(3, np.eye(8)), basis, 1.0)

    def test_dimension_mismatch_rejected(self):
        basis = enumerate_basis(3, 3)
        with pytest.raises(ValueError, match="match"):
            build_symmetric_operator(PotentialTerm(2, np.eye(4)), basis, 1.0)


class TestBuildHamiltonian:
    def test_single_particle_term_eigenvalues(self):
        # diagonal V1 -> diagonal H with occupation-weighted sums of eigenvalues
        spec = HamiltonianSpec(2, 1, {1: PotentialTerm(1, np.diag([1.5, -0.5]))})
        h = build_hamiltonian(spec, 3)
        basis = enumerate_basis(2, 3)
        expected = [1.5 * occ[0] - 0.5 * occ[1] for occ in basis.vectors]
        np.testing.assert_allclose(h, np.diag(expected), atol=1e-13)

    def test_identity_interaction_shifts_by_half_n_minus_one(self):
        spec = HamiltonianSpec(
            2, 2, {2: PotentialTerm(2, np.eye(4))}
        )
        for n in (2, 3, 6):
            h = build_hamiltonian(spec, n)
            dim = n + 1
            np.testing.assert_allclose(h, (n - 1) / 2 * np.eye(dim), atol=1e-12)

    def test_matches_fullspace_oracle(self):
        rng = substream(41, "ham")
        spec = random_spec(rng, 2, (1, 2, 3), unit_norm=False)
        n = 4
        h = build_hamiltonian(spec, n)
        t = oracles.symmetric_isometry(enumerate_basis(2, n))
        brute = oracles.hamiltonian_brute(spec, n)
        np.testing.assert_allclose(h, t.conj().T @ brute @ t, atol=1e-11)

    def test_hermitian(self, rng):
        spec = random_spec(rng, 3, (1, 2), unit_norm=False)
        h = build_hamiltonian(spec, 4)
        np.testing.assert_allclose(h, h.conj().T, atol=1e-12)


class TestRdm:
    def test_product_state_factorizes(self, rng):
        phi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        phi /= np.linalg.norm(phi)
        state = embed_product_state(phi, 5)
        pure = np.outer(phi, phi.conj())
        for k in (1, 2, 3):
            expected = pure
            for _ in range(k - 1):
                expected = np.kron(expected, pure)
            np.testing.assert_allclose(rdm(state, k).matrix, expected, atol=1e-12)

    def test_dicke_state_single_particle(self):
        basis = enumerate_basis(3, 4)
        amps = np.zeros(basis.size)
        amps[basis.index_of((4, 0, 0))] = 1.0
        state = SymmetricState(basis, amps)
        np.testing.assert_allclose(
            rdm(state, 1).matrix, np.diag([1.0, 0.0, 0.0]), atol=1e-14
        )

    def test_evolved_state_matches_brute_force_partial_trace(self):
        from bosonlab import evolve_exact

        rng = substream(17, "rdm")
        d, n = 2, 4
        spec = random_spec(rng, d, (1, 2), unit_norm=False)
        h = build_hamiltonian(spec, n)
        phi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        phi /= np.linalg.norm(phi)
        state = evolve_exact(h, embed_product_state(phi, n), [0.9])[0]
        t = oracles.symmetric_isometry(state.basis)
        full = t @ state.amplitudes
        rho = np.outer(full, full.conj())
        for k in (1, 2):
            expected = oracles.trace_out_last(rho, d, n, n - k)
            np.testing.assert_allclose(rdm(state, k).matrix, expected, atol=1e-12)

    def test_output_is_valid_density_matrix(self, rng):
        basis = enumerate_basis(2, 6)
        amps = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
        amps /= np.linalg.norm(amps)
        state = SymmetricState(basis, amps)
        gamma = rdm(state, 2)
        assert np.trace(gamma.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(gamma.matrix).min() >= -1e-10

    def test_k_bounds_enforced(self):
        state = embed_product_state(np.array([1.0, 0.0]), 3)
        with pytest.raises(ValueError):
            rdm(state, 0)
        with pytest.raises(ValueError):
            rdm(state, 4)
