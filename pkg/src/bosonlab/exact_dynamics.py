"""Exact unitary dynamics, the full-tensor-space oracle, correlation
measurements, and the reduced-density-matrix hierarchy right-hand side.

Everything here diagonalizes once (Hermitian eigendecomposition) and reuses
the factorization across a whole time grid.  The full-space builders exist
as a brute-force cross-check of the symmetric-subspace machinery and refuse
to run past d^N = 2^14.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._tensor import embed_on_sites, partial_trace_last
from .operators import operator_norm
from .symmetric_space import SymmetricState, rdm

FULL_SPACE_GUARD = 2**14

_HERM_ATOL = 1e-12


def _check_hermitian(matrix, what):
    dev = float(np.max(np.abs(matrix - matrix.conj().T)))
    if dev > _HERM_ATOL:
        raise ValueError(f"{what} is not Hermitian (max deviation {dev:.3e})")


def _check_times(times):
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    return t


@dataclass(frozen=True, eq=False)
class ObservableOnSubset:
    """A Hermitian observable acting on an explicit ordered set of particles.

    ``support`` uses 1-based particle labels; slot s of ``matrix`` acts on
    particle support[s].
    """

    support: tuple
    matrix: np.ndarray

    def __post_init__(self):
        sup = tuple(int(i) for i in self.support)
        if len(sup) == 0:
            raise ValueError("support must be non-empty")
        if len(set(sup)) != len(sup):
            raise ValueError("support indices must be distinct")
        if min(sup) < 1:
            raise ValueError("support uses 1-based particle labels")
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("observable matrix must be square")
        _check_hermitian(mat, "observable")
        mat.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True, eq=False)
class FullSpaceState:
    """Unit vector on the full d^N tensor-product space."""

    d: int
    n_particles: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.d**self.n_particles:
            raise ValueError(
                f"amplitude length {amps.size} is not d^N = {self.d**self.n_particles}"
            )
        dev = abs(np.linalg.norm(amps) - 1.0)
        if dev > 1e-10:
            raise ValueError(f"state norm deviates from 1 by {dev:.3e}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


def evolve_exact(hamiltonian, state, times):
    """Propagate a symmetric state to each requested time.

    One eigendecomposition serves the whole grid; failure in the
    decomposition propagates as an exception, never as a silent result.
    """
    h = np.asarray(hamiltonian)
    basis = state.basis
    if h.shape != (basis.size, basis.size):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match basis size {basis.size}")
    _check_hermitian(h, "Hamiltonian")
    t = _check_times(times)
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ state.amplitudes
    return [SymmetricState(basis, v @ (np.exp(-1j * w * ti) * coeff)) for ti in t]


def _guard_dimension(d, n_particles):
    dim = d**n_particles
    if dim > FULL_SPACE_GUARD:
        max_n = int(math.floor(math.log(FULL_SPACE_GUARD) / math.log(d))) if d > 1 else n_particles
        raise ValueError(
            f"full-space dimension {d}^{n_particles} = {dim} exceeds the dense guard "
            f"{FULL_SPACE_GUARD}; largest workable N for d={d} is {max_n}"
        )
    return dim


def fullspace_build(spec, n_particles):
    """Literal Hamiltonian on (C^d)^(x N): brute-force oracle, no symmetry used."""
    d = spec.d
    dim = _guard_dimension(d, n_particles)
    h = np.zeros((dim, dim), dtype=np.complex128)
    for m in spec.present_orders:
        if m > n_particles:
            raise ValueError("interaction order exceeds particle number")
        prefactor = 1.0 if m == 1 else float(n_particles) ** (1 - m)
        vmat = spec.terms[m].matrix
        for sites in combinations(range(n_particles), m):
            h += prefactor * embed_on_sites(vmat, sites, d, n_particles)
    return (h + h.conj().T) / 2


def fullspace_evolve(hamiltonian, state, times):
    """Full-space analogue of :func:`evolve_exact`."""
    h = np.asarray(hamiltonian)
    dim = state.d**state.n_particles
    if h.shape != (dim, dim):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match dimension {dim}")
    _check_hermitian(h, "Hamiltonian")
    t = _check_times(times)
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ state.amplitudes
    return [
        FullSpaceState(state.d, state.n_particles, v @ (np.exp(-1j * w * ti) * coeff))
        for ti in t
    ]


def commutator_growth(spec, n_particles, obs_a, obs_b, times):
    """Spectral norms ||[A, B(t)]|| with B evolved in the Heisenberg picture.

    A and B must live on disjoint particle subsets, so the value at t = 0 is
    exactly zero.  Runs in the full tensor space: observables pinned to
    specific particles break permutation symmetry, so the symmetric sector
    cannot express this quantity.
    """
    if set(obs_a.support) & set(obs_b.support):
        raise ValueError("supports must be disjoint")
    d = spec.d
    for obs in (obs_a, obs_b):
        if max(obs.support) > n_particles:
            raise ValueError("support index exceeds particle number")
        if obs.matrix.shape[0] != d ** len(obs.support):
            raise ValueError(
                f"observable dimension {obs.matrix.shape[0]} does not match "
                f"d^|support| = {d ** len(obs.support)}"
            )
    t = _check_times(times)
    h = fullspace_build(spec, n_particles)
    w, v = np.linalg.eigh(h)
    a_emb = embed_on_sites(obs_a.matrix, tuple(i - 1 for i in obs_a.support), d, n_particles)
    b_emb = embed_on_sites(obs_b.matrix, tuple(i - 1 for i in obs_b.support), d, n_particles)
    out = []
    for ti in t:
        u = (v * np.exp(1j * w * ti)) @ v.conj().T
        b_t = u @ b_emb @ u.conj().T
        out.append(operator_norm(a_emb @ b_t - b_t @ a_emb))
    return out


def correlation_gap(state, m, n, a_matrix, b_matrix):
    """|tr((A (x) B) (gamma^(m+n) - gamma^(m) (x) gamma^(n)))| for a symmetric state.

    Equal, by the definition of the RDMs, to the product-expectation gap
    |<A B> - <A><B>| with A on the first m particles and B on the next n.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    basis = state.basis
    if m + n > basis.n_particles:
        raise ValueError("m + n exceeds the particle number")
    d = basis.d
    a = np.asarray(a_matrix, dtype=np.complex128)
    b = np.asarray(b_matrix, dtype=np.complex128)
    if a.shape != (d**m, d**m) or b.shape != (d**n, d**n):
        raise ValueError("observable dimensions do not match d^m / d^n")
    g_mn = rdm(state, m + n).matrix
    g_m = rdm(state, m).matrix
    g_n = rdm(state, n).matrix
    return float(abs(np.trace(np.kron(a, b) @ (g_mn - np.kron(g_m, g_n)))))


def _require_rdm(rdms, offset, order, d):
    if offset not in rdms:
        raise ValueError(f"missing reduced density matrix for offset {offset} (order {order})")
    g = rdms[offset]
    if g.order != order or g.d != d:
        raise ValueError(
            f"rdms[{offset}] has order {g.order} (d={g.d}); expected order {order} (d={d})"
        )
    return g.matrix


def bbgky_rhs(spec, n_particles, k, rdms):
    """d(gamma^(k))/dt predicted by the finite-N hierarchy.

    ``rdms`` maps the offset l to the order-(k+l) RDM, l = 0 .. max_order-1.
    The order-m interaction enters with weight C(N-k, l)/N^(m-1) for each
    way of placing m-l of its slots on the kept particles (the traced slots
    are interchangeable, hence the binomial count), plus the plain one-body
    commutator.  The result is the Hermitian, traceless matrix -i * (sum of
    commutators).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    d = spec.d
    orders = spec.present_orders
    max_present = max(orders, default=1)
    if k + max_present - 1 > n_particles:
        raise ValueError(
            f"hierarchy needs RDM order k + {max_present - 1} = {k + max_present - 1}"
            f" > N = {n_particles}"
        )
    dim_k = d**k
    gamma_k = _require_rdm(rdms, 0, k, d)
    acc = np.zeros((dim_k, dim_k), dtype=np.complex128)
    one_body = spec.terms.get(1)
    if one_body is not None:
        h1 = np.zeros((dim_k, dim_k), dtype=np.complex128)
        for j in range(k):
            h1 += embed_on_sites(one_body.matrix, (j,), d, k)
        acc += h1 @ gamma_k - gamma_k @ h1
    for m in spec.interaction_orders:
        vmat = spec.terms[m].matrix
        prefactor = float(n_particles) ** (1 - m)
        for offset in range(max(0, m - k), m):
            g = _require_rdm(rdms, offset, k + offset, d)
            coeff = math.comb(n_particles - k, offset) * prefactor
            block = np.zeros((dim_k, dim_k), dtype=np.complex128)
            for kept in combinations(range(k), m - offset):
                sites = tuple(kept) + tuple(range(k, k + offset))
                v_emb = embed_on_sites(vmat, sites, d, k + offset)
                block += partial_trace_last(v_emb @ g - g @ v_emb, d, k + offset, offset)
            acc += coeff * block
    return -1j * acc
