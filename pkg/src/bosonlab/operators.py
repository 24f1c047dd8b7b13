"""Interaction potentials and the scalar constants feeding the error bounds.

An order-m interaction is a Hermitian matrix on m single-particle slots that
is invariant under permuting the slots.  A :class:`HamiltonianSpec` collects
one such term per order together with the single-particle dimension; it is
the single source of truth for every dynamical routine in the package.

The bound evaluators in :mod:`bosonlab.bounds` consume three scalars derived
here: the order-weighted spectral-norm sums, and the largest coefficient-
magnitude sum of any term when decomposed in a product basis of the slot
spaces (``vtilde``).  The canonical decomposition uses the matrix-unit basis
E_ab = |a><b| per slot, whose coefficients are simply the matrix entries;
the ``search`` strategy additionally conjugates the per-slot basis by random
unitaries with greedy refinement.  Both are lower estimates of the supremum
over all orthonormal product bases, and search >= canonical always.
"""

import hashlib
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

DEFAULT_ATOL = 1e-12

_U64 = 2**64


def operator_norm(matrix):
    """Spectral norm: the largest singular value."""
    return float(np.linalg.norm(np.asarray(matrix), 2))


def permute_slots(matrix, d, order, perm):
    """Conjugate an order-slot operator by a permutation of its slots."""
    mat = np.asarray(matrix)
    t = mat.reshape((d,) * (2 * order))
    axes = tuple(perm) + tuple(order + p for p in perm)
    return t.transpose(axes).reshape(mat.shape)


def slot_symmetrize(matrix, d, order):
    """Project an operator onto its slot-permutation-symmetric part."""
    mat = np.asarray(matrix, dtype=np.complex128)
    perms = list(permutations(range(order)))
    acc = np.zeros_like(mat)
    for p in perms:
        acc += permute_slots(mat, d, order, p)
    return acc / len(perms)


@dataclass(frozen=True, eq=False)
class PotentialTerm:
    """One interaction term acting on ``order`` particles at a time.

    Construction only checks shape; physical validity (Hermiticity, slot
    symmetry, dimension consistency with d) is the job of
    :func:`validate_potential`, so that invalid matrices can be built and
    reported on.
    """

    order: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("interaction order must be >= 1")
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("potential matrix must be square")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def validate_potential(term, d, atol=DEFAULT_ATOL):
    """Return a list of human-readable invariant violations (empty = valid)."""
    report = []
    mat = term.matrix
    herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
    if herm_dev > atol:
        report.append(f"not Hermitian (max deviation {herm_dev:.3e})")
    expected = d**term.order
    if mat.shape[0] != expected:
        report.append(
            f"dimension mismatch (expected {d}^{term.order} = {expected}, got {mat.shape[0]})"
        )
        return report  # slot checks need the tensor shape
    if term.order >= 2:
        # invariance under adjacent transpositions implies the full group
        sym_dev = 0.0
        for s in range(term.order - 1):
            perm = list(range(term.order))
            perm[s], perm[s + 1] = perm[s + 1], perm[s]
            swapped = permute_slots(mat, d, term.order, perm)
            sym_dev = max(sym_dev, float(np.max(np.abs(swapped - mat))))
        if sym_dev > atol:
            report.append(f"not slot-permutation-symmetric (max deviation {sym_dev:.3e})")
    return report


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Single-particle dimension d, maximal interaction order, and the terms.

    ``terms`` maps the order m to its :class:`PotentialTerm`; orders may be
    absent (treated as zero).  Construction validates every term, so holding
    a spec means holding a physically valid model.
    """

    d: int
    max_order: int
    terms: dict

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("single-particle dimension must be >= 1")
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        terms = dict(self.terms)
        for m, term in sorted(terms.items()):
            if not isinstance(m, int) or m != term.order:
                raise ValueError(f"terms[{m}] holds a term of order {term.order}")
            if m > self.max_order:
                raise ValueError(f"terms[{m}] exceeds max_order {self.max_order}")
            violations = validate_potential(term, self.d)
            if violations:
                raise ValueError(f"order-{m} potential invalid: " + "; ".join(violations))
        object.__setattr__(self, "terms", terms)

    @property
    def present_orders(self):
        return tuple(sorted(self.terms))

    @property
    def interaction_orders(self):
        """Orders >= 2 that actually carry a term."""
        return tuple(m for m in sorted(self.terms) if m >= 2)


def _coefficient_l1(matrix):
    # matrix-unit coefficients of an operator are its entries
    return float(np.sum(np.abs(matrix)))


def _search_rng(seed, order, restart):
    # counter-based substream per (order, restart): adding restarts never
    # perturbs earlier ones, so the search result is monotone in restarts
    digest = hashlib.sha256(f"vtilde:{order}:{restart}".encode()).digest()
    word = int.from_bytes(digest[:8], "big")
    key = np.array([seed % _U64, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _haar_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r).copy()
    ph = ph / np.abs(ph)
    return q * ph.conj()


def _conjugated_l1(vmat, us):
    w = us[0]
    for u in us[1:]:
        w = np.kron(w, u)
    return _coefficient_l1(w.conj().T @ vmat @ w)


def _search_one_term(vmat, d, order, seed, restart, n_iters=60):
    rng = _search_rng(seed, order, restart)
    if restart == 0:
        us = [np.eye(d, dtype=np.complex128) for _ in range(order)]
    else:
        us = [_haar_unitary(rng, d) for _ in range(order)]
    best = _conjugated_l1(vmat, us)
    eps = 0.4
    stale = 0
    for it in range(n_iters):
        s = it % order
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (g + g.conj().T) / 2
        w, v = np.linalg.eigh(h)
        rot = (v * np.exp(1j * eps * w)) @ v.conj().T
        cand = list(us)
        cand[s] = us[s] @ rot
        val = _conjugated_l1(vmat, cand)
        if val > best:
            best, us, stale = val, cand, 0
        else:
            stale += 1
            if stale >= 2 * order:
                eps = max(eps * 0.5, 1e-3)
                stale = 0
    return best


def vtilde(spec, strategy="canonical", restarts=8, seed=0):
    """Largest coefficient-magnitude sum over interaction orders >= 2.

    strategy "canonical" decomposes each term in the matrix-unit product
    basis; "search" additionally maximizes over seeded random per-slot
    unitary conjugations with greedy local refinement.  A spec with no
    order >= 2 term gives 0.
    """
    if strategy not in ("canonical", "search"):
        raise ValueError(f"unknown vtilde strategy {strategy!r}")
    best = 0.0
    for m in spec.interaction_orders:
        vmat = spec.terms[m].matrix
        val = _coefficient_l1(vmat)
        if strategy == "search":
            for r in range(restarts):
                val = max(val, _search_one_term(vmat, spec.d, m, seed, r))
        best = max(best, val)
    return best


@dataclass(frozen=True)
class BoundConstants:
    """Scalar inputs of the bound evaluators.

    sum_l1_v = sum over orders l>=2 of l * ||V^(l)||, sum_l2_v likewise with
    l^2, vtilde the coefficient sum described above, and
    lambda_v = (16 vtilde + sum_l2_v) / sum_l1_v (0 when sum_l1_v is 0).
    """

    sum_l1_v: float
    sum_l2_v: float
    vtilde: float
    lambda_v: float
    m_max: int


def bound_constants(spec, vtilde_value):
    """Assemble the bound constants from a spec and a precomputed vtilde."""
    if vtilde_value < 0:
        raise ValueError("vtilde must be non-negative")
    s1 = 0.0
    s2 = 0.0
    for m in spec.interaction_orders:
        norm = operator_norm(spec.terms[m].matrix)
        s1 += m * norm
        s2 += m * m * norm
    lam = (16.0 * float(vtilde_value) + s2) / s1 if s1 > 0.0 else 0.0
    return BoundConstants(s1, s2, float(vtilde_value), lam, spec.max_order)
