"""Distance measures, the closed-form bound evaluators, and the telescoping
residual used to sanity-check RDM/mean-field consistency.

Conventions: trace distance is the unhalved trace norm of the difference
(range [0, 2]); every bound evaluator returns exactly 0 at t = 0 and is
non-decreasing in t and non-increasing in N.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._tensor import tensor_power


@dataclass(frozen=True, eq=False)
class BoundCurve:
    """A measured quantity and its bound over a common time grid."""

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        lhs = np.asarray(self.lhs, dtype=np.float64)
        rhs = np.asarray(self.rhs, dtype=np.float64)
        if not (t.shape == lhs.shape == rhs.shape):
            raise ValueError("times, lhs and rhs must have equal shapes")
        if np.any(rhs < 0):
            raise ValueError("rhs must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)


def trace_distance(rho, sigma):
    """Sum of singular values of rho - sigma (unhalved trace norm)."""
    if rho.order != sigma.order or rho.d != sigma.d:
        raise ValueError(
            f"mismatched density matrices: order {rho.order} (d={rho.d}) vs "
            f"order {sigma.order} (d={sigma.d})"
        )
    return float(np.linalg.svd(rho.matrix - sigma.matrix, compute_uv=False).sum())


def mean_field_error_bound(constants, n_particles, t):
    """Closed-form bound on the trace distance between the exact one-particle
    RDM and the mean-field evolution: (m_max^3/N) lambda_v (e^{4 s1 t} - 1)."""
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    if t < 0:
        raise ValueError("t must be non-negative")
    return (
        constants.m_max**3
        / n_particles
        * constants.lambda_v
        * math.expm1(4.0 * constants.sum_l1_v * t)
    )


def commutator_growth_bound(m, n, norm_a, norm_b, constants, n_particles, t):
    """Bound on ||[A, B(t)]|| for disjoint supports of sizes m and n:
    (4 m n |A| |B| / N) (e^{2 s1 t} - 1)."""
    _check_pair_args(m, n, norm_a, norm_b, n_particles, t)
    return 4.0 * m * n * norm_a * norm_b / n_particles * math.expm1(
        2.0 * constants.sum_l1_v * t
    )


def correlation_gap_bound(m, n, norm_a, norm_b, constants, n_particles, t):
    """Bound on the product-expectation gap |<AB> - <A><B>| for initially
    uncorrelated product states: (16 m n |A| |B| / N) (e^{4 s1 t} - 1)."""
    _check_pair_args(m, n, norm_a, norm_b, n_particles, t)
    return 16.0 * m * n * norm_a * norm_b / n_particles * math.expm1(
        4.0 * constants.sum_l1_v * t
    )


def _check_pair_args(m, n, norm_a, norm_b, n_particles, t):
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if norm_a < 0 or norm_b < 0:
        raise ValueError("observable norms must be non-negative")
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    if t < 0:
        raise ValueError("t must be non-negative")


def telescoping_residual(exact_rdms, hartree_gamma, m):
    """Max-entry residual of the order-(m+1) telescoping identity.

    ``exact_rdms`` maps the order l (0 .. m+1) to the corresponding RDM of
    one fixed state, order 0 being the scalar 1; ``hartree_gamma`` is any
    one-particle density matrix.  The identity rewrites
    gamma^(m+1) - g^(x (m+1)) as nearest-neighbour factorization defects
    plus one-particle defects, and holds exactly for any consistent family,
    so the residual is pure floating-point noise (<= ~1e-12 at desk scale).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    d = hartree_gamma.d
    if hartree_gamma.order != 1:
        raise ValueError("hartree_gamma must have order 1")
    a = {}
    for order in range(m + 2):
        if order not in exact_rdms:
            raise ValueError(f"missing exact RDM of order {order}")
        g = exact_rdms[order]
        if g.order != order or g.d != d:
            raise ValueError(
                f"exact_rdms[{order}] has order {g.order} (d={g.d}); expected {order} (d={d})"
            )
        a[order] = g.matrix
    g1 = a[1]
    mf = hartree_gamma.matrix
    lhs = a[m + 1] - tensor_power(mf, m + 1)
    rhs = np.zeros_like(lhs)
    for l in range(1, m + 1):
        rhs += np.kron(a[l + 1] - np.kron(a[l], g1), tensor_power(mf, m - l))
    for l in range(m + 1):
        rhs += np.kron(a[l], np.kron(g1 - mf, tensor_power(mf, m - l)))
    return float(np.max(np.abs(lhs - rhs)))
