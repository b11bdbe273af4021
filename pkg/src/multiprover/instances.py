"""Canonical small instances used in docs, demos, and bundled data files."""

from __future__ import annotations

import numpy as np

from .linalg import HermitianOperator, MultipartiteShape, PureState
from .separable import SeparableOperator


def symmetric_bell_state() -> PureState:
    """(|01> + |10>) / sqrt(2) on two qubits."""
    v = np.zeros(4, dtype=np.complex128)
    v[1] = v[2] = 1.0 / np.sqrt(2.0)
    return PureState(MultipartiteShape([2, 2]), v)


def entangled_accept_operator() -> HermitianOperator:
    """Rank-2 accept operator (|00><00| + |psi+><psi+|) / 2 on two qubits.

    Its product-state optimum is 1/2 (at |00>), strictly below the
    spectral norm 1/2 shared by an entangled eigenvector, which makes it
    the standard example separating entangled from product strategies.
    """
    e00 = np.zeros(4, dtype=np.complex128)
    e00[0] = 1.0
    bell = symmetric_bell_state().amplitudes
    m = 0.5 * np.outer(e00, e00.conj()) + 0.5 * np.outer(bell, bell.conj())
    return HermitianOperator(MultipartiteShape([2, 2]), m)


def entangled_accept_as_single_party() -> SeparableOperator:
    """The same operator wrapped as a 1-party instance (PSD = separable)."""
    c = entangled_accept_operator()
    return SeparableOperator(
        MultipartiteShape([4]),
        [(HermitianOperator(MultipartiteShape([4]), c.entries),)],
    )


def classical_correlated_accept() -> SeparableOperator:
    """(|00><00| + |11><11|) / 2 as an explicitly separable 2-party operator."""
    shape1 = MultipartiteShape([2])
    p0 = HermitianOperator(shape1, np.diag([1.0, 0.0]).astype(np.complex128))
    p1 = HermitianOperator(shape1, np.diag([0.0, 1.0]).astype(np.complex128))
    half0 = HermitianOperator(shape1, 0.5 * p0.entries)
    half1 = HermitianOperator(shape1, 0.5 * p1.entries)
    return SeparableOperator(MultipartiteShape([2, 2]), [(half0, p0), (half1, p1)])
