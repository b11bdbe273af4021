"""Pairing of two multi-prover instances and perfect-repetition certificates.

Running two accept operators C1 (on X_1 ... X_m) and C2 (on Y_1 ... Y_m) in
parallel gives the operator C1 (x) C2 with prover j holding the pair
(X_j, Y_j). The pairing permutation regroups X_1...X_m Y_1...Y_m into
(X_1 Y_1) ... (X_m Y_m) so that the joint operator is again an m-party
object. For separable accept operators the product-state optimum
multiplies; the certificate plays both sides:

* primal: optimized product values v1, v2 and paired value v;
* dual: the witness t1 t2 * I - C1 (x) C2 splits into two manifestly
  dual-feasible summands, and its minimum over sampled product states
  certifies (numerically) that no paired product strategy beats t1 t2.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .linalg import (
    DIM_CAP,
    CapacityError,
    HermitianOperator,
    MultipartiteShape,
    identity,
    permute_subsystems,
)
from .optimize import OptimizationResult, ProductState, seesaw_max
from .separable import (
    COUNTEREXAMPLE_TOL,
    EVIDENCE_TOL,
    DualWitnessCandidate,
    SeparableOperator,
    WitnessEvidence,
    densify,
    witness_evidence,
)
from .rand import default_rng


class PartyCountError(ValueError):
    """The two instances do not have the same number of provers."""


@dataclass(frozen=True)
class RepetitionInstance:
    c1: SeparableOperator
    c2: SeparableOperator
    paired_operator: HermitianOperator
    permutation: tuple[int, ...]


@dataclass(frozen=True)
class DualSolution:
    """Feasible value t with witness W = t * I - C (exact by construction)."""

    t: float
    witness: HermitianOperator


@dataclass(frozen=True)
class RepetitionReport:
    v1: float
    v2: float
    v: float
    t1t2: float
    witness_min: float
    verdict: str
    witness_state: ProductState

    def to_dict(self) -> dict:
        return {
            "v1": self.v1,
            "v2": self.v2,
            "v": self.v,
            "t1t2": self.t1t2,
            "witness_min": self.witness_min,
            "verdict": self.verdict,
        }


def _interleave_permutation(m: int) -> tuple[int, ...]:
    out = []
    for j in range(m):
        out.extend((j, m + j))
    return tuple(out)


def pair_instance(
    c1: SeparableOperator, c2: SeparableOperator, *, max_dim: int = DIM_CAP
) -> RepetitionInstance:
    """Tensor two instances and regroup so prover j holds (X_j, Y_j)."""
    m = c1.shape.parties
    if c2.shape.parties != m:
        raise PartyCountError(
            f"cannot pair a {m}-party instance with a "
            f"{c2.shape.parties}-party instance"
        )
    merged = tuple(x * y for x, y in zip(c1.shape.dims, c2.shape.dims))
    if prod(merged) > max_dim:
        raise CapacityError(
            f"paired dimension {prod(merged)} exceeds cap {max_dim}"
        )
    d1 = densify(c1, max_dim=max_dim)
    d2 = densify(c2, max_dim=max_dim)
    joint = HermitianOperator(
        MultipartiteShape(c1.shape.dims + c2.shape.dims),
        np.kron(d1.entries, d2.entries),
    )
    perm = _interleave_permutation(m)
    permuted = permute_subsystems(joint, perm)
    paired = HermitianOperator(MultipartiteShape(merged), permuted.entries)
    return RepetitionInstance(c1=c1, c2=c2, paired_operator=paired, permutation=perm)


def pair_separable(c1: SeparableOperator, c2: SeparableOperator) -> SeparableOperator:
    """Factored form of the paired operator; stays inside the separable cone."""
    m = c1.shape.parties
    if c2.shape.parties != m:
        raise PartyCountError(
            f"cannot pair a {m}-party instance with a "
            f"{c2.shape.parties}-party instance"
        )
    merged = tuple(x * y for x, y in zip(c1.shape.dims, c2.shape.dims))
    terms = []
    for p in c1.terms:
        for q in c2.terms:
            terms.append(
                tuple(
                    HermitianOperator(
                        MultipartiteShape([dx * dy]),
                        np.kron(pf.entries, qf.entries),
                    )
                    for pf, qf, dx, dy in zip(p, q, c1.shape.dims, c2.shape.dims)
                )
            )
    return SeparableOperator(MultipartiteShape(merged), terms)


def dual_from_primal(c: SeparableOperator, t: float, *, max_dim: int = DIM_CAP) -> DualSolution:
    """Witness t * I - C for a claimed bound t on the product-state optimum."""
    dense = densify(c, max_dim=max_dim)
    w = HermitianOperator(c.shape, float(t) * np.eye(c.shape.total) - dense.entries)
    return DualSolution(t=float(t), witness=w)


def repetition_witness(
    c1: SeparableOperator,
    t1: float,
    c2: SeparableOperator,
    t2: float,
    *,
    max_dim: int = DIM_CAP,
) -> DualSolution:
    """Dual witness t1 t2 * I - C1 (x) C2 on the paired instance."""
    inst = pair_instance(c1, c2, max_dim=max_dim)
    shape = inst.paired_operator.shape
    w = HermitianOperator(
        shape,
        float(t1) * float(t2) * np.eye(shape.total) - inst.paired_operator.entries,
    )
    return DualSolution(t=float(t1) * float(t2), witness=w)


def witness_summands(
    c1: SeparableOperator,
    t1: float,
    c2: SeparableOperator,
    t2: float,
    *,
    max_dim: int = DIM_CAP,
) -> tuple[DualWitnessCandidate, DualWitnessCandidate]:
    """The two dual-feasible halves whose mean is the repetition witness.

    (t1 I - C1) (x) (t2 I + C2) and (t1 I + C1) (x) (t2 I - C2): each is a
    product of an operator nonnegative on product states with a PSD one,
    so each lies in the dual separable cone whenever t1, t2 are valid
    bounds; their mean equals t1 t2 * I - C1 (x) C2 exactly.
    """
    m = c1.shape.parties
    if c2.shape.parties != m:
        raise PartyCountError(
            f"cannot pair a {m}-party instance with a "
            f"{c2.shape.parties}-party instance"
        )
    d1 = densify(c1, max_dim=max_dim)
    d2 = densify(c2, max_dim=max_dim)
    i1 = identity(c1.shape)
    i2 = identity(c2.shape)
    merged = tuple(x * y for x, y in zip(c1.shape.dims, c2.shape.dims))
    perm = _interleave_permutation(m)

    def paired(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
        joint = HermitianOperator(
            MultipartiteShape(c1.shape.dims + c2.shape.dims),
            np.kron(a.entries, b.entries),
        )
        return HermitianOperator(
            MultipartiteShape(merged), permute_subsystems(joint, perm).entries
        )

    first = paired(float(t1) * i1 - d1, float(t2) * i2 + d2)
    second = paired(float(t1) * i1 + d1, float(t2) * i2 - d2)
    return (
        DualWitnessCandidate(first, label="(t1 I - C1) x (t2 I + C2)"),
        DualWitnessCandidate(second, label="(t1 I + C1) x (t2 I - C2)"),
    )


def verify_perfect_repetition(
    c1: SeparableOperator,
    c2: SeparableOperator,
    tol: float = 1e-3,
    *,
    rng=None,
    restarts: int = 16,
    samples: int = 20_000,
    max_dim: int = DIM_CAP,
) -> RepetitionReport:
    """Certify opt(C1 paired C2) = opt(C1) * opt(C2) numerically.

    The paired optimization is warm-started with the product of the two
    single-instance optimizers, so v >= v1 v2 up to roundoff always holds;
    the dual witness at t1 t2 = v1 v2 rules out paired product states
    above that value. Verdicts:

    * ``perfect``: |v - v1 v2| <= tol and the witness minimum is not
      meaningfully negative;
    * ``violated``: hard numerical evidence against perfect repetition (a
      paired product state beating v1 v2 beyond counterexample tolerance);
    * ``inconclusive``: neither, e.g. optimization failed to close the gap.
    """
    rng = default_rng(rng)
    r_pair = pair_instance(c1, c2, max_dim=max_dim)
    ch = rng.spawn(4)

    r1: OptimizationResult = seesaw_max(densify(c1), restarts=restarts, rng=ch[0])
    r2: OptimizationResult = seesaw_max(densify(c2), restarts=restarts, rng=ch[1])
    warm = ProductState(
        r_pair.paired_operator.shape,
        [np.kron(a, b) for a, b in zip(r1.state.locals, r2.state.locals)],
    )
    rp = seesaw_max(
        r_pair.paired_operator,
        restarts=restarts,
        rng=ch[2],
        initial_states=[warm],
    )

    v1, v2, v = r1.value, r2.value, rp.value
    t1t2 = v1 * v2
    dual = repetition_witness(c1, v1, c2, v2, max_dim=max_dim)
    ev: WitnessEvidence = witness_evidence(dual.witness, samples=samples, rng=ch[3])

    gap_ok = abs(v - t1t2) <= tol
    if v > t1t2 + COUNTEREXAMPLE_TOL or ev.min_value < -COUNTEREXAMPLE_TOL:
        verdict = "violated"
    elif gap_ok and ev.min_value >= -EVIDENCE_TOL:
        verdict = "perfect"
    else:
        verdict = "inconclusive"
    return RepetitionReport(
        v1=v1,
        v2=v2,
        v=v,
        t1t2=t1t2,
        witness_min=ev.min_value,
        verdict=verdict,
        witness_state=ev.state,
    )
