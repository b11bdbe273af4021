"""Monte Carlo verification of a resource-bounded multi-prover protocol.

The simulated protocol replaces m unentangled provers answering one round
of POVM measurements by a single message per prover:

* a classical register x_j claiming the outcome distribution of prover
  j's designated POVM, sent as exact fixed-point numbers with denominator
  2**alpha;
* k copies of prover j's proof state.

The verifier, given parameters (p, k, q, alpha):

* step 3: checks each claimed distribution sums to exactly 1 in
  fixed-point arithmetic;
* step 4: picks one (prover, outcome) pair uniformly at random, measures
  all k copies of that prover's proof, and rejects when the empirical
  frequency deviates from the claim by 1/p or more;
* step 5: runs the downstream classical acceptance stage q times on
  outcome tuples drawn from the claimed distributions and accepts on a
  strict majority.

Honest senders fail with probability at most
``2 exp(-5 p / 4) + 2 exp(-0.02 q)``; a sender whose claimed
distribution strays by at least ``1/(10 m r)`` anywhere is accepted with
probability at most ``1 - 1/(40 m^2 r^2)``. Both bounds are exposed as
functions so experiments can compare against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from .linalg import HermitianOperator, hs_inner
from .separable import is_povm
from .rand import default_rng

STAGE2_TABLE_CAP = 10 ** 6
INT64_MAX = 2 ** 63 - 1
DENSITY_TOL = 1e-10


class TableCapacityError(RuntimeError):
    """The classical acceptance table r**m would exceed the storage cap."""


@dataclass(frozen=True)
class ProtocolParams:
    """Verifier resources: frequency slack 1/p, copies k, runs q, bits alpha."""

    p: int
    k: int
    q: int
    alpha: int

    def __post_init__(self):
        for name in ("p", "k", "q", "alpha"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")


def derive_params(n: int, m: int, r: int) -> ProtocolParams:
    """Standard parameter schedule: p = 20 m r, k = 5 p^3, q = 50 n, alpha = 20 n m r."""
    if min(n, m, r) < 1:
        raise ValueError("n, m, r must all be positive")
    p = 20 * m * r
    k = 5 * p ** 3
    if k > INT64_MAX:
        raise OverflowError(f"copy count k = {k} exceeds the 63-bit sampling limit")
    return ProtocolParams(p=p, k=k, q=50 * n, alpha=20 * n * m * r)


@dataclass(frozen=True)
class Stage2Acceptor:
    """Classical acceptance table over outcome tuples in [r]^m.

    Entries are acceptance probabilities in [0, 1]; a deterministic
    predicate is the 0/1 special case.
    """

    table: np.ndarray

    def __init__(self, table):
        t = np.asarray(table, dtype=np.float64)
        if t.size > STAGE2_TABLE_CAP:
            raise TableCapacityError(
                f"acceptance table with {t.size} entries exceeds cap {STAGE2_TABLE_CAP}"
            )
        if t.min() < 0.0 or t.max() > 1.0:
            raise ValueError("acceptance probabilities must lie in [0, 1]")
        t = np.ascontiguousarray(t)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def accept_all(cls, m: int, r: int) -> "Stage2Acceptor":
        cls._check_cap(m, r)
        return cls(np.ones((r,) * m))

    @classmethod
    def reject_all(cls, m: int, r: int) -> "Stage2Acceptor":
        cls._check_cap(m, r)
        return cls(np.zeros((r,) * m))

    @classmethod
    def from_function(cls, fn: Callable[[tuple[int, ...]], float], m: int, r: int) -> "Stage2Acceptor":
        cls._check_cap(m, r)
        t = np.zeros((r,) * m)
        for idx in np.ndindex(*t.shape):
            t[idx] = fn(idx)
        return cls(t)

    @staticmethod
    def _check_cap(m: int, r: int) -> None:
        if r ** m > STAGE2_TABLE_CAP:
            raise TableCapacityError(
                f"acceptance table with {r ** m} entries exceeds cap {STAGE2_TABLE_CAP}"
            )

    def accept_probability(self, outcomes: Sequence[int]) -> float:
        return float(self.table[tuple(int(i) for i in outcomes)])


@dataclass(frozen=True)
class BellProtocol:
    """One-round unentangled-prover protocol: POVMs plus a classical stage."""

    n: int
    m: int
    r: int
    povms: tuple[tuple[HermitianOperator, ...], ...]
    stage2: Stage2Acceptor

    def __init__(self, n, m, r, povms, stage2):
        if min(n, m, r) < 1:
            raise ValueError("n, m, r must all be positive")
        povms = tuple(tuple(p) for p in povms)
        if len(povms) != m:
            raise ValueError(f"{len(povms)} POVMs for {m} provers")
        for j, povm in enumerate(povms):
            if len(povm) != r:
                raise ValueError(f"prover {j} POVM has {len(povm)} outcomes, expected {r}")
            if not is_povm(povm):
                raise ValueError(f"prover {j} effects do not form a POVM")
        if stage2.table.shape != (r,) * m:
            raise ValueError(
                f"stage-2 table shape {stage2.table.shape} does not match ({r},)*{m}"
            )
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "povms", povms)
        object.__setattr__(self, "stage2", stage2)

    @property
    def local_dims(self) -> tuple[int, ...]:
        return tuple(p[0].dim for p in self.povms)

    def params(self) -> ProtocolParams:
        return derive_params(self.n, self.m, self.r)


def _check_density(rho: HermitianOperator, what: str) -> None:
    lo = rho.min_eigenvalue()
    if lo < -DENSITY_TOL:
        raise ValueError(f"{what} is not PSD: min eigenvalue {lo:.3e}")
    if abs(rho.trace() - 1.0) > DENSITY_TOL:
        raise ValueError(f"{what} does not have unit trace")


@dataclass(frozen=True)
class IidProofModel:
    """All k copies are the same density operator."""

    rho: HermitianOperator

    def __post_init__(self):
        _check_density(self.rho, "proof state")


@dataclass(frozen=True)
class ExplicitProofModel:
    """Copy l is states[l]; the copies need not be identical."""

    states: tuple[HermitianOperator, ...]

    def __init__(self, states):
        states = tuple(states)
        if not states:
            raise ValueError("need at least one copy")
        for s in states:
            _check_density(s, "proof copy")
        object.__setattr__(self, "states", states)


ProofModel = Union[IidProofModel, ExplicitProofModel]


@dataclass(frozen=True)
class MerlinMessage:
    """Per-prover claimed distributions (exact fixed point) plus proof models.

    ``x_register[j][i]`` is an integer numerator over 2**alpha. Honest
    messages sum to exactly 2**alpha per prover; the constructor does not
    enforce that, since checking it is the verifier's job (step 3).
    """

    alpha: int
    x_register: tuple[tuple[int, ...], ...]
    y_register: tuple[ProofModel, ...]

    def __init__(self, alpha, x_register, y_register):
        alpha = int(alpha)
        if alpha < 1:
            raise ValueError("alpha must be positive")
        xs = tuple(tuple(int(c) for c in row) for row in x_register)
        for j, row in enumerate(xs):
            if any(c < 0 for c in row):
                raise ValueError(f"prover {j} claim has negative numerators")
        ys = tuple(y_register)
        if len(xs) != len(ys):
            raise ValueError("x and y registers must cover the same provers")
        for y in ys:
            if not isinstance(y, (IidProofModel, ExplicitProofModel)):
                raise TypeError(f"unsupported proof model {type(y).__name__}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "x_register", xs)
        object.__setattr__(self, "y_register", ys)


@dataclass(frozen=True)
class VerificationOutcome:
    accepted: bool
    rejection_stage: str | None
    step4_pick: tuple[int, int] | None
    step4_count: int | None


# -- fixed-point arithmetic ---------------------------------------------------


def fixed_point_distribution(probs: Sequence[float], alpha: int) -> tuple[int, ...]:
    """Exact fixed-point rendering of a probability vector.

    The floats are renormalized as exact rationals, truncated to alpha
    fractional bits, and topped up by largest remainder so the numerators
    sum to exactly 2**alpha. Each entry moves by less than 2**-alpha
    relative to the renormalized input.
    """
    scale = 1 << int(alpha)
    vals = [Fraction(max(float(x), 0.0)) for x in probs]
    total = sum(vals)
    if total == 0:
        raise ValueError("cannot encode the zero vector as a distribution")
    vals = [v / total for v in vals]
    scaled = [v * scale for v in vals]
    floors = [int(s) for s in scaled]  # Fractions are nonnegative: int() floors
    remainders = [s - f for s, f in zip(scaled, floors)]
    deficit = scale - sum(floors)
    # Largest remainder; ties broken toward lower index for determinism.
    order = sorted(range(len(vals)), key=lambda i: (-remainders[i], i))
    for i in order[:deficit]:
        floors[i] += 1
    return tuple(floors)


def _sample_fixed_point(weights: Sequence[int], alpha: int, rng: np.random.Generator) -> int:
    # Exact inverse-CDF draw: a uniform alpha-bit integer against the
    # cumulative numerators.
    nbytes = (alpha + 7) // 8
    u = int.from_bytes(rng.bytes(nbytes), "big") >> (nbytes * 8 - alpha)
    acc = 0
    for idx, w in enumerate(weights):
        acc += w
        if u < acc:
            return idx
    return len(weights) - 1


# -- message construction -----------------------------------------------------


def stage1_distribution(protocol: BellProtocol, j: int, rho: HermitianOperator) -> np.ndarray:
    """Outcome distribution of prover j's POVM on the state rho."""
    povm = protocol.povms[j]
    probs = np.array([hs_inner(e, rho) for e in povm])
    return probs


def honest_message(
    protocol: BellProtocol,
    proofs: Sequence[HermitianOperator],
    params: ProtocolParams,
) -> MerlinMessage:
    """Claims the true POVM distributions; sends k IID copies of each proof."""
    if len(proofs) != protocol.m:
        raise ValueError(f"{len(proofs)} proofs for {protocol.m} provers")
    xs = []
    ys = []
    for j, rho in enumerate(proofs):
        probs = stage1_distribution(protocol, j, rho)
        xs.append(fixed_point_distribution(probs, params.alpha))
        ys.append(IidProofModel(rho))
    return MerlinMessage(alpha=params.alpha, x_register=tuple(xs), y_register=tuple(ys))


def message_from_distributions(
    claimed: Sequence[Sequence[float]],
    proofs: Sequence[HermitianOperator],
    params: ProtocolParams,
) -> MerlinMessage:
    """A (possibly lying) message: claim ``claimed`` but hold ``proofs``."""
    xs = tuple(fixed_point_distribution(row, params.alpha) for row in claimed)
    ys = tuple(IidProofModel(rho) for rho in proofs)
    if len(xs) != len(ys):
        raise ValueError("claimed rows and proofs must cover the same provers")
    return MerlinMessage(alpha=params.alpha, x_register=xs, y_register=ys)


def alternating_message(
    protocol: BellProtocol,
    proofs: Sequence[HermitianOperator],
    params: ProtocolParams,
) -> MerlinMessage:
    """Non-IID copies: cycle through each proof's eigenstates in proportion.

    The k copies of prover j enumerate the eigenvectors of the proof, with
    multiplicities k * eigenvalue (largest remainder). The claim is the
    POVM distribution of the realized empirical mixture, so expectations
    match step 4 exactly even though individual copies differ.
    """
    if len(proofs) != protocol.m:
        raise ValueError(f"{len(proofs)} proofs for {protocol.m} provers")
    xs = []
    ys = []
    for j, rho in enumerate(proofs):
        w, v = np.linalg.eigh(rho.entries)
        w = np.clip(w, 0.0, None)
        counts = _apportion(w / w.sum(), params.k)
        copies = []
        mix = np.zeros_like(rho.entries)
        for lam_count, col in zip(counts, v.T):
            if lam_count == 0:
                continue
            proj = np.outer(col, col.conj())
            copies.extend([HermitianOperator(rho.shape, proj)] * lam_count)
            mix += (lam_count / params.k) * proj
        ys.append(ExplicitProofModel(copies))
        probs = stage1_distribution(protocol, j, HermitianOperator(rho.shape, mix))
        xs.append(fixed_point_distribution(probs, params.alpha))
    return MerlinMessage(alpha=params.alpha, x_register=tuple(xs), y_register=tuple(ys))


def _apportion(weights: np.ndarray, k: int) -> list[int]:
    # Integer apportionment of k slots proportional to weights.
    exact = [Fraction(float(x)) * k for x in weights]
    total = sum(exact)
    exact = [e * k / total if total != k else e for e in exact]
    floors = [int(e) for e in exact]
    rem = [e - f for e, f in zip(exact, floors)]
    order = sorted(range(len(floors)), key=lambda i: (-rem[i], i))
    for i in order[: k - sum(floors)]:
        floors[i] += 1
    return floors


def effective_single_copy_state(message: MerlinMessage, j: int) -> HermitianOperator:
    """Average state of one copy of prover j's proof."""
    y = message.y_register[j]
    if isinstance(y, IidProofModel):
        return y.rho
    acc = sum(s.entries for s in y.states) / len(y.states)
    return HermitianOperator(y.states[0].shape, acc)


# -- verification -------------------------------------------------------------


def sample_outcome_counts(
    protocol: BellProtocol,
    message: MerlinMessage,
    j: int,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Measure k copies of prover j's proof; returns counts per outcome."""
    y = message.y_register[j]
    if isinstance(y, IidProofModel):
        probs = stage1_distribution(protocol, j, y.rho)
        probs = np.clip(probs, 0.0, None)
        return rng.multinomial(k, probs / probs.sum())
    if len(y.states) != k:
        raise ValueError(f"explicit model holds {len(y.states)} copies, expected {k}")
    counts = np.zeros(protocol.r, dtype=np.int64)
    # Group identical copies so the per-copy loop stays short.
    by_id: dict[int, tuple[HermitianOperator, int]] = {}
    for s in y.states:
        key = id(s.entries)
        if key in by_id:
            by_id[key] = (s, by_id[key][1] + 1)
        else:
            by_id[key] = (s, 1)
    for s, mult in by_id.values():
        probs = stage1_distribution(protocol, j, s)
        probs = np.clip(probs, 0.0, None)
        counts += rng.multinomial(mult, probs / probs.sum())
    return counts


def _step4_count(protocol, message, params, j, i, rng) -> int:
    y = message.y_register[j]
    if isinstance(y, IidProofModel):
        probs = stage1_distribution(protocol, j, y.rho)
        prob = float(np.clip(probs, 0.0, 1.0)[i] / max(np.clip(probs, 0.0, None).sum(), 1.0))
        return int(rng.binomial(params.k, min(prob, 1.0)))
    if len(y.states) != params.k:
        raise ValueError(
            f"explicit model holds {len(y.states)} copies, expected {params.k}"
        )
    n = 0
    by_id: dict[int, tuple[HermitianOperator, int]] = {}
    for s in y.states:
        key = id(s.entries)
        if key in by_id:
            by_id[key] = (s, by_id[key][1] + 1)
        else:
            by_id[key] = (s, 1)
    for s, mult in by_id.values():
        probs = np.clip(stage1_distribution(protocol, j, s), 0.0, None)
        prob = min(float(probs[i] / max(probs.sum(), 1.0)), 1.0)
        n += int(rng.binomial(mult, prob))
    return n


def step4_frequency_test(n: int, claim_numerator: int, params: ProtocolParams) -> bool:
    """True when the empirical count is consistent with the claim.

    Exact integer form of |n/k - c/2**alpha| < 1/p:
    |n * 2**alpha - c * k| * p < k * 2**alpha.
    """
    scale = 1 << params.alpha
    return abs(n * scale - claim_numerator * params.k) * params.p < params.k * scale


def arthur_verify(
    protocol: BellProtocol,
    message: MerlinMessage,
    params: ProtocolParams,
    rng=None,
) -> VerificationOutcome:
    """One full verification; see the module docstring for the three steps."""
    rng = default_rng(rng)
    m, r = protocol.m, protocol.r
    if len(message.x_register) != m:
        raise ValueError(f"message covers {len(message.x_register)} provers, expected {m}")
    if message.alpha != params.alpha:
        raise ValueError(
            f"message uses alpha = {message.alpha}, verifier expects {params.alpha}"
        )
    for row in message.x_register:
        if len(row) != r:
            raise ValueError(f"claim row of length {len(row)}, expected {r}")

    # Step 3: exact fixed-point sum check.
    scale = 1 << params.alpha
    for row in message.x_register:
        if sum(row) != scale:
            return VerificationOutcome(False, "step3", None, None)

    # Step 4: one uniformly random frequency test.
    j = int(rng.integers(m))
    i = int(rng.integers(r))
    n = _step4_count(protocol, message, params, j, i, rng)
    if not step4_frequency_test(n, message.x_register[j][i], params):
        return VerificationOutcome(False, "step4", (j, i), n)

    # Step 5: majority over q simulated runs of the classical stage.
    accepting = 0
    for _ in range(params.q):
        outcome = tuple(
            _sample_fixed_point(message.x_register[jj], params.alpha, rng)
            for jj in range(m)
        )
        pr = protocol.stage2.accept_probability(outcome)
        if pr >= 1.0 or (pr > 0.0 and rng.random() < pr):
            accepting += 1
    if 2 * accepting <= params.q:
        return VerificationOutcome(False, "step5", (j, i), n)
    return VerificationOutcome(True, None, (j, i), n)


_Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    z2 = _Z95 ** 2
    phat = successes / trials
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = (
        _Z95
        * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4 * trials ** 2))
        / denom
    )
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_acceptance(
    protocol: BellProtocol,
    merlin,
    params: ProtocolParams,
    trials: int,
    rng=None,
    *,
    collect: bool = False,
) -> dict:
    """Acceptance frequency over independent verifications.

    ``merlin`` is either a fixed MerlinMessage or a callable
    ``merlin(rng) -> MerlinMessage`` drawn fresh per trial. Returns
    ``{"mean", "ci95", "accepted", "trials"}`` where ci95 is the Wilson
    interval; with ``collect=True`` the per-trial outcomes are included.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = default_rng(rng)
    outcomes = []
    accepted = 0
    for child in rng.spawn(trials):
        message = merlin(child) if callable(merlin) else merlin
        out = arthur_verify(protocol, message, params, child)
        accepted += bool(out.accepted)
        if collect:
            outcomes.append(out)
    lo, hi = wilson_interval(accepted, trials)
    result = {
        "mean": accepted / trials,
        "ci95": (lo, hi),
        "accepted": accepted,
        "trials": trials,
    }
    if collect:
        result["outcomes"] = outcomes
    return result


# -- serialization ------------------------------------------------------------
#
# {"n", "m", "r", "povms": [[operator doc, ...], ...],
#  "stage2": {"kind": "accept_all" | "reject_all" | "table", "table": nested},
#  "proofs": [operator doc, ...]}  (proofs optional; default maximally mixed)


def protocol_to_dict(protocol: BellProtocol, proofs=None) -> dict:
    from .linalg import operator_to_dict

    stage2_table = protocol.stage2.table
    if np.all(stage2_table == 1.0):
        stage2 = {"kind": "accept_all"}
    elif np.all(stage2_table == 0.0):
        stage2 = {"kind": "reject_all"}
    else:
        stage2 = {"kind": "table", "table": stage2_table.tolist()}
    doc = {
        "n": protocol.n,
        "m": protocol.m,
        "r": protocol.r,
        "povms": [[operator_to_dict(e) for e in povm] for povm in protocol.povms],
        "stage2": stage2,
    }
    if proofs is not None:
        doc["proofs"] = [operator_to_dict(rho) for rho in proofs]
    return doc


def protocol_from_dict(doc: dict) -> tuple[BellProtocol, list[HermitianOperator]]:
    """Parse a protocol document; returns (protocol, proofs).

    Absent proofs default to the maximally mixed state per prover.
    """
    from .linalg import MultipartiteShape, operator_from_dict

    try:
        n, m, r = int(doc["n"]), int(doc["m"]), int(doc["r"])
        povms = tuple(
            tuple(operator_from_dict(e) for e in povm) for povm in doc["povms"]
        )
        stage2_doc = doc.get("stage2", {"kind": "accept_all"})
        kind = stage2_doc["kind"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed protocol document: {exc}") from exc
    if kind == "accept_all":
        stage2 = Stage2Acceptor.accept_all(m, r)
    elif kind == "reject_all":
        stage2 = Stage2Acceptor.reject_all(m, r)
    elif kind == "table":
        stage2 = Stage2Acceptor(np.asarray(stage2_doc["table"], dtype=np.float64))
    else:
        raise ValueError(f"unknown stage2 kind {kind!r}")
    protocol = BellProtocol(n, m, r, povms, stage2)
    if "proofs" in doc:
        proofs = [operator_from_dict(p) for p in doc["proofs"]]
    else:
        proofs = [
            HermitianOperator(MultipartiteShape([d]), np.eye(d, dtype=complex) / d)
            for d in protocol.local_dims
        ]
    if len(proofs) != m:
        raise ValueError(f"{len(proofs)} proofs for {m} provers")
    return protocol, proofs


# -- reference bounds ---------------------------------------------------------


def completeness_error_bound(params: ProtocolParams) -> float:
    """Upper bound on the rejection probability of an honest message."""
    return 2.0 * math.exp(-5.0 * params.p / 4.0) + 2.0 * math.exp(-0.02 * params.q)


def soundness_bound(m: int, r: int) -> float:
    """Upper bound on acceptance when a claim strays by >= 1/(10 m r)."""
    return 1.0 - 1.0 / (40.0 * m ** 2 * r ** 2)


def deviation_threshold(m: int, r: int) -> float:
    """Claim deviation that the soundness bound is calibrated against."""
    return 1.0 / (10.0 * m * r)
