"""The frequency test catches claims that deviate from the proofs.

A lying Merlin claims a distribution shifted by the deviation threshold
1/(10 m r) on one prover while holding honest maximally mixed proofs.
Whenever Arthur's single spot check lands on a shifted outcome, the exact
integer test |n 2**alpha - c k| p < k 2**alpha fails with overwhelming
probability, because the empirical frequency n/k concentrates within
1/p of the true value, which is at least 2/p away from the claim.
"""

import numpy as np

from multiprover import (
    BellProtocol,
    HermitianOperator,
    ProtocolParams,
    Stage2Acceptor,
    basis_state,
    deviation_threshold,
    estimate_acceptance,
    message_from_distributions,
    soundness_bound,
)


def main():
    m, r = 2, 3
    povm = [basis_state([3], i).projector() for i in range(3)]
    protocol = BellProtocol(1, m, r, [povm] * m, Stage2Acceptor.accept_all(m, r))
    mixed = HermitianOperator([3], np.eye(3) / 3.0)

    p = 20 * m * r
    params = ProtocolParams(p=p, k=5 * p ** 3, q=50, alpha=120)
    thresh = deviation_threshold(m, r)
    print(f"deviation threshold 1/(10 m r) = {thresh:.5f}, tolerance 1/p = {1 / p:.5f}")

    third = 1.0 / 3.0
    claims = [
        [third + 2 * thresh, third - thresh, third - thresh],  # prover 0 lies
        [third, third, third],                                 # prover 1 honest
    ]
    message = message_from_distributions(claims, [mixed, mixed], params)

    res = estimate_acceptance(protocol, message, params, trials=4000, rng=11, collect=True)
    print(f"\nunconditional acceptance: {res['mean']:.4f}"
          f"  (soundness bound {soundness_bound(m, r):.5f})")

    by_pick: dict[tuple[int, int], list[int]] = {}
    for out in res["outcomes"]:
        if out.step4_pick is not None:
            by_pick.setdefault(out.step4_pick, []).append(
                1 if out.rejection_stage == "step4" else 0
            )
    print("\nstep-4 rejection rate by spot-checked (prover, outcome):")
    for pick in sorted(by_pick):
        rows = by_pick[pick]
        print(f"  (j, i) = {pick}: {sum(rows) / len(rows):.3f}  over {len(rows)} picks")
    print("\nevery outcome of prover 0 deviates by at least the threshold,")
    print("so any pick on prover 0 rejects; prover 1 is honest and passes.")


if __name__ == "__main__":
    main()
