"""Completeness of the three-step verification protocol, at reduced scale.

An honest Merlin sends k copies of each proof and claims the exact
measurement statistics in alpha-bit fixed point. Arthur checks that the
claims sum to one (step 3), spot-checks one empirical frequency against
its claim (step 4), and simulates the classical stage 2 from the claimed
distributions (step 5). With an all-accepting stage 2 the honest prover
should essentially never be rejected.

The full-scale parameters make k astronomically large; this demo scales p
down, which only widens the frequency tolerance 1/p.
"""

import numpy as np

from multiprover import (
    BellProtocol,
    HermitianOperator,
    ProtocolParams,
    Stage2Acceptor,
    basis_state,
    completeness_error_bound,
    derive_params,
    estimate_acceptance,
    honest_message,
)


def main():
    povm = [basis_state([3], i).projector() for i in range(3)]
    protocol = BellProtocol(1, 2, 3, [povm, povm], Stage2Acceptor.accept_all(2, 3))
    mixed = HermitianOperator([3], np.eye(3) / 3.0)

    full = derive_params(protocol.n, protocol.m, protocol.r)
    print("full-scale parameters:  ", full)
    print("completeness error bound:", f"{completeness_error_bound(full):.3e}")

    params = ProtocolParams(p=20, k=5 * 20 ** 3, q=50, alpha=120)
    print("\nscaled-down parameters: ", params)

    message = honest_message(protocol, [mixed, mixed], params)
    print("claimed numerators (prover 0):", message.x_register[0])
    print("claim sums to 2**alpha:", sum(message.x_register[0]) == 1 << params.alpha)

    res = estimate_acceptance(protocol, message, params, trials=1000, rng=7)
    lo, hi = res["ci95"]
    print(f"\nacceptance over {res['trials']} trials: {res['mean']:.4f}"
          f"  (95% CI [{lo:.4f}, {hi:.4f}])")


if __name__ == "__main__":
    main()
