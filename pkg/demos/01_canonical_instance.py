"""The canonical two-qubit accept operator and its product-state optimum.

C = 1/2 |00><00| + 1/2 |Psi+><Psi+| accepts the product state |00> with
probability 1/2, and no product state does better. Tensor powers of the
instance multiply the optimum: opt(C^(x k)) = 2**-k.
"""

import numpy as np

from multiprover import (
    densify,
    entangled_accept_as_single_party,
    entangled_accept_operator,
    pair_separable,
    seesaw_max,
)


def main():
    c = entangled_accept_operator()
    print("accept operator C on two qubits:")
    print(np.round(c.entries.real, 4))
    print("eigenvalues:", np.round(np.linalg.eigvalsh(c.entries), 10))

    res = seesaw_max(c, rng=0)
    print(f"\nproduct-state optimum: {res.value:.12f}")
    vec = res.state.vector()
    print("optimizer amplitudes:", np.round(vec, 6))
    print(f"fidelity with |00>:   {abs(vec[0]) ** 2:.12f}")
    print(f"converged: {res.converged} after {res.iterations} sweeps")

    # Repetition: fold the single-prover form of the same instance
    single = entangled_accept_as_single_party()
    fold = single
    print("\nk-fold tensor powers:")
    for k in (2, 3):
        fold = pair_separable(fold, single)
        vk = seesaw_max(densify(fold), restarts=4, rng=k).value
        print(f"  k = {k}: optimum {vk:.12f}  (2**-{k} = {2.0 ** -k})")


if __name__ == "__main__":
    main()
