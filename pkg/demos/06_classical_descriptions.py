"""Replacing quantum proofs with classical fixed-point descriptions.

When the verifier only ever measures product states, Merlin can spell the
states out: each amplitude is rounded to f fractional bits and packed
into a hex register, and the rounding moves the state by at most
N 2**-(f+1) in norm. A preparation plan (phases plus Givens rotations)
reconstructs the described state from |0>.
"""

import numpy as np

from multiprover import (
    PureState,
    apply_plan,
    decode_state,
    description_error_bound,
    description_to_hex,
    encode_state,
    encoding_error,
    entangled_accept_operator,
    haar_state,
    preparation_plan,
    simulate_mqa_protocol,
)


def main():
    plus = PureState.normalized([2], [1.0, 1.0])
    desc = encode_state(plus, bits=20)
    print("(|0> + |1>)/sqrt(2) at f = 20 bits")
    print("  components:", desc.components)
    print("  hex register:", description_to_hex(desc))
    print(f"  error bound N 2**-(f+1) = {description_error_bound(desc):.3e}")
    print(f"  measured error          = {encoding_error(plus, desc):.3e}")

    plan = preparation_plan(decode_state(desc))
    print("  preparation plan rotations:", [(a, b, round(t, 6)) for a, b, t in plan.rotations])
    print("  plan rebuild drift:",
          f"{np.linalg.norm(apply_plan(plan) - decode_state(desc).amplitudes):.2e}")

    # A random 8-dimensional state round trips the same way
    psi = haar_state([8], np.random.default_rng(3))
    desc8 = encode_state(psi, bits=30)
    print(f"\nHaar state, N = 8, f = 30: error {encoding_error(psi, desc8):.3e}"
          f"  (bound {description_error_bound(desc8):.3e})")

    # Measuring described proofs against the canonical accept operator
    c = entangled_accept_operator()
    zero = PureState.normalized([2], [1.0, 0.0])
    pr = simulate_mqa_protocol([encode_state(zero, 20), encode_state(zero, 20)], c)
    print(f"\nacceptance of described |0>, |0> proofs: {pr:.6f}  (ideal 1/2)")


if __name__ == "__main__":
    main()
