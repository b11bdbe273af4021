"""Why the canonical accept operator is not a separable sum.

Two independent certificates:

1. An exact kernel argument. <11|C|11> = 0, so any separable decomposition
   C = sum_t A_t (x) B_t with PSD factors must have every term vanish on
   |1> x |1>. That forces the off-diagonal entry <10|C|01> to vanish too,
   but it equals 1/4.

2. The partial-transpose test: C has a negative eigenvalue after
   transposing either subsystem, which no separable operator can.
"""

import numpy as np

from multiprover import (
    HermitianOperator,
    basis_state,
    entangled_accept_operator,
    hs_inner,
    partial_transpose,
    ppt_check,
    witness_evidence,
)


def main():
    c = entangled_accept_operator()

    p11 = basis_state([2, 2], 3).projector()
    print(f"<11|C|11>      = {hs_inner(c, p11):.3e}  (kernel constraint)")
    print(f"<10|C|01>      = {c.entries[2, 1].real:+.4f}  (the contradiction)")

    report = ppt_check(c)
    print("\npartial-transpose minima per cut:", [f"{v:.6f}" for v in report.min_eigenvalues])
    print("PPT:", report.is_ppt, " (closed form (1 - sqrt 2)/4 =",
          f"{(1 - np.sqrt(2)) / 4:.6f})")

    # A dual witness with slack: W = 2 I - C is strictly positive on every
    # product state because ||C|| = 1/2
    w = HermitianOperator([2, 2], 2.0 * np.eye(4) - c.entries)
    ev = witness_evidence(w, samples=5000, rng=1)
    print(f"\nmin of <2 I - C> over product states: {ev.min_value:.6f}")
    print("feasible dual point:", ev.feasible)

    # And a fake bound below the true optimum is refuted by a concrete state
    w_bad = HermitianOperator([2, 2], 0.25 * np.eye(4) - c.entries)
    ev_bad = witness_evidence(w_bad, samples=5000, rng=2)
    print(f"min of <I/4 - C>  over product states: {ev_bad.min_value:.6f}")
    print("counterexample found:", ev_bad.counterexample)
    print("refuting state:", np.round(ev_bad.state.vector(), 4))


if __name__ == "__main__":
    main()
