"""Subgroup control of a right ideal at a finite Heisenberg stage.

The right ideal generated by b3 = g3 - 1 lives at the stage (Z/9)[G/G^9]
of the Heisenberg group ring (|Q| = 729).  For every open-subgroup pattern
U = <g1^(p^e1), g2^(p^e2), g3^(p^e3)> we ask whether the ideal is
controlled by U, both by the definitional rank identity and by the
coset-projection action, and report the finest controller found.
"""

from iwasawa_kernel.algebra import b_element, build_quotient, ideal_closure
from iwasawa_kernel.charts import heisenberg_chart
from iwasawa_kernel.control import (
    control_lattice,
    controller_estimate,
    is_faithful,
    j_ideal_rank,
)

P = 3


def main():
    Q = build_quotient(heisenberg_chart(P), 2, 2)
    print(f"stage: |Q| = {Q.size}, coefficients mod {Q.coeff_mod}")

    I = ideal_closure([b_element(Q, 2)], side="right", quotient=Q)
    print(f"ideal rank (log_p) = {I.rank_log}")
    print("faithful:", is_faithful(I), " centre rank through I:", j_ideal_rank(I))

    lattice = control_lattice(I)
    agree = all(d == a for d, a in lattice.values())
    controlled = sorted(e for e, (d, _) in lattice.items() if d)
    print(f"lattice: {len(lattice)} compatible patterns, "
          f"definitional == by_action in all: {agree}")
    print("controlling patterns:", controlled)
    print("finest controller estimate:", controller_estimate(I, lattice))


if __name__ == "__main__":
    main()
