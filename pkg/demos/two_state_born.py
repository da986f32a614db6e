"""
Born weights from a two-level flea model
========================================

Two localized states coupled by a tunnelling amplitude ``Delta`` and split
by a random flea energy ``delta``. Averaging the long-time state over the
flea law gives the Born mixture once ``Delta`` is small next to ``delta``.
"""

from bornflea import laws
from bornflea.twostate import (BASIS, ModelParams, born_gap, born_state, initial_state,
                               mixture_expectation, splitting)

state0 = initial_state(0.7)   # |alpha|^2 = 0.7 on the right-localized state
mu = laws.uniform(0.5, 1.5)   # flea energies, one-signed here
target = born_state(state0)

for hbar in (0.3, 0.2, 0.15, 0.1):
    p = ModelParams(hbar)
    vals = {A.label: mixture_expectation(A, state0, mu, p) for A in BASIS}
    print(f"hbar={hbar:<5} Delta={splitting(p).delta_hbar:.2e} "
          f"<Pi+>={vals['Pi+'].real:.6f} gap={born_gap(state0, mu, p):.2e}")

print("Born value for Pi+:", target.expectation(BASIS[0]).real)

# the same with a finite observation window; the cross terms fade like 1/T
p = ModelParams(0.1)
for T in (10.0, 100.0, 1000.0):
    print(f"T={T:>6g}  gap={born_gap(state0, mu, p, ('finite_T', T)):.2e}")
