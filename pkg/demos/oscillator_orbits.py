"""
A coherent state smeared over its classical orbit
=================================================

For an oscillator whose frequency is drawn from a density, the
frequency-averaged Wigner function of a coherent state spreads uniformly
around the classical orbit. We pair it with a few phase-space observables
and compare against the orbit-averaged point mass.
"""

import numpy as np

from bornflea import laws
from bornflea.wigner import (Grid1D, PointMassMixture, bump, coherent_state, prop1_residual,
                             smooth_box, wigner_transform)

grid = Grid1D(-5, 5, 1024)
mu = laws.uniform(1.0, 2.0)

# first a sanity look at one Wigner function
psi = coherent_state(grid, 0.1, x0=1.0)
W = wigner_transform(psi, p_extent=6.0, n_p=257)  # odd, so p = 0 is on the grid
print(f"total {W.total():.8f}, peak {W.values.max():.4f} (1/(pi hbar) = {1 / (0.1 * np.pi):.4f})")

observables = [bump(1, 0, 0.8), bump(0, 1, 0.8), smooth_box(-2, 2, 0, 2, 0.5)]
limit = PointMassMixture(((1.0, 0.0, 1.0),))
res = prop1_residual(lambda h: coherent_state(grid, h, 1.0), mu, [0.2, 0.05], [10.0, 1000.0],
                     observables, limit, n_angles=64, p_extent=6.0)
for r in res:
    print(f"hbar={r.hbar:<5} T={r.T:<7g} {r.label:<22} quantum={r.quantum:.4f} "
          f"orbit={r.classical:.4f} residual={r.residual:.4f}")
