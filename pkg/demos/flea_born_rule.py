"""
The flea picks a well with Born probabilities
=============================================

Prepare ``sqrt(0.7) Psi+ + sqrt(0.3) Psi-`` in a symmetric double well, add
a random small bump (the flea) and look at the long-time probability of
being on the right. Averaged over fleas it approaches 0.7 as hbar shrinks.
This is a small ensemble; the acceptance suite runs 200 fleas.
"""

from bornflea.doublewell import FleaSpec, born_experiment, classify_flea
from bornflea.harness.config import DEFAULT_FLEA_LAW, build_flea_distribution
from bornflea.twostate import ModelParams

# one flea first: positive bump in the left well sends the ground state right
flea = FleaSpec(0.2, -0.5, 0.2)
c = classify_flea(flea, ModelParams(0.15), hbar_sweep=(0.3, 0.2, 0.15))
print("class", c.label, "right mass", round(c.right_mass, 4))
print("distance to the localized state / hbar:", [round(d, 3) for _, d in c.diagnostics])

# now an ensemble
dist = build_flea_distribution(DEFAULT_FLEA_LAW)
res = born_experiment(dist, 0.7, [0.3, 0.2, 0.15], n_samples=40, seed=1, threads=4)
for s in res.summaries:
    print(f"hbar={s.hbar:<5} mean right={s.mean_right:.4f} +- {s.se_right:.4f} "
          f"|gap|={s.gap:.4f} max tail={s.max_tail:.1e}")
