"""
Phases forget their initial density
===================================

A random frequency ``omega`` with any reasonable density, run for a time
``t``, gives a phase ``omega t mod 2 pi`` that looks uniform once ``t`` is
large. Here we watch the total variation distance to uniform shrink.
"""

import numpy as np

from bornflea import laws
from bornflea.arbfun import char_fn_magnitude, pushforward_mod, tv_bound, tv_distance

# five quite different densities on [1, 2]
family = laws.standard_family(1.0, 2.0)
ts = [10.0, 100.0, 1000.0, 10000.0]

print(f"{'density':>9} " + " ".join(f"{'t=' + format(t, 'g'):>10}" for t in ts))
for name, rv in family.items():
    tv = [tv_distance(pushforward_mod(rv, t)) for t in ts]
    print(f"{name:>9} " + " ".join(f"{v:10.2e}" for v in tv))

# the rigorous bound P V(f) / (8 t) uses only the total variation of the density
rv = family["step"]
print("\nstep density, distance against its bound:")
for t in ts:
    print(f"  t={t:>7g}  tv={tv_distance(pushforward_mod(rv, t)):.2e}  bound={tv_bound(rv, t):.2e}")

# the characteristic function decays too, which is the Fourier side of the same story
print("\n|E exp(i omega t)| for the triangle:",
      np.array2string(np.array([char_fn_magnitude(family['triangle'], t) for t in ts]), precision=2))
