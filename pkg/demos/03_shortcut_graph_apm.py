# Shortcut graphs: certified boxes become diagonal edges, and APM answers a
# whole stack of traversal-cost questions in one sweep.

# In[1]:

from fractions import Fraction

import numpy as np

from gapedit import (GridBox, Interval, Stack, WeightedBox, apm, cost_via_shortcuts_oracle,
                     exact_edit_distance)

b = GridBox(Interval(0, 8), Interval(0, 8))
half = WeightedBox(Interval(0, 4), Interval(0, 4), Fraction(1, 4))
print(cost_via_shortcuts_oracle([], b), cost_via_shortcuts_oracle([half], b))


# Certify every square box of a random text with its true cost and ask APM
# which vertical intervals are close to the horizontal one.

# In[2]:

rng = np.random.default_rng(0)
n = 16
z = rng.integers(0, 2, 2 * n)
h = Interval(0, n)
boxes = [WeightedBox(h, Interval(s, s + n), Fraction(exact_edit_distance(z[:n], z[s:s + n]), n))
         for s in range(0, n + 1)]
vs = [Interval(s, s + n) for s in range(0, n + 1)]
for kappa in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)):
    got = apm(Stack(h, vs), kappa, boxes)
    print(kappa, [J.lo for J in got])


# Everything with cost <= kappa*n is returned and nothing above 2*kappa*n.

# In[3]:

costs = [exact_edit_distance(z[:n], z[s:s + n]) for s in range(0, n + 1)]
print(costs)
