# Exact edit distance and the threshold test that every oracle tower starts from.

# In[1]:

from fractions import Fraction

import numpy as np

from gapedit import banded_edit_distance, base_gap_decide, exact_edit_distance, generate_pair

print(exact_edit_distance("kitten", "sitting"))


# The banded version only fills the 2*limit+1 diagonals around the main one.
# Below the limit it is exact; above it, it reports limit+1.

# In[2]:

x, y, planted = generate_pair(2000, 40, 4, seed=1)
d = exact_edit_distance(x, y)
for limit in (10, d - 1, d, 200):
    print(limit, banded_edit_distance(x, y, limit))


# The base gap test at theta = 2^-i accepts exactly when editd <= theta * n.
# It is the quality-1 oracle at the bottom of the tower.

# In[3]:

x, y, _ = generate_pair(1024, 20, 4, seed=2)
y = y[:1024] if len(y) >= 1024 else np.concatenate([y, x[len(y):]])
d = exact_edit_distance(x, y)
print("editd =", d)
for i in range(1, 11):
    theta = Fraction(1, 2 ** i)
    print(f"theta=1/{2 ** i:<5d} threshold={1024 >> i:<4d} {base_gap_decide(x, y, theta).value}")
