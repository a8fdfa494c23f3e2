# One run of the k-level engine, its per-level counts, and the audits that
# price every certified box by exact DP.

# In[1]:

from fractions import Fraction

import numpy as np

from gapedit import derive_schedule, generate_pair, run_gap
from gapedit.audit import audit_engine, fit_length

n = 512
rng = np.random.default_rng(4)
x, y, _ = generate_pair(n, n // 32, 4, seed=4)
y = fit_length(y, n, rng, int(x.min()), int(x.max()))
p = derive_schedule(1, n, mode="practical:0", levels=1)
eng = run_gap(x, y, Fraction(1, 16), p, seed=1, strict=False)
for k, v in eng.report():
    print(f"{k:>30s} {v}")


# Hard audits must always pass; the soft ones hold with high probability.

# In[2]:

for r in audit_engine(eng, soft=True):
    print(r.line())


# A two-level custom profile exercises Bbelow, SparseSample and the level-2
# Enumerate on an input this small.

# In[3]:

from gapedit.parameters import custom_profile

deep = derive_schedule(1, 1024, profile=custom_profile([0, 3, 6], [0, 5]))
x, y, _ = generate_pair(1024, 32, 4, seed=5)
y = fit_length(y, 1024, rng, int(x.min()), int(x.max()))
eng = run_gap(x, y, Fraction(1, 2 ** 9), deep, seed=2, strict=False)
st = eng.stats[2]
print("pivots", st.pivots, "bbelow", st.bbelow_built, "samples", st.samples_built)
