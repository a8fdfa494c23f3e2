# The level schedule for one speed-up step over the exact oracle, and why
# desk-scale inputs sit in its degenerate corner.

# In[1]:

from gapedit import derive_schedule

p = derive_schedule(1, 2 ** 16)
for k, v in p.report():
    print(f"{k:>26s} {v}")


# zeta = 1/84, so the smallest admissible theta is n^(-1/84): at n = 2^16
# only theta = 1 qualifies. Strict mode therefore falls back to exact DP.

# In[2]:

for logn in range(10, 41, 6):
    p = derive_schedule(1, 2 ** logn)
    print(logn, p.w[1:], p.d, p.max_admissible_exp())


# The practical profiles keep the same widths and densities but chain the
# closeness exponents with a small slack, which shrinks Q from 2^846.

# In[3]:

for mode in ("theoretical", "practical:0", "practical:2"):
    p = derive_schedule(1, 2 ** 12, mode=mode)
    print(mode, p.q, "Q = 2^%d" % p.profile.quality_log2)
