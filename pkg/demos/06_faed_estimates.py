# FAED upper bounds in three configurations against exact DP.

# In[1]:

from fractions import Fraction

from gapedit import exact_edit_distance, faed, generate_pair

configs = {
    "strict default": (Fraction(7, 6), {}),
    "base oracle": (Fraction(1), {}),
    "practical engine": (Fraction(7, 6), dict(mode="practical:0", levels=1, strict=False)),
}
for n, e in ((256, 4), (512, 64), (1024, 16), (1024, 512)):
    x, y, _ = generate_pair(n, e, 4, seed=n + e)
    d = exact_edit_distance(x, y)
    row = [f"n={n:<5d} e={e:<4d} editd={d:<4d}"]
    for name, (T, kw) in configs.items():
        r = faed(x, y, T, seed=1, **kw)
        row.append(f"{name}: U={r.U} i*={r.i_star}{' (exact)' if r.fallback else ''}")
    print(" | ".join(row))


# U is always at least editd. The strict default returns the exact distance
# of the padded pair because no theta below 1 is admissible at these lengths;
# the practical engine gives a genuine approximation whose ratio is bounded by its Q.
