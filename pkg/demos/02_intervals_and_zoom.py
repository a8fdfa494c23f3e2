# Aligned interval families, rounding and ZoomIn on a small grid.

# In[1]:

from fractions import Fraction

from gapedit import GridBox, Interval, aligned_family, round_interval, zoom_in

print(aligned_family(4, 1, Interval(0, 16)))
print(aligned_family(4, Fraction(1, 2), Interval(0, 8)))


# Rounding moves an interval down to the nearest aligned start.

# In[2]:

for lo in range(4, 10):
    J = Interval(lo, lo + 8)
    print(J, "->", round_interval(J, Fraction(1, 4)), round_interval(J, Fraction(1, 2)))


# ZoomIn lists the finer candidates J' under a box whose diagonal stays
# within 2 * eps(i) * width of the box diagonal. With b = {0..16}x{16..32},
# i = 1 and I' = {0..4} there are 13 of them.

# In[3]:

b = GridBox(Interval(0, 16), Interval(16, 32))
out = zoom_in(b, 1, Interval(0, 4), 1)
print(len(out), out[0], out[-1])


# Raising i shrinks the window and coarsens the grain.

# In[4]:

for i in range(1, 6):
    print(i, len(zoom_in(b, i, Interval(4, 8), i)))
