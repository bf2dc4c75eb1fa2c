"""Constant-potential oracle for the static single layer on an ellipsoid.

The density sigma(x) = 1 / sqrt(x^2/a^4 + y^2/b^4 + z^2/c^4) on the surface
x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 carries total charge 4*pi*a*b*c and produces
the constant potential V = (abc/2) * int_0^inf dl / sqrt((a^2+l)(b^2+l)(c^2+l))
with kernel 1/(4*pi*r).
"""
import mpmath as mp

mp.mp.dps = 30


def potential(a, b, c):
    a, b, c = mp.mpf(a), mp.mpf(b), mp.mpf(c)
    f = lambda l: 1 / mp.sqrt((a * a + l) * (b * b + l) * (c * c + l))
    return a * b * c / 2 * mp.quad(f, [0, 1, mp.inf])


for axes in [(1, 1, 1), (1.0, 1.2, 0.8), (1.0, 1.0, 1.5)]:
    print(axes, mp.nstr(potential(*axes), 20))
