"""Frozen reference values.

Independent values come from mpmath at 40 digits or from closed forms;
cross-route values are the agreed result of two unrelated computations and
are frozen here so regressions in either route show up.
"""

import math

# D_n(exp(2a cos t)) with a = 0.5: Toeplitz determinant of Bessel I_k(1), mpmath
TOEPLITZ_BESSEL_A05 = {
    1: 1.26606587775200833559824462521,
    2: 1.28351799398237480998622964642,
    5: 1.284025416118976379581413473,
    10: 1.28402541668774148407323563877,
}
# D_10 - e^{a^2}, same computation
SZEGO_GAP_A05_N10 = -1.8492928806162943952e-22
# D_20 - e^{a^2} at 120 digits
SZEGO_GAP_A05_N20 = -1.0944662959174815944e-52

# int exp(1 - 1/(1 - x^2)) dx over (-1, 1) and its cosine transform at u = 3
BUMP_INTEGRAL = 1.206900322437876175336238
BUMP_HAT_3 = 0.5379562179798846323268585

# det(1 - Pi) on an interval of length 0.1: 1 - s + pi^2 s^4/36 - pi^4 s^6/675,
# next term ~5e-10
GAP_PROB_S01 = 0.90002727125801630896
GAP_PROB_S01_TOL = 1e-9

# first power trace of the continual Hankel operator with kernel r^(s+t)/2pi:
# (1/4pi) int_0^inf r^ = r(0)/4 for even real r
def p1_even(r0):
    return r0 / 4.0

# strong Szego limit for F = 2a cos t
def szego_limit(a):
    return math.exp(a * a)

# cross-route values (quadrature vs half-line determinant), bumps w = 1, c = 0
THEOREM_VALUES = {
    0.25: 1.006548519049964,
    0.5: 1.0264438328835,
    1.0: 1.10993972199855,
    "0.3i": complex(0.99064228615137, 2.979e-6),
}
LEMMA_RHS_A05 = 1.0164930625589896
VARIANCE_A05 = 0.052232150161
