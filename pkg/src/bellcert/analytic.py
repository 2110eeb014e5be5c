"""Closed-form outcome probabilities of the noiseless purification circuit.

All functions take Bell coefficients ``(a, b, c, d)`` of the (identical)
input pairs.  They are the reference the compiled circuit is checked against.
"""

from __future__ import annotations


def success_polynomial(a, b, c, d):
    """Probability that locations 1, 2 agree and location 3 disagrees."""
    return (
        a**4
        + a**2 * (2 * b**2 + 4 * b * d + (c + d) ** 2)
        + 2 * a * (2 * b**2 * c + c**2 * d + d**3)
        + b**4
        + b**2 * (c + d) ** 2
        + 2 * b * c * (c**2 + d**2)
        + 2 * c * d * (c**2 + d**2)
    )


def purified_numerators(a, b, c, d):
    """Unnormalized output coefficients; they sum to the success polynomial."""
    na = a**4 + a**2 * (b**2 + d**2) + b**2 * d * (2 * c + d) + 2 * c**3 * d
    nb = a**2 * (b**2 + c * (c + 2 * d)) + b**4 + b**2 * c**2 + 2 * c * d**3
    nc = 2 * a * (2 * b**2 * c + c**2 * d + d**3)
    nd = 2 * b * (c**3 + 2 * a**2 * d + c * d**2)
    return na, nb, nc, nd


def intermediate_pair_weights(a, b, c, d):
    """Bell weights of the two pairs entering the location-3 check.

    Returns ``((A1, B1, C1, D1), (A2, B2, C2, D2))``; each group sums to
    ``(a + b + c + d)**2``.
    """
    first = (
        a * a + d * d + a * b + c * d,
        b * b + c * c + a * b + c * d,
        a * c + b * d + 2 * b * c,
        a * c + b * d + 2 * a * d,
    )
    second = (
        a * a + b * b + a * d + b * c,
        c * c + d * d + a * d + b * c,
        a * c + b * d + 2 * c * d,
        a * c + b * d + 2 * a * b,
    )
    return first, second


def agree_probabilities(a, b, c, d):
    """Marginal parity-agree probabilities at locations 1, 2 and 3."""
    (A1, B1, C1, D1), (A2, B2, C2, D2) = intermediate_pair_weights(a, b, c, d)
    p1 = (a + b) ** 2 + (c + d) ** 2
    p2 = (a + d) ** 2 + (b + c) ** 2
    p3 = (A1 + B1) * (B2 + D2) + (C1 + D1) * (A2 + C2)
    return p1, p2, p3
