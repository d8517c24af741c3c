"""Difference calculus on elliptic lattices.

Biquadratic curves and their lattice walks, divided-difference operators
and adjoints, interpolatory rational expansions, continued fractions with
the Pell property, the Laguerre-Hahn Riccati ladder, second-order
hypergeometric difference operators, and the theta-function closed forms,
cross-validated throughout.
"""

__version__ = "0.1.0"
