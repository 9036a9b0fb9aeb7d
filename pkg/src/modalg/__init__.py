"""modalg: exact symbolic computation with module algebras.

Fields and rings with bialgebra actions (derivations, iterative derivations,
endomorphisms, monoid actions), universal expansion maps, Galois hulls,
Lie-Ritt groups of infinitesimal transformations, and Picard-Vessiot data,
all in exact arithmetic over QQ or GF(p).
"""

__version__ = "0.1.0"
