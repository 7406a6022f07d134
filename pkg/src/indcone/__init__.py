"""indcone: exact inductive-system algebra and cone-weight verification.

The package has two halves that share nothing but a few report helpers:

* an exact-rational half (``linalg``, ``poset``, ``systems``,
  ``localization``, ``decomposition``, ``lp``) that computes with finite
  posets, quasi-lattices, inductive systems of rational vector spaces,
  colimits, and the decomposition/lifting machinery built on them;

* a numerical half (``cones``, ``weights``, ``demos``) that constructs
  polyhedral cones, subharmonic and plurisubharmonic weight functions
  with certified constants, and a one-variable Cauchy-transform solver
  for the inhomogeneous Cauchy-Riemann equation.

Everything in the exact half is deterministic and tolerance-free; the
numerical half carries explicit slacks and records every constant it
measures.
"""

__version__ = "0.1.0"
