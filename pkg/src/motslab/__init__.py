"""motslab: numerical laboratory for stability of surfaces and MOTS.

Discretizes spacelike 2-surfaces embedded in analytic initial data sets,
assembles MOTS stability operators with capillary and free-boundary Robin
conditions, computes principal eigenvalues, and audits geometric inequality
theorems with hypothesis flags and equality-case diagnostics.
"""

__version__ = "0.1.0"

from . import audits, grids, initialdata, spectra, surfaces  # noqa: F401,E402
