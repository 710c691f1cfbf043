"""Exact skeletal limit measures of degenerating volume forms.

The package computes combinatorial limit objects attached to one-parameter
degenerations — dual complexes of weighted normal-crossing models, the
lattice-normalized measures their skeleta carry, and the arithmetic those
measures obey under finite base change — together with Monte-Carlo samplers
that verify the limit statements numerically on local monomial models and on
hypersurface pencils.
"""

from __future__ import annotations

__version__ = "0.1.0"
