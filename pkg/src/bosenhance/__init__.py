"""Bosonic enhancement of light scattering by trapped Bose gases."""

__version__ = "0.1.0"

from .errors import BoseEnhanceError  # noqa: F401
from .ideal import (  # noqa: F401
    EnhancementResult,
    GasState,
    enhancement_closed_form_k0,
    structure_factor,
    structure_factor_at,
)
from .trap import RecoilSpec, Statistics, TrapSpec, classify_regime  # noqa: F401
