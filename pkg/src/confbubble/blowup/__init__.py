"""Bubbles, bubble extraction and the blow-up probes."""
from .bubbles import (
    Closeness,
    bubble,
    bubble_closeness,
    bubble_energy,
    bubble_profile,
    bubble_values,
    critical_exponent,
    standard_bubble,
    superposition,
    superposition_values,
)
from .energy import EpsRegularity, eps_regularity_probe, log_gradient_sup
from .extraction import BlowupReport, ExtractionConfig, extract_bubbles
from .holder import HolderGauge, HolderSampler, holder_gauge, rescaled, seminorm
from .liouville import CenteredLiouville, LiouvilleCheck, centered_liouville_check, liouville_bounds, quantitative_liouville
from .radial import RadialProfile, radial_eigenvalues, radial_shoot

__all__ = [
    "BlowupReport",
    "CenteredLiouville",
    "Closeness",
    "EpsRegularity",
    "ExtractionConfig",
    "HolderGauge",
    "HolderSampler",
    "LiouvilleCheck",
    "RadialProfile",
    "bubble",
    "bubble_closeness",
    "bubble_energy",
    "bubble_profile",
    "bubble_values",
    "centered_liouville_check",
    "critical_exponent",
    "eps_regularity_probe",
    "extract_bubbles",
    "holder_gauge",
    "liouville_bounds",
    "log_gradient_sup",
    "quantitative_liouville",
    "radial_eigenvalues",
    "radial_shoot",
    "rescaled",
    "seminorm",
    "standard_bubble",
    "superposition",
    "superposition_values",
]
