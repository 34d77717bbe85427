"""Spectra of diagonal matrices under small random Hermitian perturbations."""
from .eigensolve import Spectrum, eig_hermitian, eig_sym
from .ensemble import PerturbationSample, SampleConfig, build_diagonal, sample_perturbation
from .errors import SpecpertError
from .experiments import RegimeSpec, figure_dataset, run_regime
from .models import ExampleId, LimitModel, closed_form_F, make_model
from .spectral import SignedSpectralDiff, delta_G, resolvent_terms, signed_cdf_diff, stieltjes
from .theory import B_from_model_F, B_quadrature, F_numeric, free_fixed_point, z_covariance

__version__ = "0.1.0"

__all__ = [
    "Spectrum", "eig_sym", "eig_hermitian",
    "SampleConfig", "PerturbationSample", "build_diagonal", "sample_perturbation",
    "SpecpertError", "RegimeSpec", "run_regime", "figure_dataset",
    "ExampleId", "LimitModel", "make_model", "closed_form_F",
    "SignedSpectralDiff", "delta_G", "signed_cdf_diff", "stieltjes", "resolvent_terms",
    "F_numeric", "B_quadrature", "B_from_model_F", "z_covariance", "free_fixed_point",
]
