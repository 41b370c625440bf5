"""Perceptual fairness evaluation for image-restoration algorithms.

Group Perceptual Index (GPI) computation under TV, W1, KID and FID, classical
group metrics, a scalar Gaussian toy experiment and exact finite-alphabet
checks of the GPI theorems.
"""

from .distributions import DiscretePmf, EmpiricalSamples1D, Density1D, kde_fit
from .divergences import (
    GaussianMoments,
    QuadratureSpec,
    fit_gaussian_moments,
    frechet_distance,
    kid,
    tv_continuous_1d,
    tv_discrete,
    wasserstein1_empirical,
)
from .fairness import FairnessReport, GroupEvaluationInput, evaluate_groups, gpi, pf_disparity
from .theorems import DiscreteScenario, EstimatorKernel
from .toy import ToyConfig, run_toy

__version__ = "0.1.0"
