"""Kernel density decomposition.

Build composite kernel densities from weighted observations, split them
exactly by a categorical label, and test whether the components differ
from the composite with a quantile-based Pearson equality-of-proportions
test.
"""

__version__ = "0.1.0"

from .bandwidth import BandwidthRule, bandwidth
from .data import (
    CategoryBinning,
    DatasetSchema,
    Observation,
    author_binning,
    bin_categories,
    category_counts,
    discount_binning,
    load_csv,
    period_binning,
    vote_weights,
)
from .density import CompositeDensity, Decomposition, WeightedKernel, decompose, fit, reaggregate
from .errors import KdecompError
from .inference import ShareMatrix, TestResult, pearson_test, share_matrix, test_decomposition
from .kernels import KernelFamily, KernelSpec, kernel_cdf, kernel_pdf, realize_parameters

__all__ = [
    "BandwidthRule",
    "CategoryBinning",
    "CompositeDensity",
    "DatasetSchema",
    "Decomposition",
    "KdecompError",
    "KernelFamily",
    "KernelSpec",
    "Observation",
    "ShareMatrix",
    "TestResult",
    "WeightedKernel",
    "author_binning",
    "bandwidth",
    "bin_categories",
    "category_counts",
    "decompose",
    "discount_binning",
    "fit",
    "kernel_cdf",
    "kernel_pdf",
    "load_csv",
    "pearson_test",
    "period_binning",
    "reaggregate",
    "realize_parameters",
    "share_matrix",
    "test_decomposition",
    "vote_weights",
]
