"""lexivis: statistical-linguistics analysis of CNN feature maps.

An image is read as a "text": every convolution kernel of a VGG-19 feature
stack is a word type, and the kernel's word count is the number of
feature-map pixels above a brightness threshold.  The package fits Zipf
(rank-frequency), Heaps (vocabulary growth), and Benford (leading-digit)
statistics to those counts and measures how robust each fit is under image
degradation.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    CountsFormatError,
    DegenerateFitError,
    FormatError,
    IntegrityError,
    LexivisError,
    ManifestError,
)
from .images import (
    PerturbationSpec,
    apply_perturbation,
    auto_roi,
    crop_roi,
    dilate,
    erode,
    gaussian_blur,
    load_image,
    salt_pepper,
    save_image,
    to_input_tensor,
)
from .laws import (
    BenfordLaw,
    BenfordResult,
    FitResult,
    HeapsLaw,
    HeapsResult,
    ZipfLaw,
    ZipfResult,
    benford_analysis,
    benford_expected,
    heaps_analysis,
    ols_fit,
    zipf_analysis,
)
from .lexicon import LexiconExtractor, ThresholdSpec, WordCountTable, extract_lexicon, word_count
from .network import FeatureMapSet, VGG19Features, forward_collect
from .tensor_ops import (
    ConvWeights,
    conv2d,
    conv2d_reference,
    maxpool2,
    quantile_nearest_rank,
    relu,
)
from .weights import (
    LoadedWeights,
    Normalization,
    WeightManifest,
    load_conv_weights,
    load_manifest,
)

__all__ = [
    "__version__",
    "LexivisError", "ConfigurationError", "ManifestError", "IntegrityError",
    "FormatError", "DegenerateFitError", "CountsFormatError",
    "ConvWeights", "conv2d", "conv2d_reference", "relu", "maxpool2",
    "quantile_nearest_rank",
    "Normalization", "WeightManifest", "LoadedWeights", "load_manifest",
    "load_conv_weights",
    "FeatureMapSet", "forward_collect", "VGG19Features",
    "load_image", "save_image", "crop_roi", "auto_roi", "to_input_tensor",
    "salt_pepper", "gaussian_blur", "erode", "dilate",
    "PerturbationSpec", "apply_perturbation",
    "ThresholdSpec", "WordCountTable", "word_count", "extract_lexicon",
    "LexiconExtractor",
    "FitResult", "ZipfResult", "HeapsResult", "BenfordResult",
    "ols_fit", "zipf_analysis", "heaps_analysis", "benford_analysis",
    "benford_expected",
    "ZipfLaw", "HeapsLaw", "BenfordLaw",
]
