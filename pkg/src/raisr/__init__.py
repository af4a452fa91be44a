"""RAISR-style single-image super-resolution: hash-indexed learned linear
filters with census-transform blending, a cascaded DoG sharpener and
iterative back-projection."""

__version__ = "0.1.0"

from .filterbank import FilterBank, load_bank, save_bank
from .hashkeys import Quantizer
from .image_ops import DegradationSpec, degrade, psnr, resample, ssim
from .learner import AccumulatorBank, augment_symmetry, merge, solve_filters
from .sharpener import DogConfig, DogLayer, sharpen
from .upscaler import UpscaleOptions, back_project, upscale

__all__ = [
    "AccumulatorBank", "DegradationSpec", "DogConfig", "DogLayer",
    "FilterBank", "Quantizer", "UpscaleOptions", "augment_symmetry",
    "back_project", "degrade", "load_bank", "merge", "psnr", "resample",
    "save_bank", "sharpen", "solve_filters", "ssim", "upscale",
]
