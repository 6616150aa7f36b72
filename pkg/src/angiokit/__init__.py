"""angiokit: coronary stenosis quantification from binary segmentation masks.

Pipeline stages are importable on their own: key-frame scoring/selection
(`keyframe`), skeletonization and pruning (`skeleton`), width profiling
(`profile`), stenosis assessment (`stenosis`), plus the phantom oracle
(`phantom`), augmentation transforms (`augment`), and the metric suite
(`evaluation`).
"""

from .kernels import ACTIVE_BACKEND
from .raster import GrayImage, Mask, Point

__version__ = "0.1.0"

__all__ = ["ACTIVE_BACKEND", "GrayImage", "Mask", "Point", "__version__"]
