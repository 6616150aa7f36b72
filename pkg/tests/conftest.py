import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from angiokit import phantom
from angiokit.raster import Mask


@pytest.fixture(scope="session")
def straight_tube():
    """256x256 straight phantom, base 20 px, 50% stenosis."""
    spec = phantom.TubeSpec(
        control_points=phantom.shape_control_points("straight", (256, 256)),
        base_width=20.0,
        stenosis_depth=0.5,
        stenosis_extent=0.2,
        seed=7,
    )
    mask, field = phantom.render_mask(spec, (256, 256))
    return spec, mask, field


def random_blob_mask(rng: np.random.Generator, size: int = 64) -> Mask:
    """Union of a few random disks; the stock random shape for thinning tests."""
    grid = np.zeros((size, size), dtype=bool)
    for _ in range(rng.integers(1, 5)):
        r = int(rng.integers(3, 11))
        cx = int(rng.integers(r + 1, size - r - 1))
        cy = int(rng.integers(r + 1, size - r - 1))
        yy, xx = np.ogrid[:size, :size]
        grid |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    if not grid.any():
        grid[size // 2, size // 2] = True
    return Mask(grid)
