#!/usr/bin/env python3
"""Regenerate the bundled 64x64 test image (data/test64.pgm).

Deterministic geometry: a horizontal ramp background, a bright disk, a dark
square and a thin bar, chosen to mix smooth regions with sharp contours.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vgtv import ScalarImage, save_image  # noqa: E402


def build(size: int = 64) -> np.ndarray:
    ii, jj = np.mgrid[0:size, 0:size]
    img = 0.2 + 0.3 * jj / (size - 1)
    img[(ii - 24) ** 2 + (jj - 24) ** 2 <= 14**2] = 0.9
    img[40:56, 36:52] = 0.1
    img[8:12, 34:60] = 0.75
    return img


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "data", "test64.pgm")
    img = ScalarImage(build(), 1.0 / 64)
    save_image(img, out)
    print(f"wrote {os.path.normpath(out)}")


if __name__ == "__main__":
    main()
