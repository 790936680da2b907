"""Image augmentations applied in random order, each with a small probability."""
from __future__ import annotations

from typing import Iterable

import numpy as np
from PIL import Image
from scipy import ndimage

OPS = ("gaussian_noise", "brightness", "contrast", "dilation", "erosion", "resolution_change")
DEFAULT_OP_PROB = 0.1


def _to_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def dilate_ink(image: np.ndarray, size: int = 3) -> np.ndarray:
    """Thicken dark strokes (grey-level minimum filter)."""
    return ndimage.grey_erosion(image, size=(size, size))


def erode_ink(image: np.ndarray, size: int = 3) -> np.ndarray:
    """Thin dark strokes (grey-level maximum filter)."""
    return ndimage.grey_dilation(image, size=(size, size))


def change_resolution(image: np.ndarray, factor: float) -> np.ndarray:
    """Downsample by ``factor`` then upsample back, keeping the dimensions."""
    h, w = image.shape
    small = (max(1, int(round(w / factor))), max(1, int(round(h / factor))))
    img = Image.fromarray(image).resize(small, Image.BILINEAR)
    return np.asarray(img.resize((w, h), Image.BILINEAR), dtype=np.uint8)


def apply_op(image: np.ndarray, op: str, rng: np.random.Generator) -> np.ndarray:
    if op == "gaussian_noise":
        return _to_u8(image + rng.normal(0, rng.uniform(2, 12), size=image.shape))
    if op == "brightness":
        return _to_u8(image.astype(np.float64) + rng.uniform(-40, 40))
    if op == "contrast":
        mean = image.mean()
        return _to_u8((image - mean) * rng.uniform(0.6, 1.4) + mean)
    if op == "dilation":
        return dilate_ink(image, int(rng.integers(2, 4)))
    if op == "erosion":
        return erode_ink(image, int(rng.integers(2, 4)))
    if op == "resolution_change":
        return change_resolution(image, rng.uniform(1.5, 3.0))
    raise ValueError(f"unknown augmentation {op!r}; expected one of {OPS}")


def augment(image: np.ndarray, ops: Iterable[str] = OPS, rng=None, prob: float = DEFAULT_OP_PROB) -> np.ndarray:
    """Shuffle ``ops`` and apply each with probability ``prob``."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    ops = list(ops)
    for op in ops:
        if op not in OPS:
            raise ValueError(f"unknown augmentation {op!r}; expected one of {OPS}")
    out = np.asarray(image, dtype=np.uint8).copy()
    for i in rng.permutation(len(ops)):
        if rng.random() < prob:
            out = apply_op(out, ops[i], rng)
    return out
