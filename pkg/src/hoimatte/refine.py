"""Top-K error patch selection, patch refinement and merge-back."""
from dataclasses import dataclass, field

import numpy as np
import torch

PATCH_SIZE = 16


class PatchOverlapError(RuntimeError):
    pass


@dataclass
class PatchSet:
    """Non-overlapping square windows cut from one image.

    ``centers`` are the selected deviation peaks; ``windows`` the clamped
    top-left corners. A centre near the border sits off-centre in its window.
    """

    centers: list = field(default_factory=list)
    windows: list = field(default_factory=list)
    patch_size: int = PATCH_SIZE
    patches_alpha: np.ndarray = None
    patches_rgb: np.ndarray = None

    def __len__(self):
        return len(self.windows)


def window_for(center, shape, size=PATCH_SIZE):
    """Top-left corner of the window placing ``center`` at offset size/2 - 1."""
    h, w = shape
    r, c = center
    off = size // 2 - 1
    return (min(max(r - off, 0), h - size), min(max(c - off, 0), w - size))


def _overlaps(a, b, size):
    return abs(a[0] - b[0]) < size and abs(a[1] - b[1]) < size


def select_windows(dev, k, size=PATCH_SIZE):
    """Greedy non-overlapping peak picking; ties broken by (row, col)."""
    dev = np.asarray(dev)
    h, w = dev.shape
    if h < size or w < size:
        raise ValueError(f"image {h}x{w} smaller than patch size {size}")
    if k < 0:
        raise ValueError("k must be >= 0")
    rows, cols = np.indices(dev.shape)
    # primary key: descending deviation; then row, then col
    order = np.lexsort((cols.ravel(), rows.ravel(), -dev.ravel()))
    centers, windows = [], []
    for idx in order:
        if len(windows) >= k:
            break
        center = (int(rows.flat[idx]), int(cols.flat[idx]))
        win = window_for(center, dev.shape, size)
        if any(_overlaps(win, other, size) for other in windows):
            continue
        centers.append(center)
        windows.append(win)
    return centers, windows


def select_topk_patches(dev, alpha, rgb, k, size=PATCH_SIZE):
    """Cut the K highest-deviation windows out of ``alpha`` (H, W) and ``rgb`` (H, W, 3).

    Returns fewer than ``k`` patches when no further window fits.
    """
    centers, windows = select_windows(dev, k, size)
    alpha = np.asarray(alpha)
    rgb = np.asarray(rgb)
    pa = np.stack([alpha[r:r + size, c:c + size] for r, c in windows]) if windows else np.zeros(
        (0, size, size), alpha.dtype
    )
    pr = np.stack([rgb[r:r + size, c:c + size] for r, c in windows]) if windows else np.zeros(
        (0, size, size, 3), rgb.dtype
    )
    return PatchSet(centers=centers, windows=windows, patch_size=size, patches_alpha=pa, patches_rgb=pr)


def refine_patches(rn, patchset):
    """Run the refiner on every patch; returns a (K, size, size) tensor."""
    size = patchset.patch_size
    if len(patchset) == 0:
        return torch.zeros((0, size, size))
    param = next(rn.parameters())
    a = torch.as_tensor(patchset.patches_alpha, dtype=param.dtype)[:, None]
    rgb = torch.as_tensor(patchset.patches_rgb, dtype=param.dtype).permute(0, 3, 1, 2)
    return rn(a, rgb)[:, 0]


def merge_patches(alpha, patchset, refined):
    """Write refined patches back into a copy of ``alpha``."""
    out = np.array(alpha, copy=True)
    size = patchset.patch_size
    if isinstance(refined, torch.Tensor):
        refined = refined.detach().cpu().numpy()
    if len(refined) != len(patchset.windows):
        raise ValueError("one refined patch per window required")
    wins = patchset.windows
    for i in range(len(wins)):
        for j in range(i + 1, len(wins)):
            if _overlaps(wins[i], wins[j], size):
                raise PatchOverlapError(f"windows {wins[i]} and {wins[j]} overlap")
    for (r, c), patch in zip(wins, refined):
        out[r:r + size, c:c + size] = patch
    return out
