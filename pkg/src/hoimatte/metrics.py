"""Matting error metrics, pseudo-trimaps and composite export.

Grad and Conn follow the usual matting-benchmark recipes:

* Grad: both mattes are filtered with first-order Gaussian-derivative kernels
  (std 1.4, truncated where the Gaussian drops below 1e-2 of its peak
  density, kernel normalised to unit L2 norm, nearest-edge padding); the
  metric is the sum over pixels of the squared norm of the difference of the
  two gradient vectors.
* Conn: for thresholds 0.1..0.9, the largest 4-connected region where both
  mattes are at or above the threshold is found; each pixel's level ``l`` is
  the last threshold before it dropped out of that region (1 if it never
  did). With ``d = alpha - l``, ``phi = 1 - d * [d >= 0.15]`` and the metric
  is ``sum |phi(pred) - phi(gt)|``.
"""
from dataclasses import dataclass, asdict

import numpy as np
from scipy import ndimage

from .scene import composite

GRAD_SIGMA = 1.4
CONN_THRESHOLDS = tuple(i / 10 for i in range(1, 10))
CONN_MIN_DELTA = 0.15

BG, UNKNOWN, FG = 0, 128, 255
BG_COLORS = {"green": (0.0, 1.0, 0.0), "blue": (0.0, 0.0, 1.0)}


def _check(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def sad(a, a_star, scale=False):
    """Sum of absolute differences; divided by 1000 when ``scale``."""
    a, b = _check(a, a_star)
    s = np.abs(a - b).sum()
    return s / 1000 if scale else s


def mse(a, a_star):
    a, b = _check(a, a_star)
    return ((a - b) ** 2).mean()


def _gauss(x, sigma):
    return np.exp(-(x**2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))


def gaussian_derivative_kernel(sigma=GRAD_SIGMA, eps=1e-2):
    """Kernel whose correlation gives the x-derivative; transpose for y."""
    half = int(np.ceil(sigma * np.sqrt(-2 * np.log(np.sqrt(2 * np.pi) * sigma * eps))))
    u = np.arange(-half, half + 1)
    g = _gauss(u, sigma)
    dg = -u * g / sigma**2
    k = np.outer(g, dg)
    return k / np.sqrt((k**2).sum())


def gaussian_gradients(x, sigma=GRAD_SIGMA):
    k = gaussian_derivative_kernel(sigma)
    gx = ndimage.correlate(x, k, mode="nearest")
    gy = ndimage.correlate(x, k.T, mode="nearest")
    return gx, gy


def grad_metric(a, a_star, sigma=GRAD_SIGMA):
    a, b = _check(a, a_star)
    ax, ay = gaussian_gradients(a, sigma)
    bx, by = gaussian_gradients(b, sigma)
    return ((ax - bx) ** 2 + (ay - by) ** 2).sum()


def largest_component(mask):
    labels, n = ndimage.label(mask)  # default structure: 4-connectivity
    if n == 0:
        return np.zeros_like(mask, dtype=bool)
    counts = np.bincount(labels.ravel())[1:]
    return labels == (np.argmax(counts) + 1)


def conn_metric(a, a_star, thresholds=CONN_THRESHOLDS, min_delta=CONN_MIN_DELTA):
    a, b = _check(a, a_star)
    level = np.full(a.shape, -1.0)
    prev = 0.0
    for t in thresholds:
        omega = largest_component((a >= t) & (b >= t))
        level[(level == -1) & ~omega] = prev
        prev = t
    level[level == -1] = 1.0
    da = a - level
    db = b - level
    phi_a = 1 - da * (da >= min_delta)
    phi_b = 1 - db * (db >= min_delta)
    return np.abs(phi_a - phi_b).sum()


def region_sads(a, a_star, human, obj):
    """SAD split into human, object-only and remaining pixels."""
    a, b = _check(a, a_star)
    err = np.abs(a - b)
    human = np.asarray(human, bool)
    obj_only = np.asarray(obj, bool) & ~human
    rest = ~(human | obj_only)
    return {
        "human": err[human].sum(),
        "object": err[obj_only].sum(),
        "elsewhere": err[rest].sum(),
    }


@dataclass
class MetricReport:
    sad: float
    mse: float
    grad: float
    conn: float
    sad_human: float
    sad_object: float
    sad_elsewhere: float

    def to_dict(self):
        return {k: float(v) for k, v in asdict(self).items()}


def evaluate_matte(a, a_star, human, obj):
    r = region_sads(a, a_star, human, obj)
    return MetricReport(
        sad=sad(a, a_star),
        mse=mse(a, a_star),
        grad=grad_metric(a, a_star),
        conn=conn_metric(a, a_star),
        sad_human=r["human"],
        sad_object=r["object"],
        sad_elsewhere=r["elsewhere"],
    )


def generate_trimap(seg_prob, object_circles=(), fg_thresh=0.95, bg_thresh=0.05):
    """Human-object pseudo-trimap from a person probability map and object circles.

    Circles are ``((row, col), radius)``; parts outside the image are ignored.
    """
    seg = np.asarray(seg_prob, dtype=np.float64)
    fg = seg > fg_thresh
    unknown_h = (seg >= bg_thresh) & (seg <= fg_thresh)
    rows, cols = np.indices(seg.shape)
    unknown_o = np.zeros(seg.shape, bool)
    for (cr, cc), radius in object_circles:
        unknown_o |= (rows - cr) ** 2 + (cols - cc) ** 2 <= radius**2
    unknown = (unknown_h | unknown_o) & ~fg
    labels = np.full(seg.shape, BG, dtype=np.uint8)
    labels[unknown] = UNKNOWN
    labels[fg] = FG
    return labels


def export_composite(rgb, alpha, bg_color="green"):
    """Composite the input image (as foreground) over a solid colour."""
    if bg_color not in BG_COLORS:
        raise ValueError(f"bg_color must be one of {sorted(BG_COLORS)}, got {bg_color!r}")
    rgb = np.asarray(rgb, dtype=np.float32)
    bg = np.broadcast_to(np.asarray(BG_COLORS[bg_color], np.float32), rgb.shape)
    return composite(rgb, bg, np.asarray(alpha, np.float32))


def to_uint8(img):
    return np.rint(np.clip(img, 0, 1) * 255).astype(np.uint8)
