"""Procedural human-object scenes with exact ground truth.

Every sample is a pure function of its seed: a blob-shaped "human", an
optional attached object (bar or ellipse), a procedural background, and the
three virtual modalities (depth, segmentation, interaction heatmap) derived
from the ground-truth regions.
"""
from dataclasses import dataclass, asdict

import numpy as np
from scipy import ndimage

# 5-tap triangular kernel; integer weights keep the feathered matte exactly
# 0 or 1 outside the band.
_TRI = np.array([1, 2, 3, 2, 1], dtype=np.int64)
_TRI_NORM = int(_TRI.sum()) ** 2

# entropy tags separating the random streams drawn from one seed
_TAG_SCENE = 0
_TAG_BACKGROUND = 1
_TAG_MODALITY = 3
_TAG_BBAR = 7


@dataclass(frozen=True)
class SynthConfig:
    size: int = 64
    object_probability: float = 0.75
    feather: int = 2
    depth_noise: float = 0.015
    heatmap_sigma: float = 6.0

    def __post_init__(self):
        if self.size < 32:
            raise ValueError(f"image size must be >= 32 (got {self.size}); 16x16 patches must fit")
        if not 0.0 <= self.object_probability <= 1.0:
            raise ValueError("object_probability must lie in [0, 1]")
        if self.feather != 2:
            # the 5-tap triangular blur realizes exactly a 2 px feather
            raise ValueError("only feather=2 is supported")
        if not 0.0 <= self.depth_noise < 0.02:
            raise ValueError("depth_noise must lie in [0, 0.02)")

    def to_dict(self):
        return asdict(self)


@dataclass
class SceneSample:
    rgb: np.ndarray
    fg_star: np.ndarray
    bg_star: np.ndarray
    alpha_star: np.ndarray
    human_region: np.ndarray
    object_region: np.ndarray
    seed: int

    @property
    def interactive(self):
        return bool(self.object_region.any())


@dataclass
class ModalityBundle:
    depth: np.ndarray
    seg: np.ndarray
    heatmap: np.ndarray


def composite(fg, bg, alpha):
    """Blend ``fg`` over ``bg`` with per-pixel opacity ``alpha`` (H, W)."""
    fg = np.asarray(fg)
    bg = np.asarray(bg)
    alpha = np.asarray(alpha)
    if fg.shape != bg.shape or fg.ndim != 3 or fg.shape[:2] != alpha.shape:
        raise ValueError(
            f"shape mismatch: fg {fg.shape}, bg {bg.shape}, alpha {alpha.shape}"
        )
    a = alpha[..., None]
    return np.clip(a * fg + (1 - a) * bg, 0, 1)


def _rng(seed, tag):
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def feather(mask):
    """Separable 5-tap triangular blur of a hard mask."""
    m = mask.astype(np.int64)
    m = ndimage.correlate1d(m, _TRI, axis=0, mode="constant")
    m = ndimage.correlate1d(m, _TRI, axis=1, mode="constant")
    return (m / _TRI_NORM).astype(np.float32)


def _blob(yy, xx, cy, cx, ry, rx, angle, harmonics):
    dy, dx = yy - cy, xx - cx
    c, s = np.cos(angle), np.sin(angle)
    u = (c * dx + s * dy) / rx
    v = (-s * dx + c * dy) / ry
    r = np.hypot(u, v)
    theta = np.arctan2(v, u)
    edge = np.ones_like(r)
    for k, amp, phase in harmonics:
        edge += amp * np.cos(k * theta + phase)
    return r <= edge


def _human(rng, size, yy, xx):
    s = size / 64.0
    cy = rng.uniform(32, 40) * s
    cx = rng.uniform(24, 40) * s
    ry = rng.uniform(11, 14) * s
    rx = rng.uniform(7, 9.5) * s
    angle = rng.uniform(-0.2, 0.2)
    harmonics = [(k, rng.uniform(0, 0.06), rng.uniform(0, 2 * np.pi)) for k in (2, 3, 4)]
    torso = _blob(yy, xx, cy, cx, ry, rx, angle, harmonics)
    hr = rng.uniform(4.5, 6.5) * s
    hy = cy - ry - hr + 2.5 * s
    hx = cx + rng.uniform(-2, 2) * s
    head = np.hypot(yy - hy, xx - hx) <= hr
    return torso, head, (cy, cx, ry, rx)


def _object(rng, size, yy, xx, torso_geom):
    s = size / 64.0
    cy, cx, ry, rx = torso_geom
    side = rng.choice([-1.0, 1.0])
    # contact point on the torso flank
    py = cy + rng.uniform(-0.5, 0.5) * ry
    px = cx + side * rx * 0.8
    kind = "bar" if rng.random() < 0.5 else "ellipse"
    if kind == "bar":
        length = rng.uniform(16, 24) * s
        half_t = rng.uniform(2.0, 3.5) * s
        ang = rng.uniform(-0.9, 0.9)
        dx, dy = side * np.cos(ang), np.sin(ang)
        # start 3 px inside the torso so the two regions touch
        sx, sy = px - 3 * s * dx, py - 3 * s * dy
        t = (xx - sx) * dx + (yy - sy) * dy
        d = np.abs(-(xx - sx) * dy + (yy - sy) * dx)
        mask = (t >= 0) & (t <= length) & (d <= half_t)
    else:
        ory = rng.uniform(5, 8) * s
        orx = rng.uniform(5, 8) * s
        ocx = px + side * (orx - 2.5 * s)
        ocy = py
        mask = ((yy - ocy) / ory) ** 2 + ((xx - ocx) / orx) ** 2 <= 1.0
    return mask


def _background(rng, size):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    kind = rng.integers(3)
    c0 = rng.uniform(0, 1, 3)
    c1 = rng.uniform(0, 1, 3)
    if kind == 0:
        ang = rng.uniform(0, 2 * np.pi)
        t = np.cos(ang) * xx + np.sin(ang) * yy
        t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
    elif kind == 1:
        cells = rng.integers(4, 10)
        t = ((np.floor(yy * cells) + np.floor(xx * cells)) % 2).astype(np.float64)
    else:
        t = np.zeros((size, size))
        amp = 1.0
        for octave in range(4):
            n = 2 ** (octave + 2)
            grid = rng.uniform(0, 1, (n + 1, n + 1))
            t += amp * ndimage.zoom(grid, size / (n + 1), order=1)[:size, :size]
            amp *= 0.5
        t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
    img = c0 + (c1 - c0) * t[..., None]
    return np.clip(img, 0, 1).astype(np.float32)


def synth_background(seed, size=64):
    """A background from the compositing pool, disjoint from scene backgrounds."""
    return _background(_rng(seed, _TAG_BBAR), size)


def synth_scene(seed, cfg=SynthConfig()):
    size = cfg.size
    rng = _rng(seed, _TAG_SCENE)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    torso, head, geom = _human(rng, size, yy, xx)
    human = torso | head
    if rng.random() < cfg.object_probability:
        obj = _object(rng, size, yy, xx, geom)
    else:
        obj = np.zeros_like(human)

    alpha = feather(human | obj)

    # foreground colours: shaded torso, skin-toned head, flat object colour
    torso_col = rng.uniform(0.05, 0.95, 3)
    skin = np.array([0.85, 0.65, 0.5]) * rng.uniform(0.6, 1.1)
    obj_col = rng.uniform(0, 1, 3)
    shade = 0.85 + 0.15 * (yy / size)[..., None]
    human_col = np.where(
        (feather(head) > feather(torso))[..., None], skin, torso_col * shade
    )
    fg = np.where((feather(obj) > feather(human))[..., None], obj_col, human_col)
    fg = np.clip(fg, 0, 1).astype(np.float32)

    bg = _background(_rng(seed, _TAG_BACKGROUND), size)
    rgb = composite(fg, bg, alpha).astype(np.float32)
    return SceneSample(
        rgb=rgb,
        fg_star=fg,
        bg_star=bg,
        alpha_star=alpha,
        human_region=human,
        object_region=obj,
        seed=int(seed),
    )


def _centroid(mask):
    rows, cols = np.nonzero(mask)
    return rows.mean(), cols.mean()


def interaction_center(scene):
    """Contact centroid for interactive scenes, human centroid otherwise."""
    if scene.interactive:
        contact = scene.human_region & ndimage.binary_dilation(scene.object_region)
        if contact.any():
            return _centroid(contact)
        return _centroid(scene.object_region)
    return _centroid(scene.human_region)


def derive_modalities(scene, cfg=SynthConfig()):
    size = scene.alpha_star.shape[0]
    rng = _rng(scene.seed, _TAG_MODALITY)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    fg_region = scene.human_region | scene.object_region
    ramp = 0.55 + 0.4 * (1 - yy / (size - 1))
    plateau = rng.uniform(0.1, 0.35)
    noise = rng.uniform(-cfg.depth_noise, cfg.depth_noise, (size, size))
    depth = np.clip(np.where(fg_region, plateau, ramp) + noise, 0, 1)

    # segmentation sees the human only
    seg = feather(scene.human_region) * scene.human_region

    cy, cx = interaction_center(scene)
    heat = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * cfg.heatmap_sigma**2))
    heat /= heat.max()
    return ModalityBundle(
        depth=depth.astype(np.float32),
        seg=seg.astype(np.float32),
        heatmap=heat.astype(np.float32),
    )
