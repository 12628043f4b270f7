"""On-disk synthetic corpus: one directory per split, one container per sample.

Layout::

    corpus/
      manifest.json
      pretrain/000000.npz
      labeled-train/000000.npz
      ...

Each sample container holds float32 arrays ``rgb, fg, bg, alpha, depth, seg,
heatmap, human_mask, object_mask``.
"""
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .containers import array_checksum, load_arrays, save_arrays
from .scene import SynthConfig, derive_modalities, synth_background, synth_scene

FORMAT_VERSION = 1
SPLITS = ("pretrain", "labeled-train", "labeled-test", "unlabeled-train", "unlabeled-test")
LABEL_KEYS = ("alpha", "fg", "bg")
INPUT_KEYS = ("rgb", "depth", "seg", "heatmap")
REGION_KEYS = ("human_mask", "object_mask")
THREADS_ENV = "HOIMATTE_LOADER_THREADS"

# split index used as the seed-stream tag; the background pool uses its own
_SPLIT_TAG = {name: i for i, name in enumerate(SPLITS)}
_BBAR_TAG = 100


class CorpusError(FileNotFoundError):
    pass


class LabelAccessError(RuntimeError):
    """Raised when ground truth is requested from an unlabeled view."""


def split_seeds(seed, split, n):
    ss = np.random.SeedSequence([int(seed), _SPLIT_TAG[split]])
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]


def bbar_seeds(seed, n):
    ss = np.random.SeedSequence([int(seed), _BBAR_TAG])
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]


def background_pool(seed, n, size=64):
    return np.stack([synth_background(s, size) for s in bbar_seeds(seed, n)])


def sample_arrays(seed, cfg=SynthConfig()):
    scene = synth_scene(seed, cfg)
    mods = derive_modalities(scene, cfg)
    f32 = np.float32
    return {
        "rgb": scene.rgb.astype(f32),
        "fg": scene.fg_star.astype(f32),
        "bg": scene.bg_star.astype(f32),
        "alpha": scene.alpha_star.astype(f32),
        "depth": mods.depth.astype(f32),
        "seg": mods.seg.astype(f32),
        "heatmap": mods.heatmap.astype(f32),
        "human_mask": scene.human_region.astype(f32),
        "object_mask": scene.object_region.astype(f32),
    }


def _split_cfg(split, cfg):
    # pretraining mimics a human-only matting set
    if split == "pretrain":
        return SynthConfig(**{**cfg.to_dict(), "object_probability": 0.0})
    return cfg


def write_corpus(out_dir, sizes, seed=0, synth=SynthConfig(), force=False):
    """Generate every split; ``sizes`` maps split name to sample count."""
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise FileExistsError(f"{out} is not empty; pass force=True to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": FORMAT_VERSION,
        "seed": int(seed),
        "synth": synth.to_dict(),
        "splits": {},
    }
    for split in SPLITS:
        n = int(sizes.get(split, 0))
        d = out / split
        d.mkdir(exist_ok=True)
        for stale in d.glob("*.npz"):
            stale.unlink()
        scfg = _split_cfg(split, synth)
        rows = []
        for i, s in enumerate(split_seeds(seed, split, n)):
            arrays = sample_arrays(s, scfg)
            name = f"{i:06d}.npz"
            save_arrays(d / name, arrays)
            rows.append(
                {
                    "file": name,
                    "seed": s,
                    "interactive": bool(arrays["object_mask"].any()),
                    "checksum": array_checksum(arrays),
                }
            )
        manifest["splits"][split] = {
            "count": n,
            "interactive": sum(r["interactive"] for r in rows),
            "checksum": _combine([r["checksum"] for r in rows]),
            "samples": rows,
        }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


def _combine(checksums):
    h = hashlib.sha256()
    for c in checksums:
        h.update(c.encode())
    return h.hexdigest()


def read_manifest(corpus_dir):
    path = Path(corpus_dir) / "manifest.json"
    if not path.is_file():
        raise CorpusError(f"corpus manifest not found: {path}")
    with open(path) as fh:
        return json.load(fh)


@dataclass
class SplitData:
    """A split stacked into arrays: images (N, H, W, 3), maps (N, H, W)."""

    name: str
    seeds: list
    rgb: np.ndarray
    depth: np.ndarray
    seg: np.ndarray
    heatmap: np.ndarray
    alpha: np.ndarray = None
    fg: np.ndarray = None
    bg: np.ndarray = None
    human_mask: np.ndarray = None
    object_mask: np.ndarray = None

    def __len__(self):
        return len(self.seeds)

    def unlabeled(self):
        return UnlabeledView(self)


class UnlabeledView:
    """Inputs of a split with the ground truth withheld."""

    def __init__(self, data):
        self.name = data.name
        self.seeds = data.seeds
        self.rgb = data.rgb
        self.depth = data.depth
        self.seg = data.seg
        self.heatmap = data.heatmap

    def __len__(self):
        return len(self.seeds)

    def __getattr__(self, name):
        if name in LABEL_KEYS or name in REGION_KEYS or name in ("alpha_star", "fg_star", "bg_star"):
            raise LabelAccessError(f"ground truth {name!r} is withheld in unlabeled split {self.name!r}")
        raise AttributeError(name)


def _loader_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def load_split(corpus_dir, split, limit=None):
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    manifest = read_manifest(corpus_dir)
    entry = manifest["splits"].get(split)
    if entry is None:
        raise CorpusError(f"split {split!r} missing from corpus {corpus_dir}")
    rows = entry["samples"][:limit] if limit else entry["samples"]
    d = Path(corpus_dir) / split

    def read(row):
        path = d / row["file"]
        if not path.is_file():
            raise CorpusError(f"sample file missing: {path}")
        return load_arrays(path)[0]

    workers = _loader_threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            samples = list(pool.map(read, rows))
    else:
        samples = [read(r) for r in rows]

    def stack(key):
        return np.stack([s[key] for s in samples]) if samples else np.zeros((0,), np.float32)

    return SplitData(
        name=split,
        seeds=[r["seed"] for r in rows],
        rgb=stack("rgb"),
        depth=stack("depth"),
        seg=stack("seg"),
        heatmap=stack("heatmap"),
        alpha=stack("alpha"),
        fg=stack("fg"),
        bg=stack("bg"),
        human_mask=stack("human_mask").astype(bool),
        object_mask=stack("object_mask").astype(bool),
    )
