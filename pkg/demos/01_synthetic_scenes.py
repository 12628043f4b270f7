"""
Synthetic human-object scenes
=============================

Render a few scenes, check the compositing identity, and save the inputs the
two predictors see (depth for one branch, segmentation for the other) as
PNG strips.
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from hoimatte.metrics import to_uint8
from hoimatte.scene import composite, derive_modalities, synth_scene

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/scenes")
out.mkdir(parents=True, exist_ok=True)

# a scene is a foreground, a background and a feathered matte
for seed in range(6):
    sc = synth_scene(seed)
    assert np.array_equal(sc.rgb, composite(sc.fg_star, sc.bg_star, sc.alpha_star))
    mods = derive_modalities(sc)
    kind = "human+object" if sc.interactive else "human only"
    soft = ((sc.alpha_star > 0) & (sc.alpha_star < 1)).mean()
    print(f"seed {seed}: {kind:12s} soft-alpha fraction {soft:.3f}")

    # segmentation only covers the person, depth covers person and object
    gray = [np.repeat(m[..., None], 3, axis=2) for m in (sc.alpha_star, mods.seg, mods.depth, mods.heatmap)]
    strip = np.concatenate([sc.rgb] + gray, axis=1)
    Image.fromarray(to_uint8(strip)).save(out / f"scene_{seed}.png")

print(f"strips (rgb | alpha | seg | depth | heatmap) written to {out}")
