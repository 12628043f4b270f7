"""
Top-K patch refinement
======================

Pick the highest-deviation windows of a matte, run them through an
(untrained) refiner and merge them back. Only the selected windows change.
"""
import numpy as np
import torch

from hoimatte.networks import RefineNetwork
from hoimatte.refine import merge_patches, refine_patches, select_topk_patches
from hoimatte.scene import synth_scene

sc = synth_scene(7)
rng = np.random.default_rng(0)
noisy = np.clip(sc.alpha_star + rng.normal(0, 0.05, sc.alpha_star.shape), 0, 1)
dev = np.abs(noisy - sc.alpha_star)

ps = select_topk_patches(dev, noisy, sc.rgb, k=4)
print("centres:", ps.centers)
print("windows:", ps.windows)

# an untrained refiner returns its input patch unchanged, so perturb its
# output layer to get a visible (if meaningless) correction
torch.manual_seed(0)
rn = RefineNetwork().eval()
torch.nn.init.normal_(rn.body[-1].weight, std=0.05)
with torch.no_grad():
    refined = refine_patches(rn, ps)
merged = merge_patches(noisy, ps, refined)

changed = merged != noisy
inside = np.zeros_like(changed)
for r, c in ps.windows:
    inside[r:r + 16, c:c + 16] = True
print("pixels changed:", int(changed.sum()), "all inside windows:", bool(not (changed & ~inside).any()))
