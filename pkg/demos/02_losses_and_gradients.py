"""
Matting losses on a toy batch
=============================

Evaluate the alpha loss, the compositional loss and the stage-one generator
loss on a small batch, then confirm by finite differences that autograd
gives the right gradient for a tiny predictor.
"""
import numpy as np
import torch

from hoimatte.losses import alpha_loss, composite_loss, discriminator_loss, generator_loss_stage1
from hoimatte.networks import Discriminator, FPNetwork
from hoimatte.scene import derive_modalities, synth_scene

torch.manual_seed(0)
scenes = [synth_scene(s) for s in range(4)]
chw = lambda key: torch.from_numpy(np.stack([getattr(s, key) for s in scenes])).permute(0, 3, 1, 2).double()
rgb, fg, bg = chw("rgb"), chw("fg_star"), chw("bg_star")
a_star = torch.from_numpy(np.stack([s.alpha_star for s in scenes]))[:, None].double()
mods = [derive_modalities(s) for s in scenes]
seg = torch.from_numpy(np.stack([m.seg for m in mods]))[:, None].double()
heat = torch.from_numpy(np.stack([m.heatmap for m in mods]))[:, None].double()

# the ground truth is a zero of both supervised losses
print("L_a(a*, a*)        =", alpha_loss(a_star, a_star).item())
print("L_com(a*)          =", composite_loss(a_star, fg, bg, rgb).item())

net = FPNetwork((4, 4, 4)).double()
a = net(rgb, seg, heat)
print("L_a(untrained)     =", round(alpha_loss(a, a_star).item(), 4))

# adversarial terms use a second background in place of the true one
bbar = torch.flip(bg, dims=[0])
disc = Discriminator((4, 4, 4, 4)).double()
print("L_G1               =", round(generator_loss_stage1(a, fg, bg, rgb, bbar, disc, a_star).item(), 4))
print("L_D                =", round(discriminator_loss(disc, a.detach(), fg, bbar, rgb).item(), 4))

# central differences on one weight against autograd
w = net.decoder[-1].weight
loss = lambda: alpha_loss(net(rgb, seg, heat), a_star) + 0.5 * composite_loss(net(rgb, seg, heat), fg, bg, rgb)
w.grad = None
loss().backward()
analytic = w.grad[0, 0, 1, 1].item()
eps = 1e-6
with torch.no_grad():
    w[0, 0, 1, 1] += eps
    up = loss().item()
    w[0, 0, 1, 1] -= 2 * eps
    down = loss().item()
    w[0, 0, 1, 1] += eps
print(f"d loss / d w: autograd {analytic:.6e}, finite difference {(up - down) / (2 * eps):.6e}")
