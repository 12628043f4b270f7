"""
Deviation maps and cross-branch supervision
===========================================

Build two hand-made mattes and deviation maps and look at which pixels each
branch defers on (beta), where both are unreliable (sigma), and the two
loss terms that result.
"""
import numpy as np
import torch

from hoimatte.complementary import (
    cl_loss_terms,
    complementary_area,
    deviation_correction_area,
    q_operator,
    threshold_update,
)

h = w = 8
rows, cols = np.indices((h, w))
truth = ((rows >= 2) & (cols >= 2) & (cols < 6)).astype(float)

# branch 1 misses the right half of the object, branch 2 blurs the left edge
a1 = truth.copy()
a1[:, 4:] = 0
a2 = truth.copy()
a2[:, 2] = 0.5
t = lambda x: torch.tensor(x)[None, None]

# deviation maps broaden the residual so the estimator sees a margin
c1 = q_operator(t(np.abs(a1 - truth))) * 0.9
c2 = q_operator(t(np.abs(a2 - truth))) * 0.6
c1[..., 7, 7] = c2[..., 7, 7] = 0.8  # one pixel both get wrong

u1, u2 = threshold_update(c1, 0.5), threshold_update(c2, 0.5)
b1, b2 = complementary_area(u1, u2)
sigma = deviation_correction_area(u1, u2)
print("branch 1 defers on", int(b1.sum()), "pixels; branch 2 on", int(b2.sum()))
print("both unreliable on", int(sigma.sum()), "pixels")
assert not (b1 & b2).any() and not (b1 & sigma).any() and not (b2 & sigma).any()

for m in (1, 2):
    l_cs, l_dc = cl_loss_terms(t(a1), t(a2), c1, c2, m)
    print(f"branch {m}: L_cs = {l_cs.item():.4f}, L_dc = {l_dc.item():.4f}")

print("beta_1 (1 = branch 1 copies branch 2):")
print(b1[0, 0].int().numpy())
