"""Deviation maps and the cross-branch supervision built on them.

Deviation maps are (N, 1, H, W) tensors in [0, 1]; high values mark pixels
where a branch's matte is likely wrong.
"""
import numpy as np
import torch
import torch.nn.functional as F

DILATION_SIZE = 5


def q_operator(residual, size=DILATION_SIZE):
    """Broaden a residual map: grey dilation with a square element, then clamp."""
    if (residual < 0).any():
        raise ValueError("residual must be nonnegative")
    squeeze = residual.dim() == 2
    x = residual[None, None] if squeeze else residual
    out = F.max_pool2d(x, size, stride=1, padding=size // 2).clamp(0, 1)
    return out[0, 0] if squeeze else out


def cl_forward(module, branch, rgb, alpha):
    return module(branch, rgb, alpha)


def cl_training_loss(pred, residual):
    return (pred - q_operator(residual)).abs().mean()


def threshold_update(cl, tau=0.5):
    """Saturate every entry above ``tau`` to 1."""
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return torch.where(cl > tau, torch.ones_like(cl), cl)


def complementary_area(cl1, cl2):
    """Per-pixel masks of where each branch defers to the other."""
    if cl1.shape != cl2.shape:
        raise ValueError(f"shape mismatch: {tuple(cl1.shape)} vs {tuple(cl2.shape)}")
    return cl1 > cl2, cl2 > cl1


def deviation_correction_area(cl1, cl2):
    """Pixels where both (threshold-updated) branches are unreliable."""
    return (cl1 == 1) & (cl2 == 1)


def cl_loss_terms(a1, a2, cl1, cl2, m, tau=0.5):
    """Return ``(L_cs, L_dc)`` for branch ``m``.

    ``cl1``/``cl2`` are the raw deviation outputs. The area maps come from
    detached, threshold-updated copies; the counterpart matte is a detached
    target, and the deviation-correction term keeps the live output of branch
    ``m`` so its gradient flows back into that branch's matte.
    """
    if m not in (1, 2):
        raise ValueError(f"m must be 1 or 2, got {m!r}")
    t1 = threshold_update(cl1.detach(), tau)
    t2 = threshold_update(cl2.detach(), tau)
    beta = complementary_area(t1, t2)[m - 1].to(a1.dtype)
    sigma = deviation_correction_area(t1, t2).to(a1.dtype)
    own, other = (a1, a2) if m == 1 else (a2, a1)
    live = cl1 if m == 1 else cl2
    l_cs = (beta * (own - other.detach()).abs()).mean()
    l_dc = (sigma * live**2).mean()
    return l_cs, l_dc


def cl_loss(a1, a2, cl1, cl2, m, lambda_cs=6.0, lambda_dc=1.0, tau=0.5):
    l_cs, l_dc = cl_loss_terms(a1, a2, cl1, cl2, m, tau)
    return lambda_cs * l_cs + lambda_dc * l_dc


def deviation_to_uint8(dev):
    """8-bit visualisation, ``round-half-even(value * 255)``."""
    dev = dev.detach().cpu().numpy() if isinstance(dev, torch.Tensor) else np.asarray(dev)
    return np.rint(np.clip(dev, 0, 1) * 255).astype(np.uint8)
