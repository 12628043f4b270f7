"""Losses for the foreground-prediction stages.

Mattes are (N, 1, H, W) tensors, colour images (N, 3, H, W). A discriminator
is any callable mapping an image batch to one score per image.
"""
import torch
import torch.nn.functional as F


def composite_t(fg, bg, alpha):
    """Differentiable compositing, clamped to [0, 1]."""
    return (alpha * fg + (1 - alpha) * bg).clamp(0, 1)


def forward_gradients(x):
    """Forward differences along x and y with a replicated last row/column."""
    dx = F.pad(x[..., :, 1:] - x[..., :, :-1], (0, 1, 0, 0))
    dy = F.pad(x[..., 1:, :] - x[..., :-1, :], (0, 0, 0, 1))
    return dx, dy


def alpha_loss(a, a_star):
    """Mean absolute matte error plus mean absolute gradient error."""
    if a.shape != a_star.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(a_star.shape)}")
    dxa, dya = forward_gradients(a)
    dxs, dys = forward_gradients(a_star)
    data = (a - a_star).abs().mean()
    grad = (dxa - dxs).abs().mean() + (dya - dys).abs().mean()
    return data + grad


def composite_loss(a, fg_star, bg_star, rgb):
    return (a * fg_star + (1 - a) * bg_star - rgb).abs().mean()


def adversarial_term(a, fg, bbar, disc):
    return ((disc(composite_t(fg, bbar, a)) - 1) ** 2).mean()


def generator_loss_stage1(a, fg_star, bg_star, rgb, bbar, disc, a_star,
                          lambda_a=1.0, lambda_com=0.5):
    return (
        adversarial_term(a, fg_star, bbar, disc)
        + lambda_a * alpha_loss(a, a_star)
        + lambda_com * composite_loss(a, fg_star, bg_star, rgb)
    )


def discriminator_loss(disc, a, fg_star, bbar, real_rgb):
    """Least-squares objective: fakes scored toward 0, real images toward 1."""
    fake = disc(composite_t(fg_star, bbar, a))
    real = disc(real_rgb)
    return (fake**2).mean() + ((real - 1) ** 2).mean()


def generator_loss_stage2(a, fg, bbar, disc, cl_value, lambda_cl=1.0):
    """Self-supervised generator loss.

    Without labels the true foreground is unknown, so callers pass the input
    image as ``fg``.
    """
    return adversarial_term(a, fg, bbar, disc) + lambda_cl * cl_value
