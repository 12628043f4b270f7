import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from hoimatte.losses import alpha_loss
from hoimatte.networks import RefineNetwork
from hoimatte.refine import (
    PATCH_SIZE,
    PatchOverlapError,
    PatchSet,
    merge_patches,
    refine_patches,
    select_topk_patches,
    select_windows,
    window_for,
)

from oracles import finite_difference_check


def test_single_hot_pixel_centred():
    dev = np.zeros((64, 64))
    dev[30, 40] = 1.0
    centers, windows = select_windows(dev, 1)
    assert centers == [(30, 40)]
    assert windows == [(23, 33)]


def test_border_window_clamped():
    assert window_for((0, 63), (64, 64)) == (0, 48)
    assert window_for((63, 2), (64, 64)) == (48, 0)


def test_constant_map_tie_break():
    centers, windows = select_windows(np.ones((32, 32)), 2)
    assert centers == [(0, 0), (0, 23)]
    assert windows == [(0, 0), (0, 16)]


def test_fewer_windows_when_none_fit():
    centers, windows = select_windows(np.ones((16, 16)), 3)
    assert len(windows) == 1


def test_select_rejects_small_or_negative():
    with pytest.raises(ValueError):
        select_windows(np.zeros((8, 8)), 1)
    with pytest.raises(ValueError):
        select_windows(np.zeros((32, 32)), -1)


def _greedy_bf(dev, k, size=PATCH_SIZE):
    h, w = dev.shape
    cells = sorted(((-dev[i, j], i, j) for i in range(h) for j in range(w)))
    wins, cens = [], []
    for _, i, j in cells:
        if len(wins) == k:
            break
        r = min(max(i - (size // 2 - 1), 0), h - size)
        c = min(max(j - (size // 2 - 1), 0), w - size)
        if all(abs(r - r2) >= size or abs(c - c2) >= size for r2, c2 in wins):
            wins.append((r, c))
            cens.append((i, j))
    return cens, wins


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 6), st.sampled_from([16, 24, 40]))
def test_selection_matches_bruteforce(seed, k, size):
    g = np.random.default_rng(seed)
    dev = np.round(g.random((size, size + 8)), 2)  # rounding forces ties
    got = select_windows(dev, k)
    assert got == _greedy_bf(dev, k)
    wins = got[1]
    for i in range(len(wins)):
        for j in range(i + 1, len(wins)):
            a, b = wins[i], wins[j]
            assert abs(a[0] - b[0]) >= PATCH_SIZE or abs(a[1] - b[1]) >= PATCH_SIZE


def test_patch_contents():
    g = np.random.default_rng(1)
    dev, alpha, rgb = g.random((48, 48)), g.random((48, 48)), g.random((48, 48, 3))
    ps = select_topk_patches(dev, alpha, rgb, 3)
    assert ps.patches_alpha.shape == (3, 16, 16)
    assert ps.patches_rgb.shape == (3, 16, 16, 3)
    for (r, c), pa, pr in zip(ps.windows, ps.patches_alpha, ps.patches_rgb):
        assert np.array_equal(pa, alpha[r:r + 16, c:c + 16])
        assert np.array_equal(pr, rgb[r:r + 16, c:c + 16])


def test_refine_shapes_and_empty():
    torch.manual_seed(0)
    rn = RefineNetwork().eval()
    g = np.random.default_rng(2)
    ps = select_topk_patches(g.random((64, 64)), g.random((64, 64)), g.random((64, 64, 3)), 4)
    out = refine_patches(rn, ps)
    assert out.shape == (4, 16, 16)
    assert out.min() >= 0 and out.max() <= 1
    empty = select_topk_patches(g.random((64, 64)), g.random((64, 64)), g.random((64, 64, 3)), 0)
    assert refine_patches(rn, empty).shape == (0, 16, 16)


def test_untrained_refiner_is_identity():
    g = np.random.default_rng(4)
    a = torch.from_numpy(g.random((5, 1, 16, 16))).float()
    rgb = torch.from_numpy(g.random((5, 3, 16, 16))).float()
    for mode in ("train", "eval"):
        rn = getattr(RefineNetwork(), mode)()
        with torch.no_grad():
            assert torch.equal(rn(a, rgb), a)


def test_patch_alpha_loss_gradient_check():
    torch.manual_seed(5)
    rn = RefineNetwork((2, 2, 2, 2)).double().train()
    # the head starts at zero; randomise it so every layer receives gradient
    torch.nn.init.normal_(rn.body[-1].weight, std=0.3)
    g = np.random.default_rng(5)
    f = lambda *s: torch.from_numpy(g.random(s))
    a, rgb, a_star = f(3, 1, 16, 16), f(3, 3, 16, 16), f(3, 1, 16, 16)
    errs = finite_difference_check(lambda: alpha_loss(rn(a, rgb), a_star), list(rn.parameters()), n=200)
    assert (errs < 1e-3).mean() >= 0.95


def test_merge_replaces_only_windows():
    g = np.random.default_rng(3)
    alpha = g.random((64, 64))
    ps = select_topk_patches(g.random((64, 64)), alpha, g.random((64, 64, 3)), 4)
    refined = np.full((4, 16, 16), 0.25)
    out = merge_patches(alpha, ps, refined)
    mask = np.zeros((64, 64), bool)
    for r, c in ps.windows:
        mask[r:r + 16, c:c + 16] = True
    assert np.all(out[mask] == 0.25)
    assert np.array_equal(out[~mask], alpha[~mask])
    assert not np.shares_memory(out, alpha)


def test_merge_identity_patches_is_noop():
    g = np.random.default_rng(4)
    alpha = g.random((32, 32))
    ps = select_topk_patches(g.random((32, 32)), alpha, g.random((32, 32, 3)), 4)
    assert np.array_equal(merge_patches(alpha, ps, ps.patches_alpha), alpha)


def test_merge_overlap_raises():
    ps = PatchSet(centers=[(7, 7), (10, 10)], windows=[(0, 0), (3, 3)])
    with pytest.raises(PatchOverlapError):
        merge_patches(np.zeros((32, 32)), ps, np.zeros((2, 16, 16)))


def test_merge_count_mismatch():
    ps = PatchSet(centers=[(7, 7)], windows=[(0, 0)])
    with pytest.raises(ValueError):
        merge_patches(np.zeros((32, 32)), ps, np.zeros((2, 16, 16)))
