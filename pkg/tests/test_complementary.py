import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hoimatte.complementary import (
    cl_forward,
    cl_loss,
    cl_loss_terms,
    cl_training_loss,
    complementary_area,
    deviation_correction_area,
    deviation_to_uint8,
    q_operator,
    threshold_update,
)
from hoimatte.networks import CLModule

from oracles import cl_terms_bf, dilate_bf, finite_difference_check


def rand(*shape, seed=0):
    return torch.from_numpy(np.random.default_rng(seed).random(shape))


# -- Q operator ----------------------------------------------------------------


def test_q_single_spike():
    x = torch.zeros(7, 7, dtype=torch.float64)
    x[3, 3] = 0.4
    out = q_operator(x)
    assert torch.all(out[1:6, 1:6] == 0.4)
    assert out.sum().item() == pytest.approx(0.4 * 25)


def test_q_clamps_to_one():
    x = torch.full((4, 4), 1.7, dtype=torch.float64)
    assert torch.all(q_operator(x) == 1)


def test_q_matches_bruteforce():
    for seed in range(5):
        x = rand(8, 8, seed=seed) * 1.3
        assert np.allclose(q_operator(x).numpy(), dilate_bf(x.numpy()), rtol=0, atol=0)


def test_q_batched_equals_per_image():
    x = rand(3, 1, 8, 8, seed=9)
    out = q_operator(x)
    for i in range(3):
        assert torch.equal(out[i, 0], q_operator(x[i, 0]))


def test_q_rejects_negative():
    with pytest.raises(ValueError):
        q_operator(torch.tensor([[0.1, -0.2]]))


# -- CL module -----------------------------------------------------------------


def test_cl_forward_contract():
    torch.manual_seed(0)
    cl = CLModule().eval()
    rgb, a = torch.rand(2, 3, 64, 64), torch.rand(2, 1, 64, 64)
    for branch in (1, 2):
        out = cl_forward(cl, branch, rgb, a)
        assert out.shape == (2, 1, 64, 64)
        assert out.min() >= 0 and out.max() <= 1
    assert not torch.equal(cl_forward(cl, 1, rgb, a), cl_forward(cl, 2, rgb, a))


def test_cl_forward_rejects_bad_branch_and_size():
    cl = CLModule((2, 2, 2, 2))
    with pytest.raises(ValueError):
        cl(3, torch.rand(1, 3, 16, 16), torch.rand(1, 1, 16, 16))
    with pytest.raises(ValueError):
        cl(1, torch.rand(1, 3, 12, 12), torch.rand(1, 1, 12, 12))


def test_cl_training_loss_values():
    res = torch.zeros(1, 1, 8, 8, dtype=torch.float64)
    assert cl_training_loss(torch.zeros_like(res), res).item() == 0
    assert cl_training_loss(torch.ones_like(res), res).item() == 1
    res[0, 0, 4, 4] = 0.5
    # a perfect prediction of the dilated residual costs nothing
    assert cl_training_loss(q_operator(res), res).item() == 0


def test_cl_training_loss_matches_bruteforce():
    pred, res = rand(8, 8, seed=1), rand(8, 8, seed=2) * 0.6
    q = dilate_bf(res.numpy())
    expected = np.abs(pred.numpy() - q).sum() / 64
    assert cl_training_loss(pred[None, None], res[None, None]).item() == pytest.approx(expected, rel=1e-12)


def test_cl_training_loss_gradient_check():
    torch.manual_seed(4)
    cl = CLModule((2, 2, 2, 2)).double().train()
    g = np.random.default_rng(4)
    f = lambda *s: torch.from_numpy(g.random(s))
    rgb, a, a_star = f(2, 3, 16, 16), f(2, 1, 16, 16), f(2, 1, 16, 16)
    res = (a - a_star).abs()

    def loss():
        return cl_training_loss(cl(1, rgb, a), res) + cl_training_loss(cl(2, rgb, a), res)

    errs = finite_difference_check(loss, list(cl.parameters()), n=200)
    assert (errs < 1e-3).mean() >= 0.95


# -- threshold update and area maps --------------------------------------------


def test_threshold_examples():
    x = torch.tensor([0.2, 0.5, 0.51, 0.9, 1.0])
    assert threshold_update(x, 0.5).tolist() == pytest.approx([0.2, 0.5, 1.0, 1.0, 1.0])


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.5])
def test_threshold_rejects_tau(tau):
    with pytest.raises(ValueError):
        threshold_update(torch.zeros(2), tau)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, (6, 6), elements=st.floats(0, 1)),
    st.floats(0.01, 0.99),
)
def test_threshold_idempotent(x, tau):
    t = torch.from_numpy(x)
    once = threshold_update(t, tau)
    assert torch.equal(threshold_update(once, tau), once)
    assert torch.all(once >= t)


def test_beta_sigma_disjoint_on_random_pairs():
    g = np.random.default_rng(0)
    # mix of continuous values and exact ties / saturated entries
    c1 = g.random(10_000)
    c2 = g.random(10_000)
    c2[:2000] = c1[:2000]
    c1[2000:3000] = 1.0
    c2[2500:3500] = 1.0
    t1 = threshold_update(torch.from_numpy(c1), 0.5)
    t2 = threshold_update(torch.from_numpy(c2), 0.5)
    b1, b2 = complementary_area(t1, t2)
    s = deviation_correction_area(t1, t2)
    assert not torch.any(b1 & b2)
    assert not torch.any(b1 & s)
    assert not torch.any(b2 & s)
    assert s.sum() > 0 and b1.sum() > 0 and b2.sum() > 0


def test_complementary_area_shape_mismatch():
    with pytest.raises(ValueError):
        complementary_area(torch.zeros(2, 2), torch.zeros(2, 3))


def test_ties_supervise_nobody():
    c = torch.full((3, 3), 0.3)
    b1, b2 = complementary_area(c, c)
    assert not b1.any() and not b2.any()


# -- cross-branch losses -------------------------------------------------------


def test_cl_loss_hand_example():
    a1 = torch.tensor([[0.0, 1.0], [0.5, 0.2]], dtype=torch.float64)
    a2 = torch.tensor([[1.0, 1.0], [0.0, 0.6]], dtype=torch.float64)
    c1 = torch.tensor([[0.4, 0.9], [0.1, 0.8]], dtype=torch.float64)
    c2 = torch.tensor([[0.2, 0.7], [0.3, 0.1]], dtype=torch.float64)
    # after thresholding: c1 -> [.4, 1, .1, 1], c2 -> [.2, 1, .3, .1]
    # branch 1 defers at (0,0) and (1,1); both saturated at (0,1)
    l_cs, l_dc = cl_loss_terms(a1, a2, c1, c2, 1)
    assert l_cs.item() == pytest.approx((1.0 + 0.4) / 4)
    assert l_dc.item() == pytest.approx(0.81 / 4)
    l_cs2, l_dc2 = cl_loss_terms(a1, a2, c1, c2, 2)
    assert l_cs2.item() == pytest.approx(0.5 / 4)
    assert l_dc2.item() == pytest.approx(0.49 / 4)
    total = cl_loss(a1, a2, c1, c2, 1, lambda_cs=6, lambda_dc=1)
    assert total.item() == pytest.approx(6 * 1.4 / 4 + 0.81 / 4)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("m", [1, 2])
def test_cl_terms_match_bruteforce(seed, m):
    g = np.random.default_rng(seed)
    a1, a2, c1, c2 = (g.random((8, 8)) for _ in range(4))
    c1[:2] = c2[:2]  # exact ties
    t = lambda x: torch.from_numpy(x)
    got = cl_loss_terms(t(a1), t(a2), t(c1), t(c2), m)
    exp = cl_terms_bf(a1.tolist(), a2.tolist(), c1.tolist(), c2.tolist(), m)
    assert got[0].item() == pytest.approx(exp[0], rel=1e-6, abs=1e-15)
    assert got[1].item() == pytest.approx(exp[1], rel=1e-6, abs=1e-15)


def test_cl_loss_rejects_bad_branch():
    x = torch.zeros(2, 2)
    with pytest.raises(ValueError):
        cl_loss_terms(x, x, x, x, 0)


def test_supervising_branch_gets_zero_cs_gradient():
    g = np.random.default_rng(7)
    a1 = torch.tensor(g.random((1, 1, 8, 8)), requires_grad=True)
    a2 = torch.tensor(g.random((1, 1, 8, 8)), requires_grad=True)
    c1 = torch.tensor(g.random((1, 1, 8, 8)))
    c2 = torch.tensor(g.random((1, 1, 8, 8)))
    l_cs, _ = cl_loss_terms(a1, a2, c1, c2, 1)
    l_cs.backward()
    assert a2.grad is None or torch.all(a2.grad == 0)
    assert a1.grad.abs().sum() > 0


def test_dc_gradient_reaches_live_deviation_only():
    c1 = torch.full((1, 1, 4, 4), 0.9, dtype=torch.float64, requires_grad=True)
    c2 = torch.full((1, 1, 4, 4), 0.8, dtype=torch.float64, requires_grad=True)
    a = torch.zeros(1, 1, 4, 4, dtype=torch.float64)
    _, l_dc = cl_loss_terms(a, a, c1, c2, 1)
    l_dc.backward()
    assert torch.allclose(c1.grad, torch.full_like(c1, 2 * 0.9 / 16))
    assert c2.grad is None or torch.all(c2.grad == 0)


def test_deviation_to_uint8():
    out = deviation_to_uint8(torch.tensor([0.0, 0.5, 1.0, 1.2, -0.1, 2.5 / 255]))
    assert out.dtype == np.uint8
    assert out.tolist() == [0, 128, 255, 255, 0, 2]
