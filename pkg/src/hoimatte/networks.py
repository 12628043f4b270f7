"""Network definitions: foreground predictors, discriminator, deviation
estimator (two encoders, one decoder) and the patch refiner.

All tensors are NCHW. Default widths are the full-resolution architecture
divided by four.
"""
import torch
import torch.nn as nn

from .config import ModelConfig

SEGMENTATION = "segmentation"
DEPTH = "depth"


def conv_bn_relu(cin, cout, stride=1):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride, 1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


def deconv_bn_relu(cin, cout, stride=2):
    if stride == 2:
        layer = nn.ConvTranspose2d(cin, cout, 4, 2, 1, bias=False)
    else:
        layer = nn.ConvTranspose2d(cin, cout, 3, 1, 1, bias=False)
    return nn.Sequential(layer, nn.BatchNorm2d(cout), nn.ReLU(inplace=True))


def to_unit(x):
    # tanh output mapped onto [0, 1]
    return (torch.tanh(x) + 1) / 2


def _check_divisible(x, k):
    h, w = x.shape[-2:]
    if h % k or w % k:
        raise ValueError(f"spatial size {h}x{w} must be divisible by {k}")


class FPNetwork(nn.Module):
    """Encoder-fusion-decoder matte predictor for one virtual modality.

    The image encoder sees RGB concatenated with the interaction heatmap; the
    modality encoder sees the segmentation mask or the depth map.
    """

    def __init__(self, widths=(16, 32, 64), modality=SEGMENTATION):
        super().__init__()
        if modality not in (SEGMENTATION, DEPTH):
            raise ValueError(f"unknown modality {modality!r}")
        c1, c2, c3 = widths
        self.modality_kind = modality
        self.image_encoder = nn.Sequential(
            conv_bn_relu(4, c1), conv_bn_relu(c1, c2, 2), conv_bn_relu(c2, c3, 2)
        )
        self.modality_encoder = nn.Sequential(
            conv_bn_relu(1, c1), conv_bn_relu(c1, c2, 2), conv_bn_relu(c2, c3, 2)
        )
        self.fusion = nn.Sequential(
            conv_bn_relu(2 * c3, c3), conv_bn_relu(c3, c3), conv_bn_relu(c3, c3)
        )
        self.decoder = nn.Sequential(
            deconv_bn_relu(c3, c2),
            conv_bn_relu(c2, c2),
            deconv_bn_relu(c2, c1),
            conv_bn_relu(c1, c1),
            nn.Conv2d(c1, 1, 3, 1, 1),
        )

    def forward(self, rgb, modality, heatmap):
        _check_divisible(rgb, 4)
        img = self.image_encoder(torch.cat([rgb, heatmap], 1))
        mod = self.modality_encoder(modality)
        return to_unit(self.decoder(self.fusion(torch.cat([img, mod], 1))))


def fp_forward(net, rgb, modality, heatmap):
    return net(rgb, modality, heatmap)


class Discriminator(nn.Module):
    """Strided conv stack scoring RGB images; one scalar per image."""

    def __init__(self, widths=(16, 32, 64, 64)):
        super().__init__()
        layers = []
        cin = 3
        for w in widths:
            layers += [nn.Conv2d(cin, w, 4, 2, 1), nn.LeakyReLU(0.2, inplace=True)]
            cin = w
        self.features = nn.Sequential(*layers)
        self.score = nn.Conv2d(cin, 1, 1)

    def forward(self, rgb):
        return self.score(self.features(rgb)).mean(dim=(1, 2, 3))


class CLModule(nn.Module):
    """Deviation estimator: one encoder per branch, a shared decoder."""

    def __init__(self, widths=(8, 16, 32, 64)):
        super().__init__()
        self.enc_1 = self._encoder(widths)
        self.enc_2 = self._encoder(widths)
        w1, w2, w3, w4 = widths
        self.dec = nn.Sequential(
            deconv_bn_relu(w4, w3, stride=1),
            conv_bn_relu(w3, w3),
            deconv_bn_relu(w3, w2),
            conv_bn_relu(w2, w2),
            nn.Upsample(scale_factor=2, mode="nearest"),
            conv_bn_relu(w2, w1),
            nn.Upsample(scale_factor=2, mode="nearest"),
            conv_bn_relu(w1, w1),
            nn.Conv2d(w1, 1, 3, 1, 1),
        )

    @staticmethod
    def _encoder(widths):
        w1, w2, w3, w4 = widths
        return nn.Sequential(
            conv_bn_relu(4, w1, 2),
            conv_bn_relu(w1, w2, 2),
            conv_bn_relu(w2, w3, 2),
            conv_bn_relu(w3, w4),
        )

    def forward(self, branch, rgb, alpha):
        if branch not in (1, 2):
            raise ValueError(f"branch must be 1 or 2, got {branch!r}")
        _check_divisible(rgb, 8)
        enc = self.enc_1 if branch == 1 else self.enc_2
        return torch.sigmoid(self.dec(enc(torch.cat([rgb, alpha], 1))))


class RefineNetwork(nn.Module):
    """Five-layer patch refiner over concat(alpha patch, RGB patch).

    The last layer predicts a correction that is added to the input patch and
    clipped to [0, 1]. It starts at zero, so an untrained refiner is the
    identity.
    """

    def __init__(self, widths=(4, 8, 8, 4)):
        super().__init__()
        layers = []
        cin = 4
        for w in widths:
            layers.append(conv_bn_relu(cin, w))
            cin = w
        head = nn.Conv2d(cin, 1, 3, 1, 1)
        nn.init.zeros_(head.weight)
        nn.init.zeros_(head.bias)
        layers.append(head)
        self.body = nn.Sequential(*layers)

    def forward(self, alpha, rgb):
        return (alpha + self.body(torch.cat([alpha, rgb], 1))).clamp(0, 1)


class MattingSystem(nn.Module):
    """Every trainable part of the pipeline, checkpointed as one unit.

    Branch 1 is the segmentation predictor, branch 2 the depth predictor.
    """

    def __init__(self, model=ModelConfig()):
        super().__init__()
        self.fp = nn.ModuleList(
            [FPNetwork(tuple(model.fp_widths), SEGMENTATION), FPNetwork(tuple(model.fp_widths), DEPTH)]
        )
        self.disc = nn.ModuleList(
            [Discriminator(tuple(model.disc_widths)), Discriminator(tuple(model.disc_widths))]
        )
        self.cl = CLModule(tuple(model.cl_widths))
        self.rn = RefineNetwork(tuple(model.rn_widths))

    def predict(self, branch, rgb, depth, seg, heatmap):
        modality = seg if branch == 1 else depth
        return self.fp[branch - 1](rgb, modality, heatmap)


def build_system(model=ModelConfig(), seed=0):
    torch.manual_seed(seed)
    return MattingSystem(model)
