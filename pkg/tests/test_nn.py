import numpy as np
import pytest

from landmarkseg.autodiff import Tensor, gradcheck, mul, softmax, tensor_sum
from landmarkseg.errors import DimensionError, ValidationError
from landmarkseg.nn import (
    ResidualBlock,
    cross_entropy_loss,
    kl_loss,
    mse_loss,
    reparameterize,
    segmentation_loss,
    soft_dice_loss,
)


class TestResidualBlock:
    def test_zero_weights_equal_channels_is_relu(self, rng):
        block = ResidualBlock(3, 3, rng)
        for _, p in block.named_parameters():
            p.data[:] = 0.0
        x = rng.standard_normal((3, 5, 5))
        assert np.allclose(block.forward(Tensor(x)).data, np.maximum(x, 0.0))

    def test_projection_present_iff_channel_change(self, rng):
        assert ResidualBlock(3, 3, rng).projection is None
        assert ResidualBlock(3, 5, rng).projection is not None

    @pytest.mark.parametrize("shape", [(2, 6, 6), (2, 4, 8)])
    def test_preserves_spatial_size(self, rng, shape):
        block = ResidualBlock(2, 4, rng)
        out = block.forward(Tensor(rng.standard_normal(shape)))
        assert out.shape == (4,) + shape[1:]

    def test_channel_mismatch(self, rng):
        block = ResidualBlock(2, 4, rng)
        with pytest.raises(DimensionError):
            block.forward(Tensor(np.ones((3, 4, 4))))

    def test_gradcheck_through_block(self, rng):
        block = ResidualBlock(2, 3, rng)
        x = Tensor(rng.standard_normal((2, 4, 4)), requires_grad=True)
        r = Tensor(rng.standard_normal((3, 4, 4)))
        params = [x] + [p for _, p in block.named_parameters()]
        gradcheck(lambda *a: tensor_sum(mul(block.forward(x), r)), params)


class TestReparameterize:
    def test_zero_noise_gives_mu(self, rng):
        mu = rng.standard_normal(5)
        out = reparameterize(Tensor(mu), Tensor(np.zeros(5)), Tensor(np.zeros(5)))
        assert np.allclose(out.data, mu)

    def test_standard_normal_identity(self, rng):
        eps = rng.standard_normal(5)
        out = reparameterize(Tensor(np.zeros(5)), Tensor(np.zeros(5)), Tensor(eps))
        assert np.allclose(out.data, eps)

    def test_monte_carlo_moments(self):
        gen = np.random.default_rng(7)
        eps = gen.standard_normal(100_000)
        out = reparameterize(Tensor(np.full(100_000, 2.0)),
                             Tensor(np.zeros(100_000)), Tensor(eps)).data
        assert abs(out.mean() - 2.0) < 0.02
        assert abs(out.var() - 1.0) < 0.05

    def test_gradcheck(self, rng):
        eps = Tensor(rng.standard_normal(6))
        r = Tensor(rng.standard_normal(6))
        gradcheck(
            lambda m, lv: tensor_sum(mul(reparameterize(m, lv, eps), r)),
            [rng.standard_normal(6), 0.3 * rng.standard_normal(6)],
        )


class TestKlLoss:
    def test_zero_at_prior(self):
        assert kl_loss(Tensor(np.zeros(4)), Tensor(np.zeros(4))).item() == 0.0

    def test_unit_mean_single_dim(self):
        assert np.isclose(kl_loss(Tensor([1.0]), Tensor([0.0])).item(), 0.5)

    def test_nonnegative_and_zero_only_at_prior(self, rng):
        for _ in range(25):
            mu = rng.standard_normal(6)
            lv = rng.standard_normal(6)
            val = kl_loss(Tensor(mu), Tensor(lv)).item()
            assert val >= 0.0
            if np.any(np.abs(mu) > 1e-6) or np.any(np.abs(lv) > 1e-6):
                assert val > 0.0

    def test_matches_quadrature(self, rng):
        mu = rng.standard_normal(3)
        lv = 0.5 * rng.standard_normal(3)
        total = 0.0
        z = np.linspace(-40, 40, 800_001)
        for m, l in zip(mu, lv):
            var = np.exp(l)
            q = np.exp(-0.5 * (z - m) ** 2 / var) / np.sqrt(2 * np.pi * var)
            p = np.exp(-0.5 * z ** 2) / np.sqrt(2 * np.pi)
            integrand = np.where(q > 0, q * (np.log(np.maximum(q, 1e-300))
                                             - np.log(np.maximum(p, 1e-300))), 0.0)
            total += np.trapezoid(integrand, z)
        assert abs(kl_loss(Tensor(mu), Tensor(lv)).item() - total) < 1e-6

    def test_batch_averaged(self, rng):
        mu = rng.standard_normal((4, 3))
        lv = rng.standard_normal((4, 3))
        per_sample = [kl_loss(Tensor(mu[i]), Tensor(lv[i])).item() for i in range(4)]
        batched = kl_loss(Tensor(mu), Tensor(lv)).item()
        assert np.isclose(batched, np.mean(per_sample))

    def test_gradcheck(self, rng):
        gradcheck(lambda m, lv: kl_loss(m, lv),
                  [rng.standard_normal(5), 0.4 * rng.standard_normal(5)])


class TestMseLoss:
    def test_zero_iff_equal(self, rng):
        x = rng.standard_normal((5, 2))
        assert mse_loss(Tensor(x), Tensor(x.copy())).item() == 0.0
        assert mse_loss(Tensor(x), Tensor(x + 0.1)).item() > 0.0

    def test_uniform_shift(self):
        pred = np.zeros((4, 2))
        target = pred + np.array([3.0, 4.0])
        assert np.isclose(mse_loss(Tensor(pred), Tensor(target)).item(), 12.5)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            mse_loss(Tensor(np.zeros((2, 2))), Tensor(np.zeros((2, 3))))

    def test_gradient_is_two_diff_over_n(self, rng):
        pred = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
        target = Tensor(rng.standard_normal((3, 4)))
        mse_loss(pred, target).backward()
        assert np.allclose(pred.grad, 2.0 * (pred.data - target.data) / 12)

    def test_gradcheck(self, rng):
        gradcheck(lambda p, t: mse_loss(p, t),
                  [rng.standard_normal((4, 3)), rng.standard_normal((4, 3))])


def one_hot(labels, num_classes):
    out = np.zeros((num_classes,) + labels.shape)
    np.put_along_axis(out, labels[None], 1.0, axis=0)
    return out


class TestSoftDiceLoss:
    def test_perfect_prediction(self, rng):
        labels = rng.integers(0, 3, (6, 6))
        oh = one_hot(labels, 3)
        assert soft_dice_loss(Tensor(oh), Tensor(oh)).item() < 1e-5

    def test_disjoint_foreground(self):
        probs = np.zeros((2, 2, 2))
        onehot = np.zeros((2, 2, 2))
        probs[1, 0, :] = 1.0
        probs[0, 1, :] = 1.0
        onehot[1, 1, :] = 1.0
        onehot[0, 0, :] = 1.0
        assert abs(soft_dice_loss(Tensor(probs), Tensor(onehot)).item() - 1.0) < 1e-5

    def test_half_overlap(self):
        # 2 predicted px, 2 true px, 1 overlapping -> dice 0.5
        probs = np.zeros((2, 1, 4))
        onehot = np.zeros((2, 1, 4))
        probs[1, 0, :2] = 1.0
        probs[0, 0, 2:] = 1.0
        onehot[1, 0, 1:3] = 1.0
        onehot[0, 0, [0, 3]] = 1.0
        assert abs(soft_dice_loss(Tensor(probs), Tensor(onehot)).item() - 0.5) < 1e-4

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            soft_dice_loss(Tensor(np.full((2, 2, 2), 1.5)),
                           Tensor(np.zeros((2, 2, 2))))

    def test_pixel_permutation_equivariant(self, rng):
        logits = rng.standard_normal((3, 1, 16))
        labels = rng.integers(0, 3, (1, 16))
        perm = rng.permutation(16)
        base = soft_dice_loss(softmax(Tensor(logits), axis=0),
                              Tensor(one_hot(labels, 3))).item()
        shuffled = soft_dice_loss(softmax(Tensor(logits[:, :, perm]), axis=0),
                                  Tensor(one_hot(labels[:, perm], 3))).item()
        assert np.isclose(base, shuffled)

    def test_gradcheck(self, rng):
        labels = rng.integers(0, 3, (4, 4))
        oh = Tensor(one_hot(labels, 3))
        gradcheck(lambda z: soft_dice_loss(softmax(z, axis=0), oh),
                  [rng.standard_normal((3, 4, 4))])


class TestCrossEntropyLoss:
    def test_perfect_prediction(self, rng):
        labels = rng.integers(0, 4, (5, 5))
        assert cross_entropy_loss(Tensor(one_hot(labels, 4)), labels).item() < 1e-9

    def test_uniform_is_log_num_classes(self):
        probs = np.full((4, 3, 3), 0.25)
        labels = np.zeros((3, 3), dtype=int)
        assert np.isclose(cross_entropy_loss(Tensor(probs), labels).item(),
                          np.log(4.0))

    def test_label_out_of_range(self):
        with pytest.raises(ValidationError):
            cross_entropy_loss(Tensor(np.full((2, 2, 2), 0.5)),
                               np.full((2, 2), 3))

    def test_pixel_permutation_equivariant(self, rng):
        logits = rng.standard_normal((3, 1, 12))
        labels = rng.integers(0, 3, (1, 12))
        perm = rng.permutation(12)
        base = cross_entropy_loss(softmax(Tensor(logits), axis=0), labels).item()
        shuffled = cross_entropy_loss(softmax(Tensor(logits[:, :, perm]), axis=0),
                                      labels[:, perm]).item()
        assert np.isclose(base, shuffled)

    def test_gradcheck(self, rng):
        labels = rng.integers(0, 3, (4, 4))
        gradcheck(lambda z: cross_entropy_loss(softmax(z, axis=0), labels),
                  [rng.standard_normal((3, 4, 4))])


class TestSegmentationLoss:
    def test_average_of_dice_and_ce(self, rng):
        logits = rng.standard_normal((3, 5, 5))
        labels = rng.integers(0, 3, (5, 5))
        probs = softmax(Tensor(logits), axis=0)
        combined = segmentation_loss(probs, labels).item()
        dice = soft_dice_loss(probs, Tensor(one_hot(labels, 3))).item()
        ce = cross_entropy_loss(probs, labels).item()
        assert np.isclose(combined, 0.5 * (dice + ce))
