"""Baseline models: PCA point-distribution model, fully connected VAE
predictor, and a UNet-style dense segmenter."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..autodiff import Tensor, load_checkpoint, matmul, save_checkpoint
from ..errors import ConfigError, ValidationError
from ..nn.losses import kl_loss, mse_loss, segmentation_loss
from ..nn.variational import reparameterize
from ..validation import (
    check_coords_batch,
    check_image_batch,
    check_label_batch,
    check_matrix,
)
from .config import ModelConfig
from .nets import (
    FCDecoderNet,
    ImageDecoderNet,
    ImageEncoderNet,
    copy_parameters,
    dense_probabilities,
    parameter_count,
)
from .shapes import devectorize_shape, vectorize_shape
from .training import run_training


class PCAShapeModel(BaseEstimator, TransformerMixin):
    """Point-distribution model: mean shape plus orthonormal variation modes.

    Modes come from the eigendecomposition of the covariance of mean-centered
    vectorized shapes; variances are stored in non-increasing order.
    """

    def __init__(self, n_modes=None):
        self.n_modes = n_modes

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 3:
            X = vectorize_shape(X)
        X = check_matrix(X, "shapes")
        n, width = X.shape
        if n < 2:
            raise ValidationError("PCA needs at least 2 shapes")
        max_modes = min(width, n - 1)
        m = self.n_modes if self.n_modes is not None else max_modes
        if m > max_modes:
            raise ValidationError(
                f"n_modes={m} exceeds min(2|V|, n-1) = {max_modes}"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:m]
        self.modes_ = eigvecs[:, order]
        self.variances_ = np.maximum(eigvals[order], 0.0)
        return self

    def _require_fitted(self):
        if getattr(self, "modes_", None) is None:
            raise NotFittedError("PCAShapeModel is not fitted")

    def transform(self, X):
        self._require_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 3:
            X = vectorize_shape(X)
        return (np.atleast_2d(X) - self.mean_) @ self.modes_

    def inverse_transform(self, coefficients):
        self._require_fitted()
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=np.float64))
        return self.mean_ + coefficients @ self.modes_.T

    def reconstruct(self, X):
        return self.inverse_transform(self.transform(X))


class _EncoderPredictorBase(BaseEstimator):
    """Image encoder + frozen-or-trainable shape decoder, trained end to end
    on the final landmark locations."""

    def _cfg(self):
        if self.config is None:
            return ModelConfig()
        if isinstance(self.config, dict):
            return ModelConfig.from_dict(self.config)
        return self.config

    def _require_built(self):
        if getattr(self, "image_encoder_", None) is None:
            raise NotFittedError(f"{type(self).__name__} is not built")

    def parameter_count(self):
        return parameter_count(self.named_parameters())

    def _train_landmarks(self, X, Y, decode_batch, rng):
        cfg = self.config_
        X = check_image_batch(X, cfg.image_size)
        Y = check_coords_batch(Y, self.num_nodes_)
        if len(X) != len(Y):
            raise ConfigError(f"got {len(X)} images but {len(Y)} landmark sets")
        S = vectorize_shape(Y)
        latent = cfg.latent_dim

        def batch_loss(idx):
            xb = Tensor(X[idx])
            mu, log_var, _ = self.image_encoder_.forward(xb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            recon = mse_loss(decode_batch(z), Tensor(S[idx]))
            kl = kl_loss(mu, log_var)
            total = recon + cfg.kl_weight * kl
            return total, {"landmark_mse": float(recon.data), "kl": float(kl.data),
                           "total": float(total.data)}

        trace, initial = run_training(
            self.named_parameters(), len(X), batch_loss, self.epochs,
            self.batch_size, self.learning_rate, rng,
        )
        self.loss_trace_ = trace
        self.initial_losses_ = initial
        return self

    def predict(self, X):
        """Landmark coordinates (n, num_nodes, 2); deterministic (uses mu)."""
        self._require_built()
        X = check_image_batch(X, self.config_.image_size)
        mu, _, _ = self.image_encoder_.forward(Tensor(X))
        return devectorize_shape(self._decode(mu).data.copy())


class PCABaseline(_EncoderPredictorBase):
    """Pretrained image encoder regressing coefficients of fixed PCA modes."""

    def __init__(self, shape_model=None, config=None, learning_rate=1e-3,
                 batch_size=16, epochs=60, seed=0):
        self.shape_model = shape_model
        self.config = config
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def build(self, rng=None):
        if self.shape_model is None or getattr(self.shape_model, "modes_", None) is None:
            raise ConfigError("PCABaseline requires a fitted PCAShapeModel")
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.image_encoder_ = ImageEncoderNet(cfg, rng)
        width, m = self.shape_model.modes_.shape
        if width % 2:
            raise ConfigError("PCA shape model width must be even (x,y pairs)")
        self.num_nodes_ = width // 2
        self.n_coefficients_ = min(m, cfg.latent_dim)
        # constant projection picking the first n coefficients from the latent code
        sel = np.zeros((cfg.latent_dim, self.n_coefficients_))
        sel[:self.n_coefficients_, :self.n_coefficients_] = np.eye(self.n_coefficients_)
        self._select = Tensor(sel)
        self._modes_t = Tensor(self.shape_model.modes_[:, :self.n_coefficients_].T)
        self._mean = Tensor(self.shape_model.mean_)
        self.config_ = cfg
        return self

    @classmethod
    def from_pretrained(cls, image_vae, shape_model, **kwargs):
        est = cls(shape_model=shape_model, config=image_vae.config_, **kwargs)
        est.build()
        copy_parameters(image_vae.encoder_.named_parameters(),
                        est.image_encoder_.named_parameters())
        return est

    def named_parameters(self):
        self._require_built()
        yield from self.image_encoder_.named_parameters("image_encoder.")

    def _decode(self, z):
        coefficients = matmul(z, self._select)
        return matmul(coefficients, self._modes_t) + self._mean

    def fit(self, X, Y):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "image_encoder_", None) is None:
            self.build(rng)
        return self._train_landmarks(X, Y, self._decode, rng)

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "pca", "config": self.config_.to_dict(),
                "n_coefficients": self.n_coefficients_}
        meta.update(extra_meta or {})
        params = list(self.named_parameters())
        params += [("pca.mean", self.shape_model.mean_),
                   ("pca.modes", self.shape_model.modes_),
                   ("pca.variances", self.shape_model.variances_)]
        save_checkpoint(path, params, meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        shape_model = PCAShapeModel()
        shape_model.mean_ = params.pop("pca.mean")
        shape_model.modes_ = params.pop("pca.modes")
        shape_model.variances_ = params.pop("pca.variances")
        est = cls(shape_model=shape_model,
                  config=ModelConfig.from_dict(meta["config"]))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est


class FCVAEBaseline(_EncoderPredictorBase):
    """Pretrained image encoder coupled to a fully connected shape decoder."""

    def __init__(self, num_nodes=None, config=None, learning_rate=1e-3,
                 batch_size=16, epochs=60, seed=0):
        self.num_nodes = num_nodes
        self.config = config
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def build(self, rng=None):
        if self.num_nodes is None:
            raise ConfigError("FCVAEBaseline requires num_nodes")
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.image_encoder_ = ImageEncoderNet(cfg, rng)
        self.decoder_ = FCDecoderNet(cfg, 2 * self.num_nodes, rng)
        self.num_nodes_ = self.num_nodes
        self.config_ = cfg
        return self

    @classmethod
    def from_pretrained(cls, image_vae, fc_vae, **kwargs):
        if image_vae.config_.latent_dim != fc_vae.config_.latent_dim:
            raise ConfigError("latent dimensions of encoder and decoder differ")
        est = cls(num_nodes=fc_vae.num_nodes, config=image_vae.config_, **kwargs)
        est.build()
        copy_parameters(image_vae.encoder_.named_parameters(),
                        est.image_encoder_.named_parameters())
        copy_parameters(fc_vae.decoder_.named_parameters(),
                        est.decoder_.named_parameters())
        return est

    def named_parameters(self):
        self._require_built()
        yield from self.image_encoder_.named_parameters("image_encoder.")
        yield from self.decoder_.named_parameters("decoder.")

    def _decode(self, z):
        return self.decoder_.forward(z)

    def fit(self, X, Y):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "image_encoder_", None) is None:
            self.build(rng)
        return self._train_landmarks(X, Y, self._decode, rng)

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "fc-vae-baseline", "config": self.config_.to_dict(),
                "num_nodes": self.num_nodes_}
        meta.update(extra_meta or {})
        save_checkpoint(path, list(self.named_parameters()), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        est = cls(num_nodes=meta["num_nodes"],
                  config=ModelConfig.from_dict(meta["config"]))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est


class UNet(BaseEstimator):
    """Dense segmenter: the dual-sc image path (variational bottleneck and
    sum skip connections) without any graph branch."""

    def __init__(self, config=None, learning_rate=1e-3, batch_size=16,
                 epochs=40, seed=0):
        self.config = config
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def _cfg(self):
        if self.config is None:
            return ModelConfig()
        if isinstance(self.config, dict):
            return ModelConfig.from_dict(self.config)
        return self.config

    def build(self, rng=None):
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.image_encoder_ = ImageEncoderNet(cfg, rng)
        self.image_decoder_ = ImageDecoderNet(cfg, cfg.num_classes, rng)
        self.config_ = cfg
        return self

    @classmethod
    def from_pretrained(cls, image_vae, **kwargs):
        est = cls(config=image_vae.config_, **kwargs)
        est.build()
        copy_parameters(image_vae.encoder_.named_parameters(),
                        est.image_encoder_.named_parameters())
        copy_parameters(image_vae.decoder_.named_parameters(),
                        est.image_decoder_.named_parameters(), strict=False)
        return est

    def _require_built(self):
        if getattr(self, "image_encoder_", None) is None:
            raise NotFittedError("UNet is not built")

    def named_parameters(self):
        self._require_built()
        yield from self.image_encoder_.named_parameters("image_encoder.")
        yield from self.image_decoder_.named_parameters("image_decoder.")

    def parameter_count(self):
        return parameter_count(self.named_parameters())

    def fit(self, X, masks):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "image_encoder_", None) is None:
            self.build(rng)
        cfg = self.config_
        X = check_image_batch(X, cfg.image_size)
        masks = check_label_batch(masks, cfg.num_classes)
        if len(X) != len(masks):
            raise ConfigError(f"got {len(X)} images but {len(masks)} masks")
        latent = cfg.latent_dim

        def batch_loss(idx):
            xb = Tensor(X[idx])
            mu, log_var, stages = self.image_encoder_.forward(xb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            logits = self.image_decoder_.forward(z, stages)
            seg = segmentation_loss(dense_probabilities(logits), masks[idx])
            kl = kl_loss(mu, log_var)
            total = seg + cfg.kl_weight * kl
            return total, {"seg": float(seg.data), "kl": float(kl.data),
                           "total": float(total.data)}

        trace, initial = run_training(
            self.named_parameters(), len(X), batch_loss, self.epochs,
            self.batch_size, self.learning_rate, rng,
        )
        self.loss_trace_ = trace
        self.initial_losses_ = initial
        return self

    def predict_proba(self, X):
        """Class probability maps (n, num_classes, H, W); deterministic."""
        self._require_built()
        X = check_image_batch(X, self.config_.image_size)
        mu, _, stages = self.image_encoder_.forward(Tensor(X))
        logits = self.image_decoder_.forward(mu, stages)
        return dense_probabilities(logits).data.copy()

    def predict(self, X):
        """Integer label maps (n, H, W)."""
        return self.predict_proba(X).argmax(axis=1)

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "unet", "config": self.config_.to_dict()}
        meta.update(extra_meta or {})
        save_checkpoint(path, list(self.named_parameters()), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        est = cls(config=ModelConfig.from_dict(meta["config"]))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est
