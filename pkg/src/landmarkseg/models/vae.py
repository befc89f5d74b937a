"""Variational autoencoder estimators: image, graph, and vectorized-shape."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..autodiff import Tensor, save_checkpoint, load_checkpoint
from ..errors import ConfigError
from ..graph.chebyshev import scaled_laplacian_for
from ..graph.structure import Graph
from ..nn.losses import kl_loss, mse_loss
from ..nn.variational import reparameterize
from ..validation import check_coords_batch, check_image_batch
from .config import ModelConfig
from .nets import (
    FCDecoderNet,
    FCEncoderNet,
    GraphDecoderNet,
    GraphEncoderNet,
    ImageDecoderNet,
    ImageEncoderNet,
    copy_parameters,
    parameter_count,
)
from .shapes import vectorize_shape
from .training import run_training


class _VaeBase(BaseEstimator):
    """Common fit/encode plumbing for the three VAE flavours."""

    def _require_built(self):
        if getattr(self, "encoder_", None) is None:
            raise NotFittedError(
                f"{type(self).__name__} is not built; call fit() or build()"
            )

    def named_parameters(self):
        self._require_built()
        yield from self.encoder_.named_parameters("encoder.")
        yield from self.decoder_.named_parameters("decoder.")

    def parameter_count(self):
        return parameter_count(self.named_parameters())

    def _train(self, n, batch_loss, rng):
        trace, initial = run_training(
            self.named_parameters(), n, batch_loss, self.epochs,
            self.batch_size, self.learning_rate, rng,
        )
        self.loss_trace_ = trace
        self.initial_losses_ = initial
        return self

    def _cfg(self):
        if self.config is None:
            return ModelConfig()
        if isinstance(self.config, dict):
            return ModelConfig.from_dict(self.config)
        return self.config


class ImageVAE(_VaeBase):
    """Convolutional VAE over grayscale images.

    fit(X) trains on (n, 1, H, W) images in [0, 1]; reconstruct(X) decodes
    from the posterior mean.
    """

    def __init__(self, config=None, out_channels=1, learning_rate=1e-3,
                 batch_size=16, epochs=40, seed=0):
        self.config = config
        self.out_channels = out_channels
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def build(self, rng=None):
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.encoder_ = ImageEncoderNet(cfg, rng)
        self.decoder_ = ImageDecoderNet(cfg, self.out_channels, rng)
        self.config_ = cfg
        return self

    def fit(self, X, y=None):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "encoder_", None) is None:
            self.build(rng)
        cfg = self.config_
        X = check_image_batch(X, cfg.image_size)
        latent = cfg.latent_dim

        def batch_loss(idx):
            xb = Tensor(X[idx])
            mu, log_var, _ = self.encoder_.forward(xb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            recon = mse_loss(self.decoder_.forward(z), xb)
            kl = kl_loss(mu, log_var)
            total = recon + cfg.kl_weight * kl
            return total, {"recon_mse": float(recon.data), "kl": float(kl.data),
                           "total": float(total.data)}

        return self._train(len(X), batch_loss, rng)

    def encode(self, X):
        self._require_built()
        X = check_image_batch(X, self.config_.image_size)
        mu, log_var, _ = self.encoder_.forward(Tensor(X))
        return mu.data.copy(), log_var.data.copy()

    def reconstruct(self, X):
        self._require_built()
        X = check_image_batch(X, self.config_.image_size)
        mu, _, _ = self.encoder_.forward(Tensor(X))
        out = self.decoder_.forward(mu)
        return out.data.copy()

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "image-vae", "config": self.config_.to_dict(),
                "out_channels": self.out_channels}
        meta.update(extra_meta or {})
        save_checkpoint(path, list(self.named_parameters()), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        est = cls(config=ModelConfig.from_dict(meta["config"]),
                  out_channels=meta.get("out_channels", 1))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est


class GraphVAE(_VaeBase):
    """Spectral-convolution VAE over landmark coordinate matrices.

    The connectivity is fixed: pass a Graph (features optional); the scaled
    Laplacian is computed once and shared by every layer.
    """

    def __init__(self, graph=None, config=None, learning_rate=1e-3,
                 batch_size=16, epochs=300, seed=0):
        self.graph = graph
        self.config = config
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def build(self, rng=None):
        if self.graph is None:
            raise ConfigError("GraphVAE requires a graph (shared connectivity)")
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.graph_ = self.graph
        self.lap_scaled_ = scaled_laplacian_for(self.graph_, cfg.laplacian_kind)
        n_nodes = self.graph_.num_nodes
        self.encoder_ = GraphEncoderNet(cfg, n_nodes, self.lap_scaled_, rng)
        self.decoder_ = GraphDecoderNet(cfg, n_nodes, self.lap_scaled_, rng)
        self.config_ = cfg
        return self

    def fit(self, Y, y=None):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "encoder_", None) is None:
            self.build(rng)
        cfg = self.config_
        Y = check_coords_batch(Y, self.graph_.num_nodes)
        latent = cfg.latent_dim

        def batch_loss(idx):
            yb = Tensor(Y[idx])
            mu, log_var = self.encoder_.forward(yb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            recon = mse_loss(self.decoder_.forward(z), yb)
            kl = kl_loss(mu, log_var)
            total = recon + cfg.kl_weight * kl
            return total, {"recon_mse": float(recon.data), "kl": float(kl.data),
                           "total": float(total.data)}

        return self._train(len(Y), batch_loss, rng)

    def encode(self, Y):
        self._require_built()
        Y = check_coords_batch(Y, self.graph_.num_nodes)
        mu, log_var = self.encoder_.forward(Tensor(Y))
        return mu.data.copy(), log_var.data.copy()

    def decode(self, Z):
        self._require_built()
        Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
        return self.decoder_.forward(Tensor(Z)).data.copy()

    def reconstruct(self, Y):
        mu, _ = self.encode(Y)
        return self.decode(mu)

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "graph-vae", "config": self.config_.to_dict(),
                "graph": {"num_nodes": self.graph_.num_nodes,
                          "edges": [list(e) for e in self.graph_.edges]}}
        meta.update(extra_meta or {})
        save_checkpoint(path, list(self.named_parameters()), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        graph = Graph(meta["graph"]["num_nodes"],
                      tuple(tuple(e) for e in meta["graph"]["edges"]))
        est = cls(graph=graph, config=ModelConfig.from_dict(meta["config"]))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est


class FCVAE(_VaeBase):
    """Fully connected VAE over vectorized landmark shapes (no connectivity)."""

    def __init__(self, num_nodes=None, config=None, learning_rate=1e-3,
                 batch_size=16, epochs=300, seed=0):
        self.num_nodes = num_nodes
        self.config = config
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def build(self, rng=None):
        if self.num_nodes is None:
            raise ConfigError("FCVAE requires num_nodes")
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        width = 2 * self.num_nodes
        self.encoder_ = FCEncoderNet(cfg, width, rng)
        self.decoder_ = FCDecoderNet(cfg, width, rng)
        self.config_ = cfg
        return self

    def fit(self, Y, y=None):
        rng = np.random.default_rng(self.seed)
        if getattr(self, "encoder_", None) is None:
            self.build(rng)
        cfg = self.config_
        S = vectorize_shape(check_coords_batch(Y, self.num_nodes))
        latent = cfg.latent_dim

        def batch_loss(idx):
            sb = Tensor(S[idx])
            mu, log_var = self.encoder_.forward(sb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            recon = mse_loss(self.decoder_.forward(z), sb)
            kl = kl_loss(mu, log_var)
            total = recon + cfg.kl_weight * kl
            return total, {"recon_mse": float(recon.data), "kl": float(kl.data),
                           "total": float(total.data)}

        return self._train(len(S), batch_loss, rng)

    def decode(self, Z):
        self._require_built()
        Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
        return self.decoder_.forward(Tensor(Z)).data.copy()

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "fc-vae", "config": self.config_.to_dict(),
                "num_nodes": self.num_nodes}
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
