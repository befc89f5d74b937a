"""The hybrid landmark predictor: image encoder coupled to a graph decoder.

Variants:
  plain    image encoder -> latent -> spectral graph decoder
  dual     adds a dense segmentation decoder on the same latent code
  dual-sc  dual plus encoder->decoder skip connections implemented as sums
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..autodiff import Tensor, load_checkpoint, save_checkpoint
from ..errors import ConfigError
from ..graph.chebyshev import scaled_laplacian_for
from ..graph.structure import Graph
from ..nn.losses import kl_loss, mse_loss, segmentation_loss
from ..nn.variational import reparameterize
from ..validation import check_coords_batch, check_image_batch, check_label_batch
from .config import ModelConfig
from .nets import (
    GraphDecoderNet,
    ImageDecoderNet,
    ImageEncoderNet,
    copy_parameters,
    dense_probabilities,
    parameter_count,
)
from .training import run_training

VARIANTS = ("plain", "dual", "dual-sc")


class HybridNet(BaseEstimator):
    """Image-to-landmark-graph predictor with optional dense dual head."""

    def __init__(self, graph=None, config=None, variant="plain",
                 learning_rate=1e-3, batch_size=16, epochs=60, seed=0):
        self.graph = graph
        self.config = config
        self.variant = variant
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    # -- construction --------------------------------------------------------

    def _cfg(self):
        if self.config is None:
            return ModelConfig()
        if isinstance(self.config, dict):
            return ModelConfig.from_dict(self.config)
        return self.config

    def build(self, rng=None):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.graph is None:
            raise ConfigError("HybridNet requires a graph (shared connectivity)")
        cfg = self._cfg()
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.graph_ = self.graph
        self.lap_scaled_ = scaled_laplacian_for(self.graph_, cfg.laplacian_kind)
        self.image_encoder_ = ImageEncoderNet(cfg, rng)
        self.graph_decoder_ = GraphDecoderNet(cfg, self.graph_.num_nodes,
                                              self.lap_scaled_, rng)
        self.image_decoder_ = (
            ImageDecoderNet(cfg, cfg.num_classes, rng)
            if self.variant in ("dual", "dual-sc") else None
        )
        self.config_ = cfg
        return self

    @classmethod
    def from_pretrained(cls, image_vae, graph_vae, variant="plain", **kwargs):
        """Couple a pretrained image encoder with a pretrained graph decoder.

        Dual variants also initialize the dense decoder from the image VAE's
        decoder; its final convolution is freshly initialized when the class
        count differs from the VAE's output channels.
        """
        if image_vae.config_.latent_dim != graph_vae.config_.latent_dim:
            raise ConfigError(
                "latent dimensions differ: image encoder "
                f"{image_vae.config_.latent_dim} vs graph decoder "
                f"{graph_vae.config_.latent_dim}"
            )
        est = cls(graph=graph_vae.graph_, config=image_vae.config_,
                  variant=variant, **kwargs)
        est.build()
        copy_parameters(image_vae.encoder_.named_parameters(),
                        est.image_encoder_.named_parameters())
        copy_parameters(graph_vae.decoder_.named_parameters(),
                        est.graph_decoder_.named_parameters())
        if est.image_decoder_ is not None:
            copy_parameters(image_vae.decoder_.named_parameters(),
                            est.image_decoder_.named_parameters(), strict=False)
        return est

    def _require_built(self):
        if getattr(self, "image_encoder_", None) is None:
            raise NotFittedError("HybridNet is not built; call fit() or from_pretrained()")

    def named_parameters(self):
        self._require_built()
        yield from self.image_encoder_.named_parameters("image_encoder.")
        yield from self.graph_decoder_.named_parameters("graph_decoder.")
        if self.image_decoder_ is not None:
            yield from self.image_decoder_.named_parameters("image_decoder.")

    def parameter_count(self):
        return parameter_count(self.named_parameters())

    # -- training ------------------------------------------------------------

    def fit(self, X, Y, masks=None):
        """Fine-tune on paired (image, landmark[, mask]) samples."""
        rng = np.random.default_rng(self.seed)
        if getattr(self, "image_encoder_", None) is None:
            self.build(rng)
        cfg = self.config_
        X = check_image_batch(X, cfg.image_size)
        Y = check_coords_batch(Y, self.graph_.num_nodes)
        if len(X) != len(Y):
            raise ConfigError(f"got {len(X)} images but {len(Y)} landmark sets")
        dual = self.variant in ("dual", "dual-sc")
        if dual:
            if masks is None:
                raise ConfigError(
                    f"variant {self.variant!r} needs dense masks in the dataset"
                )
            masks = check_label_batch(masks, cfg.num_classes)
        latent = cfg.latent_dim

        def batch_loss(idx):
            xb = Tensor(X[idx])
            mu, log_var, stages = self.image_encoder_.forward(xb)
            eps = Tensor(rng.standard_normal((len(idx), latent)))
            z = reparameterize(mu, log_var, eps)
            pred = self.graph_decoder_.forward(z)
            recon = mse_loss(pred, Tensor(Y[idx]))
            kl = kl_loss(mu, log_var)
            total = recon + cfg.kl_weight * kl
            terms = {"landmark_mse": float(recon.data), "kl": float(kl.data)}
            if dual:
                logits = self.image_decoder_.forward(
                    z, stages if self.variant == "dual-sc" else None)
                seg = segmentation_loss(dense_probabilities(logits), masks[idx])
                total = total + seg
                terms["seg"] = float(seg.data)
            terms["total"] = float(total.data)
            return total, terms

        trace, initial = run_training(
            self.named_parameters(), len(X), batch_loss, self.epochs,
            self.batch_size, self.learning_rate, rng,
        )
        self.loss_trace_ = trace
        self.initial_losses_ = initial
        return self

    # -- inference (deterministic: posterior mean, no sampling) --------------

    def _encode_mu(self, X):
        self._require_built()
        X = check_image_batch(X, self.config_.image_size)
        mu, _, stages = self.image_encoder_.forward(Tensor(X))
        return mu, stages

    def predict(self, X):
        """Landmark coordinates (n, num_nodes, 2) in normalized [0,1] space."""
        mu, _ = self._encode_mu(X)
        return self.graph_decoder_.forward(mu).data.copy()

    def predict_graphs(self, X):
        """Predictions paired with the shared adjacency."""
        coords = self.predict(X)
        return [self.graph_.with_features(c) for c in coords]

    def predict_dense(self, X):
        """Class probability maps (n, num_classes, H, W) from the dual head."""
        if self.image_decoder_ is None:
            raise ConfigError(f"variant {self.variant!r} has no dense decoder")
        mu, stages = self._encode_mu(X)
        logits = self.image_decoder_.forward(
            mu, stages if self.variant == "dual-sc" else None)
        return dense_probabilities(logits).data.copy()

    # -- persistence ----------------------------------------------------------

    def save(self, path, extra_meta=None):
        self._require_built()
        meta = {"model": "hybrid", "variant": self.variant,
                "config": self.config_.to_dict(),
                "graph": {"num_nodes": self.graph_.num_nodes,
                          "edges": [list(e) for e in self.graph_.edges]}}
        meta.update(extra_meta or {})
        save_checkpoint(path, list(self.named_parameters()), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        graph = Graph(meta["graph"]["num_nodes"],
                      tuple(tuple(e) for e in meta["graph"]["edges"]))
        est = cls(graph=graph, config=ModelConfig.from_dict(meta["config"]),
                  variant=meta.get("variant", "plain"))
        est.build()
        copy_parameters(params.items(), est.named_parameters())
        return est
