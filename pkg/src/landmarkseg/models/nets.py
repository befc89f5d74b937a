"""Network assemblies used by the estimators.

These are plain parameter containers with forward methods; the sklearn-style
training surface lives in the estimator classes.
"""

import numpy as np

from ..autodiff import add, maxpool2d, relu, reshape, softmax, upsample2x
from ..errors import DimensionError
from ..graph.chebyshev import ChebFilter, cheb_conv
from ..nn.layers import Conv2d, Linear, ResidualBlock


class ImageEncoderNet:
    """Residual blocks alternated with max poolings, then mu/log-var heads."""

    def __init__(self, cfg, rng):
        chans = cfg.image_channels_schedule
        self.blocks = [ResidualBlock(chans[i], chans[i + 1], rng)
                       for i in range(len(chans) - 1)]
        self.num_poolings = cfg.num_poolings
        self.fc_mu = Linear(cfg.flatten_width, cfg.latent_dim, rng)
        self.fc_log_var = Linear(cfg.flatten_width, cfg.latent_dim, rng)
        self.flatten_width = cfg.flatten_width

    def forward(self, x):
        """Returns (mu, log_var, stage_features). `stage_features[i]` is the
        output of block i at its native resolution (used for skip sums)."""
        stages = []
        for i, block in enumerate(self.blocks):
            x = block.forward(x)
            stages.append(x)
            if i < self.num_poolings:
                x = maxpool2d(x)
        n = x.shape[0]
        flat = reshape(x, (n, self.flatten_width))
        return self.fc_mu.forward(flat), self.fc_log_var.forward(flat), stages

    def named_parameters(self, prefix=""):
        for i, block in enumerate(self.blocks):
            yield from block.named_parameters(f"{prefix}block{i}.")
        yield from self.fc_mu.named_parameters(f"{prefix}fc_mu.")
        yield from self.fc_log_var.named_parameters(f"{prefix}fc_log_var.")


class ImageDecoderNet:
    """Mirror of the encoder: fully connected, unflatten, then upsample +
    residual block stages and a final 3×3 convolution."""

    def __init__(self, cfg, out_channels, rng):
        chans = cfg.image_channels_schedule
        self.fc = Linear(cfg.latent_dim, cfg.flatten_width, rng)
        self.bottleneck_size = cfg.bottleneck_size
        self.bottleneck_channels = chans[-1]
        self.blocks = [ResidualBlock(chans[i + 1], chans[i], rng)
                       for i in range(len(chans) - 2, 0, -1)]
        self.final_conv = Conv2d(chans[1], out_channels, 3, rng)
        self.out_channels = out_channels

    def forward(self, z, skips=None):
        """Decode latent codes; `skips` (matching the encoder's stage list)
        are summed into the corresponding decoder stages when given."""
        n = z.shape[0]
        x = relu(self.fc.forward(z))
        x = reshape(x, (n, self.bottleneck_channels,
                        self.bottleneck_size, self.bottleneck_size))
        if skips is not None:
            x = add(x, skips[-1])
        for j, block in enumerate(self.blocks):
            x = block.forward(upsample2x(x))
            if skips is not None:
                x = add(x, skips[len(self.blocks) - 1 - j])
        return self.final_conv.forward(x)

    def named_parameters(self, prefix=""):
        yield from self.fc.named_parameters(f"{prefix}fc.")
        for i, block in enumerate(self.blocks):
            yield from block.named_parameters(f"{prefix}block{i}.")
        yield from self.final_conv.named_parameters(f"{prefix}final_conv.")


class GraphEncoderNet:
    """Stacked Chebyshev convolutions followed by mu/log-var heads."""

    def __init__(self, cfg, num_nodes, lap_scaled, rng, in_features=2):
        fm = cfg.graph_feature_maps
        self.lap_scaled = np.asarray(lap_scaled, dtype=np.float64)
        widths = [in_features] + [fm] * cfg.graph_encoder_layers
        self.filters = [ChebFilter.init(cfg.cheb_terms, widths[i], widths[i + 1], rng)
                        for i in range(cfg.graph_encoder_layers)]
        self.num_nodes = num_nodes
        self.fc_mu = Linear(num_nodes * fm, cfg.latent_dim, rng)
        self.fc_log_var = Linear(num_nodes * fm, cfg.latent_dim, rng)

    def forward(self, x):
        if x.shape[-2] != self.num_nodes:
            raise DimensionError(
                f"expected {self.num_nodes} landmark rows, got {x.shape[-2]}"
            )
        for filt in self.filters:
            x = relu(cheb_conv(x, self.lap_scaled, filt))
        n = x.shape[0]
        flat = reshape(x, (n, self.num_nodes * x.shape[-1]))
        return self.fc_mu.forward(flat), self.fc_log_var.forward(flat)

    def named_parameters(self, prefix=""):
        for i, filt in enumerate(self.filters):
            yield from filt.named_parameters(f"{prefix}cheb{i}.")
        yield from self.fc_mu.named_parameters(f"{prefix}fc_mu.")
        yield from self.fc_log_var.named_parameters(f"{prefix}fc_log_var.")


class GraphDecoderNet:
    """Fully connected expansion then stacked Chebyshev convolutions ending in
    coordinate features (no activation after the last layer)."""

    def __init__(self, cfg, num_nodes, lap_scaled, rng, out_features=2):
        fm = cfg.graph_feature_maps
        self.lap_scaled = np.asarray(lap_scaled, dtype=np.float64)
        self.num_nodes = num_nodes
        self.feature_maps = fm
        self.fc = Linear(cfg.latent_dim, num_nodes * fm, rng)
        widths = [fm] * cfg.graph_decoder_layers + [out_features]
        self.filters = [ChebFilter.init(cfg.cheb_terms, widths[i], widths[i + 1], rng)
                        for i in range(cfg.graph_decoder_layers)]

    def forward(self, z):
        n = z.shape[0]
        x = relu(self.fc.forward(z))
        x = reshape(x, (n, self.num_nodes, self.feature_maps))
        for filt in self.filters[:-1]:
            x = relu(cheb_conv(x, self.lap_scaled, filt))
        return cheb_conv(x, self.lap_scaled, self.filters[-1])

    def named_parameters(self, prefix=""):
        yield from self.fc.named_parameters(f"{prefix}fc.")
        for i, filt in enumerate(self.filters):
            yield from filt.named_parameters(f"{prefix}cheb{i}.")


class FCEncoderNet:
    """Fully connected encoder over vectorized landmark shapes."""

    def __init__(self, cfg, vector_width, rng):
        widths = [vector_width] + list(cfg.fc_hidden)
        self.hidden = [Linear(widths[i], widths[i + 1], rng)
                       for i in range(len(widths) - 1)]
        self.fc_mu = Linear(widths[-1], cfg.latent_dim, rng)
        self.fc_log_var = Linear(widths[-1], cfg.latent_dim, rng)

    def forward(self, s):
        for layer in self.hidden:
            s = relu(layer.forward(s))
        return self.fc_mu.forward(s), self.fc_log_var.forward(s)

    def named_parameters(self, prefix=""):
        for i, layer in enumerate(self.hidden):
            yield from layer.named_parameters(f"{prefix}hidden{i}.")
        yield from self.fc_mu.named_parameters(f"{prefix}fc_mu.")
        yield from self.fc_log_var.named_parameters(f"{prefix}fc_log_var.")


class FCDecoderNet:
    def __init__(self, cfg, vector_width, rng):
        widths = [cfg.latent_dim] + list(cfg.fc_hidden)
        self.hidden = [Linear(widths[i], widths[i + 1], rng)
                       for i in range(len(widths) - 1)]
        self.out = Linear(widths[-1], vector_width, rng)

    def forward(self, z):
        for layer in self.hidden:
            z = relu(layer.forward(z))
        return self.out.forward(z)

    def named_parameters(self, prefix=""):
        for i, layer in enumerate(self.hidden):
            yield from layer.named_parameters(f"{prefix}hidden{i}.")
        yield from self.out.named_parameters(f"{prefix}out.")


def dense_probabilities(logits):
    """Channelwise softmax over class logits (N,C,H,W) or (C,H,W)."""
    axis = 0 if logits.ndim == 3 else 1
    return softmax(logits, axis=axis)


def parameter_count(named_params):
    return int(sum(p.size for _, p in named_params))


def copy_parameters(src_params, dst_params, strict=True):
    """Copy tensors by matching name; returns the list of copied names."""
    src = dict(src_params)
    copied = []
    for name, p in dst_params:
        if name in src:
            sp = src[name]
            data = getattr(sp, "data", sp)
            if p.data.shape != data.shape:
                if strict:
                    raise DimensionError(
                        f"parameter {name}: shape {data.shape} cannot load into "
                        f"{p.data.shape}"
                    )
                continue
            p.data = np.array(data, dtype=np.float64, copy=True)
            copied.append(name)
        elif strict:
            raise KeyError(f"missing parameter {name} in source")
    return copied
