"""Declarative model configuration and architecture arithmetic."""

from dataclasses import asdict, dataclass

from ..errors import ConfigError

REFERENCE_CHANNELS = (1, 8, 16, 32, 64, 64)


@dataclass
class ModelConfig:
    """Shared hyperparameters for every architecture in the benchmark.

    The default image size is the 64×64 desk scale; image_size=512 with the
    default channel schedule reproduces the reference architecture.
    """

    image_size: int = 64
    image_channels_schedule: tuple = REFERENCE_CHANNELS
    latent_dim: int = 64
    cheb_terms: int = 6
    graph_feature_maps: int = 16
    graph_encoder_layers: int = 4
    graph_decoder_layers: int = 5
    num_classes: int = 4
    kl_weight: float = 1e-5
    laplacian_kind: str = "symmetric-normalized"
    fc_hidden: tuple = (128,)

    def __post_init__(self):
        self.image_channels_schedule = tuple(self.image_channels_schedule)
        self.fc_hidden = tuple(self.fc_hidden)
        if self.latent_dim <= 0:
            raise ConfigError("latent_dim must be positive")
        if self.cheb_terms < 1:
            raise ConfigError("cheb_terms must be >= 1")
        if len(self.image_channels_schedule) < 2:
            raise ConfigError("image_channels_schedule needs an input and one block")
        divisor = 2 ** self.num_poolings
        if self.image_size % divisor:
            raise ConfigError(
                f"image_size must be divisible by {divisor} "
                f"(one halving per pooling), got {self.image_size}"
            )
        if self.num_classes < 2:
            raise ConfigError("num_classes must be at least 2")
        if self.graph_encoder_layers < 1 or self.graph_decoder_layers < 1:
            raise ConfigError("graph encoder/decoder need at least one layer")

    @property
    def num_poolings(self):
        # one residual block per schedule step; a pooling after each but the last
        return len(self.image_channels_schedule) - 2

    @property
    def bottleneck_size(self):
        return self.image_size // (2 ** self.num_poolings)

    @property
    def flatten_width(self):
        return self.image_channels_schedule[-1] * self.bottleneck_size ** 2

    def graph_decoder_fc_width(self, num_nodes):
        return num_nodes * self.graph_feature_maps

    def image_encoder_plan(self):
        """Stage list (name, c_in, c_out, spatial) ending at the latent heads."""
        chans = self.image_channels_schedule
        size = self.image_size
        plan = []
        for i in range(len(chans) - 1):
            plan.append(("residual_block", chans[i], chans[i + 1], size))
            if i < self.num_poolings:
                size //= 2
                plan.append(("max_pool", chans[i + 1], chans[i + 1], size))
        plan.append(("flatten", chans[-1], self.flatten_width, size))
        plan.append(("fc_mu", self.flatten_width, self.latent_dim, None))
        plan.append(("fc_log_var", self.flatten_width, self.latent_dim, None))
        return plan

    def image_decoder_plan(self, out_channels=1):
        chans = self.image_channels_schedule
        size = self.bottleneck_size
        plan = [("fc", self.latent_dim, self.flatten_width, None),
                ("unflatten", self.flatten_width, chans[-1], size)]
        for i in range(len(chans) - 2, 0, -1):
            size *= 2
            plan.append(("upsample", chans[i + 1], chans[i + 1], size))
            plan.append(("residual_block", chans[i + 1], chans[i], size))
        plan.append(("conv", chans[1], out_channels, size))
        return plan

    def graph_encoder_plan(self, num_nodes, in_features=2):
        fm = self.graph_feature_maps
        plan = [("cheb_conv", in_features, fm, self.cheb_terms)]
        for _ in range(self.graph_encoder_layers - 1):
            plan.append(("cheb_conv", fm, fm, self.cheb_terms))
        plan.append(("fc_mu", num_nodes * fm, self.latent_dim, None))
        plan.append(("fc_log_var", num_nodes * fm, self.latent_dim, None))
        return plan

    def graph_decoder_plan(self, num_nodes, out_features=2):
        fm = self.graph_feature_maps
        plan = [("fc", self.latent_dim, self.graph_decoder_fc_width(num_nodes), None)]
        for _ in range(self.graph_decoder_layers - 1):
            plan.append(("cheb_conv", fm, fm, self.cheb_terms))
        plan.append(("cheb_conv", fm, out_features, self.cheb_terms))
        return plan

    def to_dict(self):
        d = asdict(self)
        d["image_channels_schedule"] = list(self.image_channels_schedule)
        d["fc_hidden"] = list(self.fc_hidden)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


def reference_config():
    """The full-resolution configuration from which the 64×64 desk scale is derived."""
    return ModelConfig(image_size=512)
