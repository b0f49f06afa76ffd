"""
Distribution-based alignment module.

Each utterance is summarized as a diagonal Gaussian (mu, sigma). Gaussians
of the two modalities are compared with the squared 2-Wasserstein distance
and aligned with a symmetric in-batch contrastive loss.
"""

from dataclasses import dataclass
from typing import List, Sequence

from ..core.exceptions import ConfigError, ContractError, DimensionError, EmptyInputError
from ..core.parameter_store import LinearParams, ParameterStore, register_linear
from ..core.tensor import Tensor, linear, mean_pool, stack
from ..logger import get_logger
from .attention import AttentionConfig, AttentionParams, multi_head
from .contrastive import ContrastiveTerms, symmetric_info_nce

logger = get_logger(__name__)

# Lower bound added to the softplus of the sigma branch
SIGMA_FLOOR = 1e-6


@dataclass
class GaussianEmbedding:
    """
    Diagonal Gaussian N(mu, diag(sigma^2)).

    ``sigma`` holds standard deviations. Both fields are D-vectors for one
    utterance or N x D for a batch of utterances.
    """

    mu: Tensor
    sigma: Tensor

    def __post_init__(self):
        if self.mu.shape != self.sigma.shape:
            raise DimensionError(
                f"mu {self.mu.shape} and sigma {self.sigma.shape} must have equal shapes."
            )
        if (self.sigma.data <= 0).any():
            raise ContractError("sigma must be strictly positive.")

    @property
    def dim(self) -> int:
        return self.mu.shape[-1]


@dataclass(frozen=True)
class ContrastiveConfig:
    """Similarity scale p, bias q and temperature tau."""

    p: float = 1.0
    q: float = 0.0
    tau: float = 0.07

    def __post_init__(self):
        if self.p <= 0:
            raise ConfigError(f"Scale factor p must be positive, got {self.p}.")
        if self.tau <= 0:
            raise ConfigError(f"Temperature tau must be positive, got {self.tau}.")


@dataclass
class DistributionConstructorParams:
    """Self-attention plus the mu and sigma branch layers of one modality."""

    attention: AttentionParams
    mu_branch: List[LinearParams]
    sigma_branch: List[LinearParams]

    @classmethod
    def build(
        cls,
        store: ParameterStore,
        prefix: str,
        config: AttentionConfig,
        branch_layers: int = 1,
    ):
        if branch_layers < 1:
            raise ConfigError(f"branch_layers must be at least 1, got {branch_layers}.")
        attention = AttentionParams.build(store, f"{prefix}.attn", config)
        width = config.model_dim
        mu_branch = [
            register_linear(store, f"{prefix}.mu.{layer}", width, width)
            for layer in range(branch_layers)
        ]
        sigma_branch = [
            register_linear(store, f"{prefix}.sigma.{layer}", width, width)
            for layer in range(branch_layers)
        ]
        return cls(attention, mu_branch, sigma_branch)


def _branch(x: Tensor, layers: List[LinearParams]) -> Tensor:
    """Stacked linears with tanh between consecutive layers."""
    for position, layer in enumerate(layers):
        if position > 0:
            x = x.tanh()
        x = linear(x, layer.weight, layer.bias)
    return x


def construct_distribution(x: Tensor, params: DistributionConstructorParams) -> GaussianEmbedding:
    """
    Build the utterance Gaussian from token features (L x D or N x L x D).

    h = x + MHA(x, x); mu = pool(mu_branch(h)); sigma = softplus(pool(sigma_branch(h))) + 1e-6
    """
    if x.ndim < 2 or x.shape[-2] == 0:
        error_string = f"Distribution constructor needs a non-empty sequence, got {x.shape}."
        logger.error(error_string)
        raise EmptyInputError(error_string)

    hidden = x + multi_head(x, x, params.attention)
    mu = mean_pool(_branch(hidden, params.mu_branch))
    sigma = mean_pool(_branch(hidden, params.sigma_branch)).softplus() + SIGMA_FLOOR
    return GaussianEmbedding(mu=mu, sigma=sigma)


def wasserstein2_sq(g1: GaussianEmbedding, g2: GaussianEmbedding) -> Tensor:
    """
    ||mu1 - mu2||^2 + ||sigma1 - sigma2||^2, the squared 2-Wasserstein distance.

    Leading axes broadcast, so batches of Gaussians can be compared at once.
    """
    if g1.dim != g2.dim:
        error_string = f"Gaussian dimensions differ: {g1.dim} vs {g2.dim}."
        logger.error(error_string)
        raise DimensionError(error_string)
    mean_term = g1.mu - g2.mu
    spread_term = g1.sigma - g2.sigma
    return (mean_term * mean_term).sum(axis=-1) + (spread_term * spread_term).sum(axis=-1)


def similarity(g1: GaussianEmbedding, g2: GaussianEmbedding, cfg: ContrastiveConfig) -> Tensor:
    """Sim = -p * W + q."""
    return wasserstein2_sq(g1, g2) * (-cfg.p) + cfg.q


def stack_gaussians(gaussians: Sequence[GaussianEmbedding]) -> GaussianEmbedding:
    """Turn a list of per-utterance Gaussians into one N x D batch."""
    if not gaussians:
        error_string = "Cannot stack an empty list of Gaussians."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    return GaussianEmbedding(
        mu=stack([g.mu for g in gaussians]), sigma=stack([g.sigma for g in gaussians])
    )


def _as_batch(gaussians) -> GaussianEmbedding:
    if isinstance(gaussians, GaussianEmbedding):
        if gaussians.mu.ndim == 1:
            return stack_gaussians([gaussians])
        return gaussians
    return stack_gaussians(list(gaussians))


def pairwise_wasserstein2_sq(speech: GaussianEmbedding, text: GaussianEmbedding) -> Tensor:
    """N x N matrix of squared distances between speech i and text n."""
    count, dim = speech.mu.shape
    left = GaussianEmbedding(speech.mu.reshape(count, 1, dim), speech.sigma.reshape(count, 1, dim))
    right = GaussianEmbedding(
        text.mu.reshape(1, text.mu.shape[0], dim), text.sigma.reshape(1, text.mu.shape[0], dim)
    )
    return wasserstein2_sq(left, right)


def similarity_matrix(
    speech: GaussianEmbedding, text: GaussianEmbedding, cfg: ContrastiveConfig
) -> Tensor:
    """N x N matrix of Sim(N_s_i, N_t_n)."""
    return pairwise_wasserstein2_sq(speech, text) * (-cfg.p) + cfg.q


def distribution_contrastive_loss(
    speech_gaussians: Sequence[GaussianEmbedding] | GaussianEmbedding,
    text_gaussians: Sequence[GaussianEmbedding] | GaussianEmbedding,
    cfg: ContrastiveConfig,
) -> ContrastiveTerms:
    """
    Distribution-level alignment loss L_DA.

    Pair i of both inputs must come from the same utterance. Accepts lists
    of per-utterance Gaussians or already batched (N x D) Gaussians.
    """
    speech = _as_batch(speech_gaussians)
    text = _as_batch(text_gaussians)
    if speech.mu.shape[0] != text.mu.shape[0]:
        error_string = (
            f"Speech and text counts differ: {speech.mu.shape[0]} vs {text.mu.shape[0]}."
        )
        logger.error(error_string)
        raise DimensionError(error_string)
    if speech.dim != text.dim:
        error_string = f"Gaussian dimensions differ: {speech.dim} vs {text.dim}."
        logger.error(error_string)
        raise DimensionError(error_string)
    return symmetric_info_nce(similarity_matrix(speech, text, cfg), cfg.tau)
