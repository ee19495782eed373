"""Trainable channels and their aggregation.

Low-pass channels are GCN-style filters sigma(A^r X Theta + B) on the
renormalized adjacency; band-pass channels are learned scattering channels.
A hybrid layer aggregates them either by horizontal concatenation or by a
per-node attention module whose softmax runs across all filters, and a graph
residual convolution cleans up afterwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import DimensionMismatch, IsolatedNodeError
from .graph import RENORM_ADJACENCY, Graph, residual_diffusion
from .scattering import ABS, IDENTITY, Nonlinearity, cascade_tensor, scatter_layer
from .wavelets import WaveletBank

ATTENTION_LEAKY_SLOPE = 0.2  # GAT convention; the source text leaves it open


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape=None) -> np.ndarray:
    """Uniform init on +-sqrt(6 / (fan_in + fan_out)); biases start at zero."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape if shape is not None else (fan_in, fan_out))


@dataclass(frozen=True)
class ChannelSpec:
    """One hybrid-layer channel: low-pass power r or band-pass path, plus width.

    q is the outer-activation exponent and is only meaningful for band-pass
    channels (the power never enters the cascade).
    """

    kind: str                 # "low" | "band"
    width: int
    r: int = 1
    path: tuple[int, ...] = ()
    sigma: Nonlinearity = ABS
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ("low", "band"):
            raise ValueError(f"channel kind must be 'low' or 'band', got {self.kind!r}")
        if self.width < 1:
            raise ValueError("channel width must be >= 1")
        if self.kind == "low":
            if self.r < 1:
                raise ValueError("low-pass power r must be >= 1")
            if self.q != 1.0:
                raise ValueError("q applies only to band-pass channels")
        else:
            if self.q < 1:
                raise ValueError("band-pass q must be >= 1")


def low_channel(r: int, width: int, sigma: Nonlinearity = ABS) -> ChannelSpec:
    return ChannelSpec("low", width=width, r=r, sigma=sigma)


def band_channel(path, width: int, sigma: Nonlinearity = ABS, q: float = 1.0) -> ChannelSpec:
    return ChannelSpec("band", width=width, path=tuple(path), sigma=sigma, q=q)


@dataclass(frozen=True)
class HybridLayerConfig:
    low: tuple[ChannelSpec, ...]
    band: tuple[ChannelSpec, ...]
    aggregation: str = "concat"   # "concat" | "attention"
    heads: int = 1
    shared_weights: bool = False

    def __post_init__(self):
        if self.aggregation not in ("concat", "attention"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.aggregation == "attention":
            if not self.shared_weights:
                raise ValueError("attention aggregation requires shared_weights")
            if self.heads < 1:
                raise ValueError("attention needs at least one head")
            widths = {c.width for c in self.low + self.band}
            if len(widths) > 1:
                raise ValueError("shared weights require equal channel widths")
        if not self.low and not self.band:
            raise ValueError("a hybrid layer needs at least one channel")

    @property
    def output_width(self) -> int:
        if self.aggregation == "concat":
            return sum(c.width for c in self.low + self.band)
        return self.heads * self.low[0].width if self.low else self.heads * self.band[0].width

    def max_scale(self) -> int:
        scales = [k for c in self.band for k in c.path]
        return max(scales) if scales else 0


@dataclass
class HeadAttention:
    """Per-head attention weights and raw scores, shape (channels, n)."""

    alpha_low: np.ndarray
    alpha_band: np.ndarray
    scores_low: np.ndarray
    scores_band: np.ndarray


@dataclass
class AttentionState:
    heads: list[HeadAttention] = field(default_factory=list)


def _as_tensor(x):
    return x if isinstance(x, ad.Tensor) else ad.constant(np.asarray(x, dtype=np.float64))


def gcn_channel(g: Graph, r: int, theta, bias, sigma: Nonlinearity, X) -> ad.Tensor:
    """sigma(A^r X Theta + B) with A the renormalized adjacency."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if g.has_isolated_nodes:
        raise IsolatedNodeError("GCN channel requires a graph without isolated nodes")
    t = ad.matmul(_as_tensor(X), _as_tensor(theta))
    for _ in range(r):
        t = ad.op_apply(g, RENORM_ADJACENCY, t)
    if bias is not None:
        t = ad.add(t, _as_tensor(bias))
    return sigma.apply_tensor(t)


def _outer_activation(t: ad.Tensor, sigma: Nonlinearity, q: float) -> ad.Tensor:
    # |sigma(.)|^q; the paper's outermost activation uses sigma = |.| so the
    # extra abs is a no-op there and keeps fractional powers defined
    t = sigma.apply_tensor(t)
    if q != 1.0:
        t = ad.abs_pow(t, q)
    return t


def hybrid_forward_concat(g: Graph, cfg: HybridLayerConfig, params, X) -> ad.Tensor:
    """Concatenate channel responses: low channels in spec order, then band."""
    if cfg.aggregation != "concat":
        raise ValueError("config does not use concat aggregation")
    bank = WaveletBank(g, K=cfg.max_scale())
    x = _as_tensor(X)
    outs = []
    for spec, (theta, bias) in zip(cfg.low, params["low"]):
        outs.append(gcn_channel(g, spec.r, theta, bias, spec.sigma, x))
    for spec, (theta, bias) in zip(cfg.band, params["band"]):
        t = scatter_layer(bank, spec.path, theta, None, IDENTITY, x)
        if bias is not None:
            t = ad.add(t, _as_tensor(bias))
        outs.append(_outer_activation(t, spec.sigma, spec.q))
    return ad.concat_cols(outs)


def attention_head(g: Graph, cfg: HybridLayerConfig, theta_shared, a, X):
    """One attention head over the channel responses.

    X_bar = X Theta is shared by every filter; aggregation inputs are
    bias-free and band responses pass through an absolute value. Scores
    LeakyReLU([X_bar || X_bar_f] a) are softmax-normalized per node across
    all C_low + C_band filters, and the weighted sum is rescaled by 1/C after
    the ReLU. Returns (output tensor, HeadAttention).
    """
    bank = WaveletBank(g, K=cfg.max_scale())
    xbar = ad.matmul(_as_tensor(X), _as_tensor(theta_shared))
    responses = []
    for spec in cfg.low:
        t = xbar
        for _ in range(spec.r):
            t = ad.op_apply(g, RENORM_ADJACENCY, t)
        responses.append(t)
    for spec in cfg.band:
        responses.append(ad.abs_val(cascade_tensor(bank, spec.path, ABS, xbar)))

    a_t = _as_tensor(a)
    scores = [ad.leaky_relu(ad.matmul(ad.concat_cols([xbar, resp]), a_t),
                            ATTENTION_LEAKY_SLOPE)
              for resp in responses]                     # each (n, 1)
    alpha = ad.softmax_filters(ad.stack_filters(scores))  # (C, n, 1)

    n_low = len(cfg.low)
    c_total = len(responses)
    acc = None
    for i, resp in enumerate(responses):
        term = ad.mul(ad.take_filter(alpha, i), resp)
        acc = term if acc is None else ad.add(acc, term)
    out = ad.scale(ad.relu(acc), 1.0 / c_total)

    state = HeadAttention(
        alpha_low=alpha.value[:n_low, :, 0].copy(),
        alpha_band=alpha.value[n_low:, :, 0].copy(),
        scores_low=np.stack([s.value[:, 0] for s in scores[:n_low]]) if n_low else
        np.zeros((0, g.n)),
        scores_band=np.stack([s.value[:, 0] for s in scores[n_low:]]) if c_total > n_low else
        np.zeros((0, g.n)),
    )
    return out, state


def gsan_layer(g: Graph, cfg: HybridLayerConfig, params, X):
    """Concatenation of heads; params is a list of (theta_shared, a) per head.

    Returns (output tensor, AttentionState over all heads).
    """
    if cfg.aggregation != "attention":
        raise ValueError("config does not use attention aggregation")
    x = _as_tensor(X)
    outs, state = [], AttentionState()
    for theta, a in params:
        out, head_state = attention_head(g, cfg, theta, a, x)
        outs.append(out)
        state.heads.append(head_state)
    return (outs[0] if len(outs) == 1 else ad.concat_cols(outs)), state


def residual_conv(g: Graph, alpha: float, theta, bias, X) -> ad.Tensor:
    """Graph residual convolution A_res(alpha) X Theta + B (no nonlinearity)."""
    t = ad.op_apply(g, residual_diffusion(alpha), _as_tensor(X))
    t = ad.matmul(t, _as_tensor(theta))
    if bias is not None:
        t = ad.add(t, _as_tensor(bias))
    return t


def attention_ratio(state: AttentionState) -> np.ndarray:
    """Per-node ratio zeta_v of band to low attention, summed over heads and channels.

    Nodes whose summed low attention is zero get NaN and a warning.
    """
    if not state.heads:
        raise ValueError("attention state is empty")
    low = sum(h.alpha_low.sum(axis=0) for h in state.heads)
    band = sum(h.alpha_band.sum(axis=0) for h in state.heads)
    zeta = np.full_like(low, np.nan)
    ok = low > 0
    zeta[ok] = band[ok] / low[ok]
    if not np.all(ok):
        warnings.warn(f"{int(np.sum(~ok))} node(s) skipped: zero low-pass attention")
    return zeta


def init_hybrid_params(cfg: HybridLayerConfig, d_in: int, rng: np.random.Generator):
    """Glorot thetas and zero biases for a concat hybrid layer."""
    params = {"low": [], "band": []}
    for spec in cfg.low:
        params["low"].append((ad.Parameter(glorot_uniform(rng, d_in, spec.width)),
                              ad.Parameter(np.zeros((1, spec.width)))))
    for spec in cfg.band:
        params["band"].append((ad.Parameter(glorot_uniform(rng, d_in, spec.width)),
                               ad.Parameter(np.zeros((1, spec.width)))))
    return params


def init_attention_params(cfg: HybridLayerConfig, d_in: int, rng: np.random.Generator):
    """Per-head (theta_shared, attention vector) pairs."""
    width = (cfg.low + cfg.band)[0].width
    heads = []
    for _ in range(cfg.heads):
        theta = ad.Parameter(glorot_uniform(rng, d_in, width))
        a = ad.Parameter(glorot_uniform(rng, 2 * width, 1, shape=(2 * width, 1)))
        heads.append((theta, a))
    return heads
