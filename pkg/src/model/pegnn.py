"""
PE-GNN: positional encoder + two-layer graph backbone + main and auxiliary heads.

    C_emb = PE(C)                       (use_pe)
    H⁰    = concat(X, C_emb)            (or concat(X, C) for the plain baseline)
    H¹    = dropout(relu(layer₁(H⁰)))
    H²    = layer₂(H¹)
    Ŷ, Î  = head_main(H²), head_aux(H²)

Parameter initialization draws from independent child streams of the model
seed (encoder, backbone, heads, dropout), so switching the encoder on or off
leaves the backbone and head draws unchanged.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.encoder.positional import PositionalEncoder
from src.encoder.sinusoidal import SinusoidalConfig
from src.geo.graph import SpatialGraph
from src.model.layers import GcnLayer, Layer, Linear, SageLayer
from src.utils.constants import Backbone, LossMode
from src.utils.errors import DimensionError

logger = logging.getLogger(__name__)


class PeGnnConfig(BaseModel):
    """Architecture of one PE-GNN instance."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    feature_dim: int = Field(default=0, ge=0)
    use_pe: bool = True
    emb_dim: int = Field(default=64, ge=1)
    sigma_min: float = Field(default=0.01, gt=0)
    sigma_max: float = Field(default=1.0, gt=0)
    num_scales: int = Field(default=16, ge=2)
    hidden_dim: int = Field(default=64, ge=1)
    backbone: Literal["gcn", "sage"] = Backbone.GCN
    dropout_p: float = Field(default=0.1, ge=0, lt=1)
    loss_mode: Literal["fixed", "learned"] = LossMode.FIXED
    lam: float = Field(default=0.0, ge=0, lt=1)
    seed: int = 42

    @property
    def input_dim(self) -> int:
        return self.feature_dim + (self.emb_dim if self.use_pe else 2)

    def sinusoidal(self) -> SinusoidalConfig:
        return SinusoidalConfig(self.sigma_min, self.sigma_max, self.num_scales)


@dataclass
class LossWeights:
    """Fixed λ, or learnable log σ² for each task (σ² = exp(log_var))."""

    mode: str = LossMode.FIXED
    lam: float = 0.0
    log_var_main: Optional[Tensor] = None
    log_var_aux: Optional[Tensor] = None

    @classmethod
    def fixed(cls, lam: float) -> "LossWeights":
        return cls(mode=LossMode.FIXED, lam=lam)

    @classmethod
    def learned(cls) -> "LossWeights":
        return cls(
            mode=LossMode.LEARNED,
            log_var_main=Tensor(0.0, requires_grad=True, name="log_var_main"),
            log_var_aux=Tensor(0.0, requires_grad=True, name="log_var_aux"),
        )

    def parameters(self) -> Dict[str, Tensor]:
        if self.mode != LossMode.LEARNED:
            return {}
        return {"log_var_main": self.log_var_main, "log_var_aux": self.log_var_aux}

    def sigmas(self) -> Tuple[float, float]:
        """(σ_main, σ_aux); NaN in fixed mode."""
        if self.mode != LossMode.LEARNED:
            return float("nan"), float("nan")
        return (
            float(np.exp(0.5 * self.log_var_main.item())),
            float(np.exp(0.5 * self.log_var_aux.item())),
        )


class PeGnnModel:
    """Two-headed graph regression model with an optional positional encoder."""

    def __init__(self, config: PeGnnConfig):
        self.config = config
        enc_seq, backbone_seq, head_seq, drop_seq = np.random.SeedSequence(config.seed).spawn(4)

        self.encoder: Optional[PositionalEncoder] = None
        if config.use_pe:
            self.encoder = PositionalEncoder(config.sinusoidal(), config.emb_dim, np.random.default_rng(enc_seq))

        layer_cls = SageLayer if config.backbone == Backbone.SAGE else GcnLayer
        backbone_rng = np.random.default_rng(backbone_seq)
        self.backbone: List[Layer] = [
            layer_cls(config.input_dim, config.hidden_dim, backbone_rng),
            layer_cls(config.hidden_dim, config.hidden_dim, backbone_rng),
        ]

        head_rng = np.random.default_rng(head_seq)
        self.head_main = Linear(config.hidden_dim, 1, head_rng)
        self.head_aux = Linear(config.hidden_dim, 1, head_rng)

        if config.loss_mode == LossMode.LEARNED:
            self.loss_weights = LossWeights.learned()
        else:
            self.loss_weights = LossWeights.fixed(config.lam)

        self.dropout_rng = np.random.default_rng(drop_seq)

    # ─── Parameters ──────────────────────────────────────────────────

    def parameters(self) -> "OrderedDict[str, Tensor]":
        params: "OrderedDict[str, Tensor]" = OrderedDict()
        if self.encoder is not None:
            for k, v in self.encoder.parameters().items():
                params[f"encoder.{k}"] = v
        for i, layer in enumerate(self.backbone):
            for k, v in layer.parameters().items():
                params[f"backbone.{i}.{k}"] = v
        for head_name, head in (("head_main", self.head_main), ("head_aux", self.head_aux)):
            for k, v in head.parameters().items():
                params[f"{head_name}.{k}"] = v
        for k, v in self.loss_weights.parameters().items():
            params[f"loss.{k}"] = v
        return params

    def zero_grad(self):
        for p in self.parameters().values():
            p.zero_grad()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters().values())

    # ─── Forward ─────────────────────────────────────────────────────

    def embed(self, coords: np.ndarray) -> np.ndarray:
        """Positional embeddings C_emb in eval mode, as a plain array."""
        if self.encoder is None:
            raise DimensionError("model was built without a positional encoder (use_pe=false)")
        return self.encoder.forward(coords, training=False).values

    def forward(self, X, C, graph: SpatialGraph, training: bool = False) -> Tuple[Tensor, Tensor]:
        return model_forward(X, C, graph, self, training)


def model_forward(
    X,
    C,
    graph: SpatialGraph,
    model: PeGnnModel,
    training: bool = False,
) -> Tuple[Tensor, Tensor]:
    """
    Run the model over the n points of ``graph``.

    Args:
        X: (n, p) node features, p may be 0
        C: (n, 2) coordinates, min-max normalized
        graph: kNN graph built over exactly these n points
        training: enables dropout

    Returns:
        (Ŷ, Î) as length-n tensors
    """
    cfg = model.config
    C = np.asarray(C, dtype=np.float64)
    n = C.shape[0]
    X = np.zeros((n, 0)) if X is None else np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(n, -1) if X.size else np.zeros((n, 0))
    if X.shape != (n, cfg.feature_dim):
        raise DimensionError(f"expected features of shape ({n}, {cfg.feature_dim}), got {X.shape}")
    if graph.n != n:
        raise DimensionError(f"graph has {graph.n} nodes but {n} points were given")

    position = model.encoder.forward(C, training) if model.encoder is not None else Tensor(C)
    h = ops.concat_cols(Tensor(X), position) if cfg.feature_dim > 0 else position

    first, second = model.backbone
    h = first.forward(h, graph)
    h = ops.relu(h)
    h = ops.dropout(h, cfg.dropout_p, training, model.dropout_rng)
    h = second.forward(h, graph)

    y_hat = ops.flatten(model.head_main.forward(h))
    i_hat = ops.flatten(model.head_aux.forward(h))
    return y_hat, i_hat
