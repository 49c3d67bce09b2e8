"""
Training hyper-parameters.

JSON/YAML keys follow the field names, except ``lambda`` (field ``lam``) and
``S`` (field ``num_scales``); both spellings are accepted.
"""

from typing import Any, Dict, Literal, Mapping

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.model.pegnn import PeGnnConfig
from src.utils.constants import Backbone, EdgeWeighting, LossMode


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    # Graph & batching
    k: int = Field(default=5, ge=1)
    n_batch: int = Field(default=1024, ge=2)
    tsteps: int = Field(default=1500, ge=1)
    edge_weighting: Literal["binary", "inverse_distance"] = EdgeWeighting.BINARY

    # Optimization
    lr: float = Field(default=1e-3, gt=0)
    lam: float = Field(default=0.0, ge=0, lt=1, alias="lambda")
    learn_loss_weights: bool = False
    seed: int = 42

    # Architecture
    backbone: Literal["gcn", "sage"] = Backbone.GCN
    use_pe: bool = True
    emb_dim: int = Field(default=64, ge=1)
    sigma_min: float = Field(default=0.01, gt=0)
    sigma_max: float = Field(default=1.0, gt=0)
    num_scales: int = Field(default=16, ge=2, alias="S")
    dropout_p: float = Field(default=0.1, ge=0, lt=1)
    hidden_dim: int = Field(default=64, ge=1)

    log_every: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.sigma_min >= self.sigma_max:
            raise ValueError(f"sigma_min ({self.sigma_min}) must be below sigma_max ({self.sigma_max})")
        if self.n_batch < self.k + 1:
            raise ValueError(f"n_batch ({self.n_batch}) must be at least k+1 ({self.k + 1})")
        return self

    def network(self, feature_dim: int) -> PeGnnConfig:
        return PeGnnConfig(
            feature_dim=feature_dim,
            use_pe=self.use_pe,
            emb_dim=self.emb_dim,
            sigma_min=self.sigma_min,
            sigma_max=self.sigma_max,
            num_scales=self.num_scales,
            hidden_dim=self.hidden_dim,
            backbone=self.backbone,
            dropout_p=self.dropout_p,
            loss_mode=LossMode.LEARNED if self.learn_loss_weights else LossMode.FIXED,
            lam=self.lam,
            seed=self.seed,
        )

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)

    def with_updates(self, updates: Mapping[str, Any]) -> "TrainConfig":
        """Validated copy with some fields replaced (field names or aliases)."""
        merged = self.echo()
        for key, value in updates.items():
            field = type(self).model_fields.get(key)
            merged[field.alias if field is not None and field.alias else key] = value
        return type(self).model_validate(merged)
