"""
Training objectives over the main and auxiliary (Moran's I) heads.

    fixed:   L = MSE(Ŷ, Y) + λ · MSE(Î, I)
    learned: L = L_main / (2σ²_main) + L_aux / (2σ²_aux) + ½(log σ²_main + log σ²_aux)
"""

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.model.pegnn import LossWeights
from src.utils.constants import LossMode
from src.utils.errors import ContractError, DimensionError


def _check_lengths(y_hat, y, i_hat, i_target):
    shapes = [ops.as_tensor(t).shape for t in (y_hat, y, i_hat, i_target)]
    if len(set(shapes)) != 1:
        raise DimensionError(f"loss inputs must have equal lengths, got {shapes}")


def combined_loss(y_hat, y, i_hat, i_target, weights: LossWeights) -> Tensor:
    _check_lengths(y_hat, y, i_hat, i_target)
    if weights.mode != LossMode.FIXED:
        raise ContractError("combined_loss needs fixed loss weights; use uncertainty_loss for learned weights")
    main = ops.mse_loss(y_hat, y)
    if weights.lam == 0.0:
        return main
    return ops.add(main, ops.scale(ops.mse_loss(i_hat, i_target), weights.lam))


def uncertainty_loss(y_hat, y, i_hat, i_target, weights: LossWeights) -> Tensor:
    _check_lengths(y_hat, y, i_hat, i_target)
    if weights.mode != LossMode.LEARNED:
        raise ContractError("uncertainty_loss needs learned loss weights")
    s_main, s_aux = weights.log_var_main, weights.log_var_aux
    main = ops.mse_loss(y_hat, y)
    aux = ops.mse_loss(i_hat, i_target)
    scaled_main = ops.scale(ops.mul(ops.exp(ops.scale(s_main, -1.0)), main), 0.5)
    scaled_aux = ops.scale(ops.mul(ops.exp(ops.scale(s_aux, -1.0)), aux), 0.5)
    regularizer = ops.scale(ops.add(s_main, s_aux), 0.5)
    return ops.add(ops.add(scaled_main, scaled_aux), regularizer)


def model_loss(y_hat, y, i_hat, i_target, weights: LossWeights) -> Tensor:
    """Dispatch on the loss-weight mode."""
    if weights.mode == LossMode.LEARNED:
        return uncertainty_loss(y_hat, y, i_hat, i_target, weights)
    return combined_loss(y_hat, y, i_hat, i_target, weights)
