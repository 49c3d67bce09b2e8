# Reverse-mode autodiff substrate
from .tensor import ComputationTape, Tensor, reverse_accumulate
from .optim import AdamState, adam_step
from .gradcheck import finite_difference_check
