# Batched PE-GNN training and evaluation
from .config import TrainConfig
from .trainer import Batch, StepContext, StepRecord, Trainer, TrainReport, sample_minibatch, train
from .evaluation import EvalMetrics, evaluate, predict
