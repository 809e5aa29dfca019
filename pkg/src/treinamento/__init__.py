"""
Módulo de treinamento do ConvConcatNet

Perda de Pearson, Adam, laço de treino com parada antecipada e checkpoints.
"""

from .perda import pearson, pearson_loss
from .otimizador import AdamHyper, adam_step
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .treinador import TrainSpec, train

__all__ = [
    'pearson', 'pearson_loss', 'AdamHyper', 'adam_step',
    'Checkpoint', 'save_checkpoint', 'load_checkpoint', 'TrainSpec', 'train',
]
