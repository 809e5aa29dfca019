"""
Módulo de tensores diferenciáveis

Kernels com forward e backward em modo reverso e verificação de gradientes.
"""

from .tensor import Tensor, Parametro, Funcao, backward, sem_gradiente
from .operacoes import (
    pointwise_conv,
    linear_per_timestep,
    depthwise_temporal_conv,
    temporal_conv,
    layer_norm,
    leaky_relu,
    causal_pad,
    concat_channels,
    mean_over_time,
    softmax_channels,
    scale_channels,
    soma,
)

__all__ = [
    'Tensor', 'Parametro', 'Funcao', 'backward', 'sem_gradiente',
    'pointwise_conv', 'linear_per_timestep', 'depthwise_temporal_conv', 'temporal_conv',
    'layer_norm', 'leaky_relu', 'causal_pad', 'concat_channels',
    'mean_over_time', 'softmax_channels', 'scale_channels', 'soma',
]
