"""
Módulo do modelo ConvConcatNet
"""

from .arquitetura import (
    ModelConfig,
    BlockParams,
    Model,
    build_model,
    cnn_stack_forward,
    spatial_attention,
    block_forward,
    model_forward,
    param_count,
)

__all__ = [
    'ModelConfig', 'BlockParams', 'Model', 'build_model', 'cnn_stack_forward',
    'spatial_attention', 'block_forward', 'model_forward', 'param_count',
]
