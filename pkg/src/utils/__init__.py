"""
Módulo de utilitários do decodificador

Configuração, logging e exceções compartilhadas.
"""

from .erros import (
    ErroConvConcat,
    ErroForma,
    ErroUso,
    ErroConfiguracao,
    ErroDivisaoVazia,
    ErroCarregamento,
    ErroFormatoCheckpoint,
    ErroAlinhamento,
)

__all__ = [
    'ErroConvConcat',
    'ErroForma',
    'ErroUso',
    'ErroConfiguracao',
    'ErroDivisaoVazia',
    'ErroCarregamento',
    'ErroFormatoCheckpoint',
    'ErroAlinhamento',
]
