"""
Módulo de fusão de alvos e segmentação em janelas.

O alvo de treino tem 11 subbandas: envelope na linha 0 e as 10 subbandas
do mel nas linhas 1..10.
"""

import logging
from typing import List, NamedTuple, Union

import numpy as np

from src.dados.extratores.gravacoes import RecordingSample
from src.utils.erros import ErroForma

logger = logging.getLogger(__name__)


class Janela(NamedTuple):
    eeg: np.ndarray
    alvo: np.ndarray
    subject_id: Union[int, str]
    stimulus_id: str
    inicio: int


def fuse_targets(envelope: np.ndarray, mel: np.ndarray) -> np.ndarray:
    """
    Concatena envelope e mel na dimensão das subbandas.

    Args:
        envelope: 1×T (ou vetor de T)
        mel: 10×T

    Returns:
        Alvo 11×T com o envelope na linha 0
    """
    envelope = np.asarray(envelope).reshape(1, -1)
    mel = np.asarray(mel)
    if mel.ndim != 2 or envelope.shape[1] != mel.shape[1]:
        raise ErroForma(f"envelope {envelope.shape} e mel {mel.shape} com T diferentes")
    return np.concatenate([envelope, mel], axis=0)


def contar_janelas(tempo: int, comprimento: int, salto: int) -> int:
    """floor((T − len)/hop) + 1, ou 0 quando len > T."""
    if comprimento > tempo:
        return 0
    return (tempo - comprimento) // salto + 1


def window(gravacao: RecordingSample, comprimento: int, salto: int,
           permitir_vazio: bool = False, usar_envelope: bool = True) -> List[Janela]:
    """
    Segmenta uma gravação em janelas com início em 0, hop, 2·hop, …

    Args:
        gravacao: Gravação de origem
        comprimento: Comprimento da janela (amostras)
        salto: Deslocamento entre janelas (amostras)
        permitir_vazio: Se True, gravações curtas resultam em lista vazia
        usar_envelope: Se False, o alvo contém apenas as 10 subbandas do mel

    Returns:
        Lista de janelas (EEG C×len, alvo 11×len ou 10×len)
    """
    if salto < 1 or comprimento < 1:
        raise ErroForma(f"comprimento e salto devem ser ≥ 1: {comprimento}, {salto}")
    if comprimento > gravacao.T:
        if permitir_vazio:
            return []
        raise ErroForma(f"janela de {comprimento} amostras maior que a gravação ({gravacao.T})")

    alvo = fuse_targets(gravacao.envelope, gravacao.mel) if usar_envelope else gravacao.mel
    janelas = []
    for k in range(contar_janelas(gravacao.T, comprimento, salto)):
        inicio = k * salto
        fatia = slice(inicio, inicio + comprimento)
        janelas.append(Janela(gravacao.eeg[:, fatia], alvo[:, fatia],
                              gravacao.subject_id, gravacao.stimulus_id, inicio))
    return janelas
