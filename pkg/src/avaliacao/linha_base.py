"""
Linha de base linear: regressão ridge do mel sobre o EEG com atrasos causais.

Serve de referência para o decodificador não linear nas mesmas janelas.
"""

import logging
from typing import Sequence

import numpy as np
from sklearn.linear_model import Ridge

from src.avaliacao.metricas import SUBBANDAS_MEL, EvalReport, agregar, evaluate
from src.dados.extratores.sintetico import defasar
from src.dados.processadores.janelas import Janela
from src.utils.erros import ErroDivisaoVazia

logger = logging.getLogger(__name__)


def matriz_atrasos(eeg: np.ndarray, atrasos: int) -> np.ndarray:
    """EEG C×T → amostras T × (atrasos·C), só com passado e presente."""
    return defasar(np.asarray(eeg, dtype=np.float64), atrasos).T


def ridge_baseline(treino: Sequence[Janela], avaliacao: Sequence[Janela],
                   atrasos: int = 8, alpha: float = 1.0) -> EvalReport:
    """
    Ajusta o modelo ridge nas janelas de treino e avalia nas demais.

    Args:
        treino: Janelas de ajuste
        avaliacao: Janelas avaliadas (cada janela conta como uma gravação)
        atrasos: Número de atrasos do EEG (0..atrasos−1 amostras)
        alpha: Regularização L2

    Returns:
        EvalReport sobre as 10 subbandas do mel
    """
    if not treino or not avaliacao:
        raise ErroDivisaoVazia("linha de base precisa de janelas de treino e de avaliação")
    x = np.concatenate([matriz_atrasos(j.eeg, atrasos) for j in treino])
    y = np.concatenate([j.alvo[-SUBBANDAS_MEL:].T for j in treino])
    modelo = Ridge(alpha=alpha).fit(x, y)
    logger.info(f"Ridge ajustado: {x.shape[0]} amostras, {x.shape[1]} atributos, alpha={alpha}")

    relatorios = [evaluate(modelo.predict(matriz_atrasos(j.eeg, atrasos)).T, j.alvo[-SUBBANDAS_MEL:])
                  for j in avaliacao]
    rotulos = [{"subject_id": j.subject_id, "stimulus_id": j.stimulus_id, "inicio": j.inicio}
               for j in avaliacao]
    return agregar(relatorios, rotulos)
