"""
Correlação de Pearson e a perda de treinamento derivada dela.
"""

import logging

import numpy as np

from src.tensores.operacoes import como_tensor
from src.tensores.tensor import Funcao, Tensor
from src.utils.erros import ErroForma

logger = logging.getLogger(__name__)

EPS_PEARSON = 1e-8
VARIANCIA_MINIMA = 1e-12


def pearson_linhas(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Correlação de Pearson ao longo do último eixo.

    Séries com variância populacional abaixo de 1e-12 têm correlação 0.

    Args:
        a: Array (..., T)
        b: Array (..., T), mesma forma

    Returns:
        Array (...) de correlações
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ErroForma(f"formas diferentes: {a.shape} vs {b.shape}")
    if a.shape[-1] < 2:
        raise ErroForma(f"Pearson exige ao menos 2 amostras; recebido {a.shape[-1]}")
    ac = a - a.mean(axis=-1, keepdims=True)
    bc = b - b.mean(axis=-1, keepdims=True)
    saa = (ac * ac).sum(axis=-1)
    sbb = (bc * bc).sum(axis=-1)
    r = (ac * bc).sum(axis=-1) / np.sqrt(saa * sbb + EPS_PEARSON)
    n = a.shape[-1]
    constante = (saa / n < VARIANCIA_MINIMA) | (sbb / n < VARIANCIA_MINIMA)
    return np.where(constante, 0.0, r)


def pearson(x, y) -> float:
    """Correlação de Pearson entre duas séries temporais."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ErroForma("pearson espera vetores")
    return float(pearson_linhas(x, y))


class PerdaPearson(Funcao):
    """−média das correlações por (item, subbanda); o alvo é constante."""

    nome = "pearson_loss"

    def forward(self, pred, alvo):
        n = pred.shape[-1]
        self.pc = pred - pred.mean(axis=-1, keepdims=True)
        self.ac = alvo - alvo.mean(axis=-1, keepdims=True)
        self.spp = (self.pc * self.pc).sum(axis=-1, keepdims=True)
        self.saa = (self.ac * self.ac).sum(axis=-1, keepdims=True)
        self.cov = (self.pc * self.ac).sum(axis=-1, keepdims=True)
        self.d = np.sqrt(self.spp * self.saa + EPS_PEARSON)
        self.ativo = ~((self.spp / n < VARIANCIA_MINIMA) | (self.saa / n < VARIANCIA_MINIMA))
        r = np.where(self.ativo, self.cov / self.d, 0.0)
        self.linhas = r.size
        return np.asarray(-r.mean(), dtype=pred.dtype)

    def backward(self, g):
        dr = self.ac / self.d - self.cov * self.saa * self.pc / self.d ** 3
        dr = np.where(self.ativo, dr, 0.0)
        return -g * dr / self.linhas, None


def pearson_loss(pred, alvo) -> Tensor:
    """
    Perda = −média de pearson(pred[b,s,:], alvo[b,s,:]) sobre lote e subbandas.

    Args:
        pred: Predição (B, S, T)
        alvo: Alvo (B, S, T), tratado como constante

    Returns:
        Tensor escalar diferenciável em relação a pred
    """
    pred = como_tensor(pred)
    alvo = Tensor(np.asarray(alvo.dados if isinstance(alvo, Tensor) else alvo, dtype=pred.dtype))
    if pred.forma != alvo.forma or pred.dados.ndim != 3:
        raise ErroForma(f"pred {pred.forma} e alvo {alvo.forma} devem ter a mesma forma (B, S, T)")
    if pred.forma[2] < 2:
        raise ErroForma("Pearson exige ao menos 2 amostras no tempo")
    return PerdaPearson.aplicar(pred, alvo)
