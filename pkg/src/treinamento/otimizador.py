"""
Otimizador Adam com correção de viés.

Os momentos ficam no próprio Parametro (adam_m, adam_v); o contador de
passos fica no AdamHyper.
"""

import logging
from dataclasses import dataclass, fields
from typing import Any, Dict, Iterable

import numpy as np

from src.tensores.tensor import Parametro
from src.utils.erros import ErroConfiguracao, ErroUso

logger = logging.getLogger(__name__)


@dataclass
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0

    @classmethod
    def de_dict(cls, valores: Dict[str, Any]) -> "AdamHyper":
        conhecidos = {f.name for f in fields(cls)}
        desconhecidos = set(valores) - conhecidos
        if desconhecidos:
            raise ErroConfiguracao(f"Campos desconhecidos em AdamHyper: {sorted(desconhecidos)}")
        hiper = cls(**valores)
        hiper.validar()
        return hiper

    def validar(self) -> None:
        if not self.lr > 0:
            raise ErroConfiguracao(f"lr deve ser > 0: {self.lr}")
        for nome in ("beta1", "beta2"):
            if not 0 <= getattr(self, nome) < 1:
                raise ErroConfiguracao(f"{nome} deve estar em [0, 1): {getattr(self, nome)}")


def adam_step(parametros: Iterable[Parametro], hiper: AdamHyper) -> None:
    """
    Um passo do Adam sobre todos os parâmetros.

    Args:
        parametros: Parâmetros com gradiente preenchido por backward
        hiper: Hiperparâmetros (step_count é incrementado)
    """
    parametros = list(parametros)
    sem_grad = [p.nome for p in parametros if p.grad is None]
    if sem_grad:
        raise ErroUso(f"adam_step chamado antes de backward (sem gradiente: {sem_grad[:3]})")

    hiper.step_count += 1
    t = hiper.step_count
    correcao1 = 1.0 - hiper.beta1 ** t
    correcao2 = 1.0 - hiper.beta2 ** t

    for p in parametros:
        g = p.grad
        p.adam_m *= hiper.beta1
        p.adam_m += (1.0 - hiper.beta1) * g
        p.adam_v *= hiper.beta2
        p.adam_v += (1.0 - hiper.beta2) * (g * g)
        m_chapeu = p.adam_m / correcao1
        v_chapeu = p.adam_v / correcao2
        p.dados -= (hiper.lr * m_chapeu / (np.sqrt(v_chapeu) + hiper.eps)).astype(p.dtype)
