"""
Módulo de ensemble: normalização z por subbanda e média das predições.

As predições de todos os modelos são normalizadas (média 0 e desvio padrão
populacional 1 no tempo, por subbanda e por gravação) e depois somadas em
ordem fixa e divididas pelo número de membros. A média permanece no espaço
normalizado.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from src.avaliacao.predicoes import Predicao
from src.utils.erros import ErroAlinhamento, ErroUso

logger = logging.getLogger(__name__)

DESVIO_MINIMO = 1e-12
NORMALIZACAO_Z = "zscore"


@dataclass
class EnsembleSpec:
    """Membros (diretórios de predições) e, opcionalmente, seu fold de origem."""
    membros: List[str]
    folds: Dict[str, int] = field(default_factory=dict)
    normalizacao: str = NORMALIZACAO_Z

    def validar(self) -> None:
        if not self.membros:
            raise ErroUso("ensemble precisa de ao menos um membro")
        if self.normalizacao != NORMALIZACAO_Z:
            raise ErroUso(f"normalização não suportada: {self.normalizacao}")

    def por_fold(self) -> Dict[int, List[str]]:
        grupos: Dict[int, List[str]] = {}
        for membro in self.membros:
            if membro in self.folds:
                grupos.setdefault(self.folds[membro], []).append(membro)
        return dict(sorted(grupos.items()))


def znormalizar_linhas(valores: np.ndarray) -> np.ndarray:
    """Escore z de cada linha no tempo; linhas com desvio < 1e-12 viram zero."""
    valores = np.asarray(valores, dtype=np.float64)
    centrado = valores - valores.mean(axis=-1, keepdims=True)
    desvio = np.sqrt((centrado ** 2).mean(axis=-1, keepdims=True))
    constante = desvio < DESVIO_MINIMO
    return np.where(constante, 0.0, centrado / np.where(constante, 1.0, desvio))


def znormalize(pred: Predicao) -> Predicao:
    return pred.com_valores(znormalizar_linhas(pred.valores), NORMALIZACAO_Z)


def ensemble(membros: Sequence[Predicao]) -> Predicao:
    """
    Média das predições z-normalizadas de uma gravação.

    Raises:
        ErroUso: lista vazia
        ErroAlinhamento: membros de gravações ou formas diferentes
    """
    if not membros:
        raise ErroUso("ensemble de lista vazia")
    referencia = membros[0]
    soma = np.zeros(referencia.valores.shape, dtype=np.float64)
    for membro in membros:
        if membro.chave != referencia.chave or membro.valores.shape != referencia.valores.shape:
            raise ErroAlinhamento(f"membro {membro.chave} {membro.valores.shape} desalinhado de "
                                  f"{referencia.chave} {referencia.valores.shape}")
        soma += znormalizar_linhas(membro.valores)
    folds = {m.fold_id for m in membros}
    return Predicao(soma / len(membros), referencia.subject_id, referencia.stimulus_id,
                    checkpoint_id=None, fold_id=folds.pop() if len(folds) == 1 else None,
                    normalizacao=NORMALIZACAO_Z)


def ensemble_sets(conjuntos: Sequence[Sequence[Predicao]]) -> List[Predicao]:
    """
    Ensemble gravação a gravação de vários conjuntos de predições.

    Todos os conjuntos devem cobrir exatamente as mesmas gravações.
    """
    if not conjuntos:
        raise ErroUso("ensemble sem conjuntos de predições")
    indices = [{p.chave: p for p in conjunto} for conjunto in conjuntos]
    chaves = set(indices[0])
    for i, indice in enumerate(indices[1:], start=2):
        if set(indice) != chaves:
            raise ErroAlinhamento(f"conjunto {i} cobre gravações diferentes do conjunto 1")
    return [ensemble([indice[chave] for indice in indices]) for chave in sorted(chaves)]


def ensemble_por_fold(conjuntos_por_fold: Dict[int, Sequence[Sequence[Predicao]]]) -> Dict[str, List[Predicao]]:
    """
    Ensembles locais por fold e o ensemble global de todos os membros.

    Args:
        conjuntos_por_fold: fold → conjuntos de predições dos modelos daquele fold

    Returns:
        {'fold_<k>': ensemble do fold, ..., 'global': ensemble de todos}
    """
    resultado: Dict[str, List[Predicao]] = {}
    todos = []
    for fold_id in sorted(conjuntos_por_fold):
        conjuntos = list(conjuntos_por_fold[fold_id])
        resultado[f"fold_{fold_id}"] = ensemble_sets(conjuntos)
        todos.extend(conjuntos)
        logger.info(f"Ensemble do fold {fold_id}: {len(conjuntos)} membros")
    resultado["global"] = ensemble_sets(todos)
    return resultado
