"""
Módulo de predições por gravação e sua persistência.

Um conjunto de predições é um diretório com um subdiretório por gravação:
- manifest: JSON com a gravação de origem, checkpoint, fold e normalização
- pred.raw: float32 little-endian, subbanda × tempo
"""

import json
import logging
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.dados.extratores.gravacoes import ARQUIVO_MANIFESTO, TIPO_DISCO, RecordingSample, nome_gravacao
from src.modelo.arquitetura import Model
from src.treinamento.treinador import prever_lotes
from src.utils.arquivos import diretorio_atomico
from src.utils.erros import ErroAlinhamento, ErroCarregamento, ErroForma

logger = logging.getLogger(__name__)

ARQUIVO_PREDICAO = "pred.raw"


@dataclass
class Predicao:
    """Saída do modelo para uma gravação (11×T, ou 10×T na visão só mel)."""
    valores: np.ndarray
    subject_id: Union[int, str]
    stimulus_id: str
    checkpoint_id: Optional[str] = None
    fold_id: Optional[int] = None
    normalizacao: str = "nenhuma"

    @property
    def chave(self) -> Tuple[str, str]:
        return (str(self.subject_id), self.stimulus_id)

    @property
    def T(self) -> int:
        return self.valores.shape[1]

    def mel(self) -> np.ndarray:
        """Visão das 10 subbandas do mel (descarta o envelope de uma saída 11×T)."""
        return self.valores[-10:]

    def com_valores(self, valores: np.ndarray, normalizacao: str) -> "Predicao":
        return replace(self, valores=valores, normalizacao=normalizacao)

    def validar(self) -> None:
        if self.valores.ndim != 2 or self.valores.shape[0] not in (10, 11):
            raise ErroForma(f"predição deve ser 10×T ou 11×T: {self.valores.shape}")
        if not np.all(np.isfinite(self.valores)):
            raise ErroForma(f"predição com valores não finitos: sujeito {self.subject_id}, "
                            f"estímulo {self.stimulus_id}")


def predict_recording(modelo: Model, gravacao: RecordingSample, checkpoint_id: Optional[str] = None,
                      fold_id: Optional[int] = None) -> Predicao:
    """Executa o modelo sobre a gravação inteira (saída causal, mesmo T)."""
    valores = prever_lotes(modelo, gravacao.eeg[np.newaxis], 1)[0]
    return Predicao(valores, gravacao.subject_id, gravacao.stimulus_id, checkpoint_id, fold_id)


def alinhar(predicoes: Sequence[Predicao], gravacoes: Sequence[RecordingSample]) -> List[Tuple[Predicao, RecordingSample]]:
    """
    Pareia predições e gravações pela chave (sujeito, estímulo).

    Raises:
        ErroAlinhamento: conjuntos de chaves diferentes ou T divergente
    """
    por_chave = {(str(g.subject_id), g.stimulus_id): g for g in gravacoes}
    chaves_pred = {p.chave for p in predicoes}
    if chaves_pred != set(por_chave):
        faltando = sorted(set(por_chave) - chaves_pred)
        sobrando = sorted(chaves_pred - set(por_chave))
        raise ErroAlinhamento(f"predições e gravações não conferem; sem predição: {faltando}, "
                              f"sem gravação: {sobrando}")
    pares = []
    for p in sorted(predicoes, key=lambda p: p.chave):
        g = por_chave[p.chave]
        if p.T != g.T:
            raise ErroAlinhamento(f"T diferente para {p.chave}: predição {p.T}, gravação {g.T}")
        pares.append((p, g))
    return pares


def write_predictions(predicoes: Sequence[Predicao], diretorio: str) -> List[str]:
    """
    Grava um conjunto de predições; o diretório só aparece completo.

    Returns:
        Nomes dos subdiretórios gravados
    """
    nomes = []
    with diretorio_atomico(diretorio) as temporario:
        for p in predicoes:
            p.validar()
            nome = nome_gravacao(p)
            destino = os.path.join(temporario, nome)
            os.makedirs(destino)
            manifesto = {
                "subject_id": p.subject_id,
                "stimulus_id": p.stimulus_id,
                "checkpoint_id": p.checkpoint_id,
                "fold_id": p.fold_id,
                "normalizacao": p.normalizacao,
                "subbandas": p.valores.shape[0],
                "T": p.T,
            }
            with open(os.path.join(destino, ARQUIVO_MANIFESTO), "w", encoding="utf-8") as f:
                json.dump(manifesto, f, ensure_ascii=False, indent=2, sort_keys=True)
            np.ascontiguousarray(p.valores, dtype=TIPO_DISCO).tofile(os.path.join(destino, ARQUIVO_PREDICAO))
            nomes.append(nome)
    logger.info(f"{len(nomes)} predições gravadas em {diretorio}")
    return nomes


def read_prediction(caminho: str) -> Predicao:
    arquivo = os.path.join(caminho, ARQUIVO_MANIFESTO)
    try:
        with open(arquivo, "r", encoding="utf-8") as f:
            manifesto = json.load(f)
        linhas, tempo = int(manifesto["subbandas"]), int(manifesto["T"])
    except FileNotFoundError as e:
        raise ErroCarregamento(f"Manifesto ausente em {caminho}", motivo="ausente", caminho=arquivo) from e
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ErroCarregamento(f"Manifesto inválido em {caminho}: {e}", motivo="manifesto",
                               caminho=arquivo) from e

    bruto = os.path.join(caminho, ARQUIVO_PREDICAO)
    if not os.path.isfile(bruto):
        raise ErroCarregamento(f"Arquivo ausente: {bruto}", motivo="ausente", caminho=bruto)
    if os.path.getsize(bruto) != TIPO_DISCO.itemsize * linhas * tempo:
        raise ErroCarregamento(f"{bruto}: tamanho incompatível com {linhas}×{tempo}", motivo="tamanho",
                               caminho=bruto)
    valores = np.fromfile(bruto, dtype=TIPO_DISCO).reshape(linhas, tempo).astype(np.float32)
    return Predicao(valores, manifesto["subject_id"], str(manifesto["stimulus_id"]),
                    manifesto.get("checkpoint_id"), manifesto.get("fold_id"),
                    manifesto.get("normalizacao", "nenhuma"))


def read_predictions(diretorio: str) -> List[Predicao]:
    """Lê todas as predições de um conjunto, ordenadas pelo nome do subdiretório."""
    if not os.path.isdir(diretorio):
        raise ErroCarregamento(f"Conjunto de predições não encontrado: {diretorio}", motivo="ausente",
                               caminho=diretorio)
    predicoes = []
    for nome in sorted(os.listdir(diretorio)):
        caminho = os.path.join(diretorio, nome)
        if os.path.isdir(caminho) and not nome.startswith("."):
            predicoes.append(read_prediction(caminho))
    return predicoes

