"""
Módulo de avaliação por subbanda.

Correlação de Pearson entre predição e mel-espectrograma alvo em cada uma
das 10 subbandas, com média simples sobre as subbandas e, para várias
gravações, média uniforme das médias por gravação.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from src.avaliacao.predicoes import Predicao, alinhar
from src.dados.extratores.gravacoes import RecordingSample
from src.treinamento.perda import pearson_linhas
from src.utils.erros import ErroForma

logger = logging.getLogger(__name__)

SUBBANDAS_MEL = 10


@dataclass
class EvalReport:
    subband_r: List[float]
    mean_r: float
    n_recordings: int = 1
    por_gravacao: pd.DataFrame = field(default_factory=pd.DataFrame)

    def para_dict(self) -> Dict[str, Any]:
        """Forma estruturada com as chaves fixas do relatório."""
        return {
            "subband_r": [float(r) for r in self.subband_r],
            "mean_r": float(self.mean_r),
            "n_recordings": int(self.n_recordings),
        }


def _como_mel(valores: np.ndarray) -> np.ndarray:
    valores = np.asarray(valores)
    if valores.ndim != 2 or valores.shape[0] < SUBBANDAS_MEL:
        raise ErroForma(f"esperado ≥ {SUBBANDAS_MEL} subbandas × T: {valores.shape}")
    return valores[-SUBBANDAS_MEL:]


def evaluate(pred, alvo_mel: np.ndarray) -> EvalReport:
    """
    Avalia uma predição contra o mel alvo.

    Args:
        pred: Predicao ou matriz 11×T/10×T (uma saída 11×T tem a linha 0 ignorada)
        alvo_mel: Mel alvo 10×T

    Returns:
        EvalReport de uma gravação
    """
    valores = pred.valores if isinstance(pred, Predicao) else pred
    mel_pred = _como_mel(valores)
    alvo_mel = np.asarray(alvo_mel)
    if alvo_mel.shape != (SUBBANDAS_MEL, mel_pred.shape[1]):
        raise ErroForma(f"predição {mel_pred.shape} e alvo {alvo_mel.shape} incompatíveis")
    r = pearson_linhas(mel_pred, alvo_mel)
    return EvalReport(subband_r=[float(v) for v in r], mean_r=float(np.mean(r)))


def agregar(relatorios: Sequence[EvalReport], rotulos: Sequence[Dict[str, Any]] = ()) -> EvalReport:
    """
    Combina relatórios de gravações com peso uniforme.

    O mean_r agregado é a média das médias por gravação; cada subbanda é a
    média da subbanda sobre as gravações, de modo que mean_r continua sendo a
    média de subband_r.
    """
    if not relatorios:
        raise ErroForma("nenhum relatório para agregar")
    matriz = np.array([rel.subband_r for rel in relatorios], dtype=np.float64)
    por_subbanda = matriz.mean(axis=0)
    linhas = []
    for i, rel in enumerate(relatorios):
        linha = dict(rotulos[i]) if i < len(rotulos) else {}
        linha["mean_r"] = rel.mean_r
        linha.update({f"r_{s + 1}": v for s, v in enumerate(rel.subband_r)})
        linhas.append(linha)
    return EvalReport(
        subband_r=[float(v) for v in por_subbanda],
        mean_r=float(np.mean(por_subbanda)),
        n_recordings=len(relatorios),
        por_gravacao=pd.DataFrame(linhas),
    )


def evaluate_dataset(predicoes: Sequence[Predicao], gravacoes: Sequence[RecordingSample]) -> EvalReport:
    """
    Avalia um conjunto de predições contra as gravações correspondentes.

    Raises:
        ErroAlinhamento: se predições e gravações não se correspondem
    """
    relatorios, rotulos = [], []
    for pred, gravacao in alinhar(predicoes, gravacoes):
        relatorios.append(evaluate(pred, gravacao.mel))
        rotulos.append({"subject_id": gravacao.subject_id, "stimulus_id": gravacao.stimulus_id})
    relatorio = agregar(relatorios, rotulos)
    logger.info(f"Avaliadas {relatorio.n_recordings} gravações: r médio {relatorio.mean_r:.4f}")
    return relatorio
