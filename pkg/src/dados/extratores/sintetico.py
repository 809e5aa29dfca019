"""
Gerador de conjuntos sintéticos EEG/mel.

O mel é ruído positivo suavizado; o envelope é a média das subbandas; o EEG
é uma mistura espacial do mel defasado (topografia comum mais um desvio por
sujeito) somada a ruído branco na SNR pedida. Como o EEG é imagem linear do
mel, existe um decodificador linear de referência, o que torna a aprendizagem
verificável.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import signal

from src.dados.extratores.gravacoes import RecordingSample, nome_gravacao, save_recording
from src.utils.configuracao import obter_num_threads
from src.utils.erros import ErroConfiguracao

logger = logging.getLogger(__name__)

CANAIS_EEG = 64
SUBBANDAS_MEL = 10
ESTIMULO_COMPARTILHADO = "AB1"
SUJEITOS_PROTOCOLO = 85
SUAVIZACAO = 0.9
AQUECIMENTO = 64
DESVIO_SUJEITO = 0.5


@dataclass
class SynthSpec:
    n_subjects: int = 8
    recordings_per_subject: int = 2
    T: int = 1920
    snr_db: float = 10.0
    lag_taps: int = 4
    seed: int = 0

    @classmethod
    def de_dict(cls, valores: Dict[str, Any]) -> "SynthSpec":
        conhecidos = {f.name for f in fields(cls)}
        desconhecidos = set(valores) - conhecidos
        if desconhecidos:
            raise ErroConfiguracao(f"Campos desconhecidos em SynthSpec: {sorted(desconhecidos)}")
        spec = cls(**valores)
        spec.snr_db = float(spec.snr_db)
        spec.validar()
        return spec

    def validar(self) -> None:
        for nome in ("n_subjects", "recordings_per_subject", "T", "lag_taps"):
            if getattr(self, nome) < 1:
                raise ErroConfiguracao(f"{nome} deve ser ≥ 1: {getattr(self, nome)}")
        if math.isnan(self.snr_db):
            raise ErroConfiguracao("snr_db não pode ser NaN")


def ids_sujeitos(n: int) -> List[int]:
    """
    Espalha n sujeitos sintéticos sobre 1..85 para que todos os folds tenham
    sujeitos de treino e de validação.
    """
    if n > SUJEITOS_PROTOCOLO:
        return list(range(1, n + 1))
    if n == 1:
        return [1]
    return [int(v) for v in np.round(np.linspace(1, SUJEITOS_PROTOCOLO, n))]


def estimulos_sujeito(indice_sujeito: int, n_gravacoes: int) -> List[Tuple[str, int]]:
    """
    Estímulos (id, chave da semente) das gravações de um sujeito.

    Com duas ou mais gravações, a última é sempre o estímulo compartilhado AB1;
    as demais são exclusivas do sujeito.
    """
    estimulos = []
    for j in range(n_gravacoes):
        if n_gravacoes >= 2 and j == n_gravacoes - 1:
            estimulos.append((ESTIMULO_COMPARTILHADO, 0))
        else:
            estimulos.append((f"SIN{indice_sujeito + 1:03d}-{j + 1:02d}", 1 + indice_sujeito * 1000 + j))
    return estimulos


def _gerar_mel(spec: SynthSpec, chave_estimulo: int) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 1, chave_estimulo])
    ruido = rng.standard_normal((SUBBANDAS_MEL, spec.T + AQUECIMENTO))
    suave = signal.lfilter([1.0 - SUAVIZACAO], [1.0, -SUAVIZACAO], ruido, axis=1)[:, AQUECIMENTO:]
    suave = (suave - suave.mean(axis=1, keepdims=True)) / (suave.std(axis=1, keepdims=True) + 1e-12)
    return np.logaddexp(0.0, suave).astype(np.float32)


def defasar(x: np.ndarray, atrasos: int) -> np.ndarray:
    """
    Empilha cópias causalmente atrasadas: linha l·C + c contém x[c, t − l].

    Args:
        x: Matriz canal × tempo
        atrasos: Número de atrasos (0..atrasos−1)

    Returns:
        Matriz (atrasos·C) × tempo, com zeros no início; atrasos ≥ tempo
        ficam inteiramente nulos
    """
    canais, tempo = x.shape
    saida = np.zeros((atrasos * canais, tempo), dtype=x.dtype)
    for l in range(min(atrasos, tempo)):
        saida[l * canais:(l + 1) * canais, l:] = x[:, :tempo - l]
    return saida


def matriz_mistura(spec: SynthSpec, sujeito: int) -> np.ndarray:
    """
    Mistura espacial 64 × (10·lag_taps) de um sujeito.

    Soma uma topografia comum ao conjunto (semente do conjunto) com um desvio
    próprio do sujeito (semente do sujeito), de peso DESVIO_SUJEITO; a
    variância por entrada é 1/colunas.
    """
    colunas = SUBBANDAS_MEL * spec.lag_taps
    comum = np.random.default_rng([spec.seed, 2]).standard_normal((CANAIS_EEG, colunas))
    desvio = np.random.default_rng([spec.seed, 2, sujeito]).standard_normal((CANAIS_EEG, colunas))
    return (comum + DESVIO_SUJEITO * desvio) / np.sqrt(colunas * (1.0 + DESVIO_SUJEITO ** 2))


def gerar_gravacao(spec: SynthSpec, indice_sujeito: int, sujeito: int, indice_gravacao: int,
                   estimulo: str, chave_estimulo: int) -> RecordingSample:
    """Gera uma gravação sintética de forma determinística."""
    mel = _gerar_mel(spec, chave_estimulo)
    envelope = mel.astype(np.float64).mean(axis=0, keepdims=True).astype(np.float32)

    centrado = mel.astype(np.float64) - mel.mean(axis=1, keepdims=True)
    sinal = matriz_mistura(spec, sujeito) @ defasar(centrado, spec.lag_taps)
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        eeg = sinal
    else:
        rng = np.random.default_rng([spec.seed, 3, sujeito, indice_gravacao])
        potencia_ruido = np.mean(sinal ** 2) / (10.0 ** (spec.snr_db / 10.0))
        eeg = sinal + np.sqrt(potencia_ruido) * rng.standard_normal(sinal.shape)

    return RecordingSample(
        eeg=eeg.astype(np.float32),
        mel=mel,
        envelope=envelope,
        subject_id=sujeito,
        stimulus_id=estimulo,
        proveniencia={
            "gerador": "sintetico",
            "seed": spec.seed,
            "snr_db": str(spec.snr_db),
            "lag_taps": spec.lag_taps,
            "desvio_sujeito": DESVIO_SUJEITO,
            "indice_sujeito": indice_sujeito,
            "indice_gravacao": indice_gravacao,
        },
    )


def synth_dataset(spec: SynthSpec, diretorio: str) -> List[str]:
    """
    Materializa o conjunto sintético em disco.

    As gravações são independentes e geradas em paralelo (até CCN_THREADS);
    o conteúdo depende apenas de spec.

    Args:
        spec: Parâmetros do gerador
        diretorio: Diretório de saída

    Returns:
        Caminhos das gravações, em ordem de geração
    """
    spec.validar()
    os.makedirs(diretorio, exist_ok=True)
    tarefas = []
    for indice_sujeito, sujeito in enumerate(ids_sujeitos(spec.n_subjects)):
        for j, (estimulo, chave) in enumerate(estimulos_sujeito(indice_sujeito, spec.recordings_per_subject)):
            tarefas.append((indice_sujeito, sujeito, j, estimulo, chave))

    def _gerar_e_salvar(tarefa) -> str:
        amostra = gerar_gravacao(spec, *tarefa)
        caminho = os.path.join(diretorio, nome_gravacao(amostra))
        save_recording(amostra, caminho)
        return caminho

    with ThreadPoolExecutor(max_workers=obter_num_threads()) as executor:
        caminhos = list(executor.map(_gerar_e_salvar, tarefas))

    logger.info(f"Conjunto sintético gerado em {diretorio}: {len(caminhos)} gravações")
    return caminhos
