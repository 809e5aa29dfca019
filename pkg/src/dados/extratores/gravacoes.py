"""
Módulo de leitura e escrita de gravações em disco.

Cada gravação é um diretório com:
- manifest: JSON com subject_id, stimulus_id, sample_rate_hz, T, canais e proveniência
- eeg.raw, mel.raw, env.raw: float32 little-endian, linha a linha (canal, depois tempo)
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.utils.arquivos import diretorio_atomico
from src.utils.erros import ErroCarregamento, ErroForma

logger = logging.getLogger(__name__)

TAXA_AMOSTRAGEM_HZ = 64
TIPO_DISCO = np.dtype('<f4')
ARQUIVO_MANIFESTO = "manifest"
ARQUIVOS_SINAIS = {"eeg": "eeg.raw", "mel": "mel.raw", "env": "env.raw"}


@dataclass
class RecordingSample:
    """Um trial: EEG, mel-espectrograma e envelope alinhados no tempo."""
    eeg: np.ndarray
    mel: np.ndarray
    envelope: np.ndarray
    subject_id: Union[int, str]
    stimulus_id: str
    proveniencia: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.envelope = np.asarray(self.envelope).reshape(1, -1)

    @property
    def T(self) -> int:
        return self.eeg.shape[1]

    def validar(self) -> None:
        """Confere formas compartilhadas e valores finitos."""
        if self.eeg.ndim != 2 or self.mel.ndim != 2:
            raise ErroForma("eeg e mel devem ser matrizes canal × tempo")
        tempos = {self.eeg.shape[1], self.mel.shape[1], self.envelope.shape[1]}
        if len(tempos) != 1 or self.T < 1:
            raise ErroForma(f"eeg, mel e envelope devem compartilhar T ≥ 1; recebido {sorted(tempos)}")
        for nome, arr in (("eeg", self.eeg), ("mel", self.mel), ("env", self.envelope)):
            if not np.all(np.isfinite(arr)):
                raise ErroCarregamento(f"valores não finitos em {nome}", motivo="nao_finito")


def _ler_manifesto(caminho: str) -> Dict[str, Any]:
    arquivo = os.path.join(caminho, ARQUIVO_MANIFESTO)
    if not os.path.isfile(arquivo):
        raise ErroCarregamento(f"Manifesto ausente em {caminho}", motivo="ausente", caminho=arquivo)
    try:
        with open(arquivo, "r", encoding="utf-8") as f:
            manifesto = json.load(f)
        int(manifesto["T"])
        manifesto["canais"]["eeg"], manifesto["canais"]["mel"]
        manifesto["subject_id"], manifesto["stimulus_id"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ErroCarregamento(f"Manifesto inválido em {caminho}: {e}", motivo="manifesto",
                               caminho=arquivo) from e
    return manifesto


def _ler_matriz(caminho: str, nome: str, linhas: int, tempo: int) -> np.ndarray:
    arquivo = os.path.join(caminho, ARQUIVOS_SINAIS[nome])
    if not os.path.isfile(arquivo):
        raise ErroCarregamento(f"Arquivo ausente: {arquivo}", motivo="ausente", caminho=arquivo)
    esperado = TIPO_DISCO.itemsize * linhas * tempo
    tamanho = os.path.getsize(arquivo)
    if tamanho != esperado:
        raise ErroCarregamento(
            f"{arquivo}: {tamanho} bytes, esperado {esperado} ({linhas}×{tempo})",
            motivo="tamanho", caminho=arquivo)
    valores = np.fromfile(arquivo, dtype=TIPO_DISCO).reshape(linhas, tempo).astype(np.float32)
    if not np.all(np.isfinite(valores)):
        raise ErroCarregamento(f"Valores não finitos em {arquivo}", motivo="nao_finito", caminho=arquivo)
    return valores


def load_recording(caminho: str) -> RecordingSample:
    """
    Carrega e valida uma gravação.

    Args:
        caminho: Diretório da gravação

    Returns:
        RecordingSample validado
    """
    manifesto = _ler_manifesto(caminho)
    tempo = int(manifesto["T"])
    canais = manifesto["canais"]
    amostra = RecordingSample(
        eeg=_ler_matriz(caminho, "eeg", int(canais["eeg"]), tempo),
        mel=_ler_matriz(caminho, "mel", int(canais["mel"]), tempo),
        envelope=_ler_matriz(caminho, "env", int(canais.get("env", 1)), tempo),
        subject_id=manifesto["subject_id"],
        stimulus_id=str(manifesto["stimulus_id"]),
        proveniencia=manifesto.get("proveniencia", {}),
    )
    amostra.validar()
    return amostra


def save_recording(amostra: RecordingSample, caminho: str) -> None:
    """
    Grava uma gravação no layout em disco, de forma atômica.

    Args:
        amostra: Gravação a salvar
        caminho: Diretório de destino
    """
    amostra.validar()
    manifesto = {
        "subject_id": amostra.subject_id,
        "stimulus_id": amostra.stimulus_id,
        "sample_rate_hz": TAXA_AMOSTRAGEM_HZ,
        "T": amostra.T,
        "canais": {"eeg": amostra.eeg.shape[0], "mel": amostra.mel.shape[0], "env": 1},
        "proveniencia": amostra.proveniencia,
    }
    with diretorio_atomico(caminho) as temporario:
        with open(os.path.join(temporario, ARQUIVO_MANIFESTO), "w", encoding="utf-8") as f:
            json.dump(manifesto, f, ensure_ascii=False, indent=2, sort_keys=True)
        for nome, arr in (("eeg", amostra.eeg), ("mel", amostra.mel), ("env", amostra.envelope)):
            np.ascontiguousarray(arr, dtype=TIPO_DISCO).tofile(os.path.join(temporario, ARQUIVOS_SINAIS[nome]))


def load_dataset(diretorio: str) -> List[RecordingSample]:
    """
    Carrega todas as gravações de um diretório (subdiretórios com manifesto).

    Subdiretórios sem manifesto são ignorados com aviso.

    Args:
        diretorio: Raiz do conjunto

    Returns:
        Gravações em ordem de nome de diretório
    """
    if not os.path.isdir(diretorio):
        raise ErroCarregamento(f"Diretório de dados não encontrado: {diretorio}", motivo="ausente",
                               caminho=diretorio)
    gravacoes = []
    for nome in sorted(os.listdir(diretorio)):
        caminho = os.path.join(diretorio, nome)
        if not os.path.isdir(caminho) or nome.startswith("."):
            continue
        if not os.path.isfile(os.path.join(caminho, ARQUIVO_MANIFESTO)):
            logger.warning(f"Ignorando {caminho}: sem manifesto")
            continue
        gravacoes.append(load_recording(caminho))
    logger.info(f"{len(gravacoes)} gravações carregadas de {diretorio}")
    return gravacoes


def nome_gravacao(amostra: RecordingSample) -> str:
    """Nome canônico do diretório de uma gravação."""
    sujeito = f"{amostra.subject_id:03d}" if isinstance(amostra.subject_id, int) else str(amostra.subject_id)
    return f"sub-{sujeito}_{amostra.stimulus_id}"
