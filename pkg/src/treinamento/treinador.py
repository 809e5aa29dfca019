"""
Módulo de treinamento do ConvConcatNet.

Mini-lotes embaralhados por época com Adam sobre a perda de Pearson nos
alvos de 11 subbandas; a validação usa apenas as 10 subbandas do mel e
controla a parada antecipada.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.dados.processadores.janelas import Janela
from src.dados.processadores.particoes import FoldSpec, select_windows
from src.modelo.arquitetura import Model, model_forward
from src.tensores.tensor import backward, sem_gradiente
from src.treinamento.checkpoint import Checkpoint
from src.treinamento.otimizador import AdamHyper, adam_step
from src.treinamento.perda import pearson_linhas, pearson_loss
from src.utils.erros import ErroConfiguracao, ErroConvConcat, ErroDivisaoVazia

logger = logging.getLogger(__name__)

SUBBANDAS_AVALIADAS = 10


@dataclass
class TrainSpec:
    window_len: int = 320
    window_hop: int = 64
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0
    precision: int = 32
    max_steps: Optional[int] = None
    usar_envelope: bool = True

    @classmethod
    def de_dict(cls, valores: Dict[str, Any]) -> "TrainSpec":
        conhecidos = {f.name for f in fields(cls)}
        desconhecidos = set(valores) - conhecidos
        if desconhecidos:
            raise ErroConfiguracao(f"Campos desconhecidos em TrainSpec: {sorted(desconhecidos)}")
        spec = cls(**valores)
        spec.validar()
        return spec

    def validar(self) -> None:
        for nome in ("window_len", "window_hop", "batch_size", "max_epochs", "patience"):
            if getattr(self, nome) < 1:
                raise ErroConfiguracao(f"{nome} deve ser ≥ 1: {getattr(self, nome)}")
        if self.precision not in (32, 64):
            raise ErroConfiguracao(f"precision deve ser 32 ou 64: {self.precision}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ErroConfiguracao(f"max_steps deve ser ≥ 1: {self.max_steps}")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self.precision == 32 else np.float64)


class ParadaAntecipada:
    """Interrompe após `paciencia` épocas sem melhora da validação."""

    def __init__(self, paciencia: int):
        self.paciencia = paciencia
        self.melhor = -math.inf
        self.epocas_sem_melhora = 0

    def atualizar(self, pontuacao: float) -> bool:
        """
        Registra a pontuação de uma época.

        Returns:
            True se a pontuação é a melhor até agora
        """
        if pontuacao > self.melhor:
            self.melhor = pontuacao
            self.epocas_sem_melhora = 0
            return True
        self.epocas_sem_melhora += 1
        return False

    @property
    def deve_parar(self) -> bool:
        return self.epocas_sem_melhora >= self.paciencia


def _empilhar(janelas: Sequence[Janela], dtype) -> (np.ndarray, np.ndarray):
    eeg = np.stack([j.eeg for j in janelas]).astype(dtype)
    alvo = np.stack([j.alvo for j in janelas]).astype(dtype)
    return eeg, alvo


def prever_lotes(modelo: Model, eeg: np.ndarray, tamanho_lote: int) -> np.ndarray:
    """Predição sem grafo, lote a lote."""
    saidas = []
    with sem_gradiente():
        for inicio in range(0, len(eeg), tamanho_lote):
            saidas.append(model_forward(eeg[inicio:inicio + tamanho_lote], modelo).dados)
    return np.concatenate(saidas, axis=0)


def pontuar(modelo: Model, eeg: np.ndarray, alvo: np.ndarray, tamanho_lote: int) -> float:
    """Média, sobre janelas, da correlação média nas últimas 10 subbandas."""
    pred = prever_lotes(modelo, eeg, tamanho_lote)
    r = pearson_linhas(pred[:, -SUBBANDAS_AVALIADAS:], alvo[:, -SUBBANDAS_AVALIADAS:])
    return float(r.mean(axis=1).mean())


def treinar_janelas(modelo: Model, treino: Sequence[Janela], validacao: Sequence[Janela],
                    spec: TrainSpec, hiper: Optional[AdamHyper] = None,
                    metadados: Optional[Dict[str, Any]] = None) -> Checkpoint:
    """
    Laço de treinamento sobre janelas já selecionadas.

    Args:
        modelo: Modelo (é modificado e termina com os melhores parâmetros)
        treino: Janelas de treino
        validacao: Janelas de validação
        spec: Especificação do treino
        hiper: Hiperparâmetros do Adam (padrão: lr 1e-3)
        metadados: Metadados extras gravados no checkpoint

    Returns:
        Checkpoint do melhor modelo, com histórico por época
    """
    spec.validar()
    hiper = hiper or AdamHyper()
    hiper.validar()
    if not treino or not validacao:
        raise ErroDivisaoVazia("treino e validação precisam de ao menos uma janela")
    if spec.window_len < modelo.config.context_kernel:
        raise ErroConfiguracao(f"window_len {spec.window_len} menor que context_kernel "
                               f"{modelo.config.context_kernel}")

    modelo.converter(spec.dtype)
    eeg_tr, alvo_tr = _empilhar(treino, spec.dtype)
    eeg_val, alvo_val = _empilhar(validacao, spec.dtype)
    if alvo_tr.shape[1] != modelo.config.output_subbands:
        raise ErroConfiguracao(f"alvo com {alvo_tr.shape[1]} subbandas, modelo emite "
                               f"{modelo.config.output_subbands}")

    rng = np.random.default_rng(spec.seed)
    parametros = modelo.parametros()
    n = len(eeg_tr)
    tamanho = min(spec.batch_size, n)
    parada = ParadaAntecipada(spec.patience)
    melhor_estado = modelo.estado()
    melhor_epoca = 0
    passos = 0
    historico: List[Dict[str, Any]] = []

    for epoca in range(1, spec.max_epochs + 1):
        ordem = rng.permutation(n)
        perdas = []
        for inicio in range(0, n - tamanho + 1, tamanho):
            indices = ordem[inicio:inicio + tamanho]
            perda = pearson_loss(model_forward(eeg_tr[indices], modelo), alvo_tr[indices])
            valor = perda.dados.item()
            if not math.isfinite(valor):
                raise ErroConvConcat(f"perda não finita na época {epoca}, passo {passos + 1}")
            backward(perda, parametros)
            adam_step(parametros, hiper)
            perdas.append(valor)
            passos += 1
            if spec.max_steps is not None and passos >= spec.max_steps:
                break

        val_r = pontuar(modelo, eeg_val, alvo_val, spec.batch_size)
        melhorou = parada.atualizar(val_r)
        if melhorou:
            melhor_estado = modelo.estado()
            melhor_epoca = epoca
        historico.append({"epoca": epoca, "perda_media": float(np.mean(perdas)),
                          "val_r": val_r, "passos": passos})
        logger.info(f"Época {epoca}: perda {np.mean(perdas):.4f}, validação r={val_r:.4f}"
                    f"{' (melhor)' if melhorou else ''}")

        if parada.deve_parar:
            logger.info(f"Parada antecipada após {epoca} épocas")
            break
        if spec.max_steps is not None and passos >= spec.max_steps:
            break

    modelo.carregar_estado(melhor_estado)
    meta = dict(metadados or {})
    meta.update({
        "seed": spec.seed,
        "epoch": melhor_epoca,
        "validation_score": parada.melhor,
        "train_spec": asdict(spec),
        "adam": asdict(hiper),
    })
    return Checkpoint(modelo, meta, pd.DataFrame(historico))


def train(modelo: Model, dataset, fold: FoldSpec, spec: TrainSpec,
          hiper: Optional[AdamHyper] = None) -> Checkpoint:
    """
    Treina um modelo em um fold.

    Args:
        modelo: Modelo inicializado
        dataset: Gravações disponíveis
        fold: Divisão de sujeitos
        spec: Especificação do treino
        hiper: Hiperparâmetros do Adam

    Returns:
        Checkpoint do melhor modelo segundo a validação
    """
    dataset = list(dataset)
    treino = select_windows(dataset, fold, "train", spec.window_len, spec.window_hop, spec.usar_envelope)
    validacao = select_windows(dataset, fold, "val", spec.window_len, spec.window_hop, spec.usar_envelope)
    logger.info(f"Treinando no fold {fold.fold_id}: {len(treino)} janelas de treino, "
                f"{len(validacao)} de validação")
    return treinar_janelas(modelo, treino, validacao, spec, hiper, {"fold_id": fold.fold_id})
