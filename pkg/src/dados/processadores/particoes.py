"""
Módulo de particionamento da validação cruzada em quatro folds.

Os folds dividem os sujeitos 1..85 em quatro conjuntos de validação
contíguos; o estímulo AB1 nunca entra na validação, e nenhum estímulo visto
no treino de um fold aparece na validação desse fold.
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Union

import yaml

from src.dados.extratores.gravacoes import RecordingSample
from src.dados.processadores.janelas import Janela, window
from src.utils.erros import ErroConfiguracao, ErroDivisaoVazia

logger = logging.getLogger(__name__)

SUJEITOS = frozenset(range(1, 86))
ESTIMULO_EXCLUIDO = "AB1"

# Sujeitos de validação de cada fold
FAIXAS_VALIDACAO = {
    1: (1, 26),
    2: (27, 48),
    3: (49, 71),
    4: (72, 85),
}


def _ordem_sujeito(sujeito):
    # ids numéricos antes dos textuais
    return (isinstance(sujeito, str), sujeito)


@dataclass(frozen=True)
class FoldSpec:
    fold_id: int
    train_subjects: FrozenSet[Union[int, str]]
    val_subjects: FrozenSet[Union[int, str]]
    excluded_val_stimuli: FrozenSet[str] = field(default_factory=lambda: frozenset({ESTIMULO_EXCLUIDO}))

    def validar(self, protocolo_completo: bool = True) -> None:
        """
        Args:
            protocolo_completo: Exige também treino ∪ validação == {1..85}
        """
        if self.train_subjects & self.val_subjects:
            raise ErroConfiguracao(f"fold {self.fold_id}: sujeitos em treino e validação")
        if ESTIMULO_EXCLUIDO not in self.excluded_val_stimuli:
            raise ErroConfiguracao(f"fold {self.fold_id}: {ESTIMULO_EXCLUIDO} deve ser excluído da validação")
        if protocolo_completo and (self.train_subjects | self.val_subjects) != SUJEITOS:
            raise ErroConfiguracao(f"fold {self.fold_id}: sujeitos não cobrem 1..85")

    def para_dict(self) -> dict:
        return {
            "fold_id": self.fold_id,
            "train_subjects": sorted(self.train_subjects, key=_ordem_sujeito),
            "val_subjects": sorted(self.val_subjects, key=_ordem_sujeito),
            "excluded_val_stimuli": sorted(self.excluded_val_stimuli),
        }


def make_folds() -> List[FoldSpec]:
    """Os quatro folds do protocolo, com AB1 fora da validação."""
    folds = []
    for fold_id, (inicio, fim) in FAIXAS_VALIDACAO.items():
        validacao = frozenset(range(inicio, fim + 1))
        fold = FoldSpec(fold_id, SUJEITOS - validacao, validacao)
        fold.validar()
        folds.append(fold)
    return folds


def obter_fold(fold_id: int) -> FoldSpec:
    if fold_id not in FAIXAS_VALIDACAO:
        raise ErroConfiguracao(f"fold deve estar em 1..4: {fold_id}")
    return make_folds()[fold_id - 1]


def carregar_fold(caminho: str) -> FoldSpec:
    """
    Lê um fold personalizado de um arquivo YAML.

    Campos: fold_id, train_subjects, val_subjects e (opcional)
    excluded_val_stimuli; AB1 é sempre acrescentado aos excluídos.
    """
    try:
        with open(caminho, "r", encoding="utf-8") as f:
            dados = yaml.safe_load(f)
        fold = FoldSpec(
            fold_id=int(dados.get("fold_id", 0)),
            train_subjects=frozenset(dados["train_subjects"]),
            val_subjects=frozenset(dados["val_subjects"]),
            excluded_val_stimuli=frozenset(dados.get("excluded_val_stimuli", [])) | {ESTIMULO_EXCLUIDO},
        )
    except (OSError, yaml.YAMLError, KeyError, TypeError, AttributeError) as e:
        raise ErroConfiguracao(f"Arquivo de fold inválido {caminho}: {e}") from e
    fold.validar(protocolo_completo=False)
    return fold


def selecionar_gravacoes(dataset: Iterable[RecordingSample], fold: FoldSpec,
                         divisao: str) -> List[RecordingSample]:
    """
    Gravações de uma divisão do fold.

    Validação: sujeito de validação, estímulo fora dos excluídos e fora de
    todos os estímulos presentes no treino do fold.
    """
    dataset = list(dataset)
    treino = [g for g in dataset if g.subject_id in fold.train_subjects]
    if divisao == "train":
        return treino
    if divisao != "val":
        raise ErroConfiguracao(f"divisão deve ser 'train' ou 'val': {divisao}")
    vistos = {g.stimulus_id for g in treino}
    validacao = []
    for g in dataset:
        if g.subject_id not in fold.val_subjects:
            continue
        if g.stimulus_id in fold.excluded_val_stimuli or g.stimulus_id in vistos:
            logger.debug(f"Excluída da validação: sujeito {g.subject_id}, estímulo {g.stimulus_id}")
            continue
        validacao.append(g)
    return validacao


def select_windows(dataset: Iterable[RecordingSample], fold: FoldSpec, divisao: str,
                   comprimento: int = 320, salto: int = 64,
                   usar_envelope: bool = True) -> List[Janela]:
    """
    Janelas de uma divisão ('train' ou 'val') do fold.

    Gravações mais curtas que a janela são ignoradas com aviso.

    Returns:
        Janelas na ordem das gravações
    """
    janelas: List[Janela] = []
    for gravacao in selecionar_gravacoes(dataset, fold, divisao):
        atuais = window(gravacao, comprimento, salto, permitir_vazio=True, usar_envelope=usar_envelope)
        if not atuais:
            logger.warning(f"Gravação curta ignorada: sujeito {gravacao.subject_id}, "
                           f"estímulo {gravacao.stimulus_id} (T={gravacao.T})")
        janelas.extend(atuais)
    if not janelas:
        raise ErroDivisaoVazia(f"fold {fold.fold_id}: divisão '{divisao}' sem janelas")
    logger.info(f"fold {fold.fold_id}, divisão {divisao}: {len(janelas)} janelas")
    return janelas
