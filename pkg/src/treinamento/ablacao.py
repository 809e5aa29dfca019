"""
Comparação do treino com e sem o envelope como subbanda auxiliar.
"""

import logging
from dataclasses import replace
from typing import Dict, Optional

from src.dados.processadores.particoes import FoldSpec
from src.modelo.arquitetura import ModelConfig, build_model
from src.treinamento.otimizador import AdamHyper
from src.treinamento.treinador import TrainSpec, train

logger = logging.getLogger(__name__)


def comparar_envelope(dataset, fold: FoldSpec, config: ModelConfig, spec: TrainSpec,
                      hiper: Optional[AdamHyper] = None) -> Dict[str, float]:
    """
    Treina duas variantes com a mesma semente: alvo de 11 subbandas e alvo só com o mel.

    Args:
        dataset: Gravações
        fold: Fold de treino/validação
        config: Config do modelo com envelope (11 saídas)
        spec: Especificação do treino (usar_envelope é sobrescrito)
        hiper: Hiperparâmetros do Adam

    Returns:
        Pontuações de validação {'com_envelope', 'sem_envelope'}
    """
    dataset = list(dataset)
    variantes = {
        "com_envelope": (replace(config, output_subbands=11), replace(spec, usar_envelope=True)),
        "sem_envelope": (replace(config, output_subbands=10), replace(spec, usar_envelope=False)),
    }
    pontuacoes = {}
    for nome, (config_variante, spec_variante) in variantes.items():
        modelo = build_model(config_variante, spec.seed)
        hiper_variante = replace(hiper or AdamHyper(), step_count=0)
        checkpoint = train(modelo, dataset, fold, spec_variante, hiper_variante)
        pontuacoes[nome] = checkpoint.metadados["validation_score"]
        logger.info(f"Ablação do envelope, {nome}: validação r={pontuacoes[nome]:.4f}")
    return pontuacoes
