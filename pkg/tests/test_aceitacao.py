"""
Execuções longas de aceitação em dados sintéticos (marcadas como lento).

Rode com: pytest -m lento
"""

import numpy as np
import pytest

from src.avaliacao.ensemble import ensemble_sets
from src.avaliacao.linha_base import ridge_baseline
from src.avaliacao.metricas import agregar, evaluate
from src.avaliacao.predicoes import Predicao
from src.dados.extratores.sintetico import SynthSpec, synth_dataset
from src.dados.extratores.gravacoes import load_dataset
from src.dados.processadores.janelas import window
from src.modelo.arquitetura import ModelConfig, build_model
from src.treinamento.otimizador import AdamHyper
from src.treinamento.treinador import prever_lotes, treinar_janelas, TrainSpec

pytestmark = pytest.mark.lento

FIM_TREINO = 1024
INICIO_TESTE = 1472
SEMENTES = (0, 1, 2, 3, 4)


@pytest.fixture(scope="module")
def divisao_temporal(tmp_path_factory):
    """Treino, validação e teste em trechos disjuntos de cada gravação."""
    diretorio = tmp_path_factory.mktemp("sintetico")
    synth_dataset(SynthSpec(n_subjects=8, recordings_per_subject=2, T=1920, snr_db=10.0, lag_taps=4, seed=0),
                  str(diretorio))
    treino, validacao, teste = [], [], []
    for gravacao in load_dataset(str(diretorio)):
        for janela in window(gravacao, 320, 64):
            if janela.inicio + 320 <= FIM_TREINO:
                treino.append(janela)
            elif janela.inicio >= INICIO_TESTE:
                teste.append(janela)
            elif janela.inicio >= FIM_TREINO and janela.inicio + 320 <= INICIO_TESTE:
                validacao.append(janela)
    return treino, validacao, teste


def config_pequena():
    return ModelConfig(num_blocks=2, hidden_width=32, stack_filters=[64, 64, 64, 32, 32])


def pontuacao(modelo, janelas):
    eeg = np.stack([j.eeg for j in janelas])
    pred = prever_lotes(modelo, eeg, 16)
    return agregar([evaluate(p, j.alvo[-10:]) for p, j in zip(pred, janelas)])


@pytest.fixture(scope="module")
def modelos(divisao_temporal):
    treino, validacao, _ = divisao_temporal
    treinados = []
    for semente in SEMENTES:
        spec = TrainSpec(window_len=320, batch_size=8, max_epochs=40, patience=8, seed=semente)
        checkpoint = treinar_janelas(build_model(config_pequena(), semente), treino, validacao, spec,
                                     hiper=AdamHyper(lr=2e-3))
        treinados.append(checkpoint.modelo)
    return treinados


def test_generaliza_para_janelas_nao_vistas(divisao_temporal, modelos):
    treino, _, teste = divisao_temporal
    rede = pontuacao(modelos[0], teste).mean_r
    ridge = ridge_baseline(treino, teste, atrasos=4, alpha=1.0).mean_r
    assert rede >= 0.5
    assert rede >= ridge - 0.05


def test_ensemble_domina_media_dos_membros(divisao_temporal, modelos):
    _, _, teste = divisao_temporal
    alvos = {(str(j.subject_id), f"{j.stimulus_id}@{j.inicio}"): j.alvo[-10:] for j in teste}
    conjuntos = []
    for modelo in modelos:
        pred = prever_lotes(modelo, np.stack([j.eeg for j in teste]), 16)
        conjuntos.append([Predicao(p, j.subject_id, f"{j.stimulus_id}@{j.inicio}") for p, j in zip(pred, teste)])

    # r por janela e subbanda: membros (M, janelas, 10) e ensemble (janelas, 10)
    membros = np.array([[evaluate(p, alvos[p.chave]).subband_r for p in sorted(c, key=lambda p: p.chave)]
                        for c in conjuntos])
    combinado = np.array([evaluate(p, alvos[p.chave]).subband_r for p in ensemble_sets(conjuntos)])
    media = membros.mean(axis=0)

    celulas = np.all(membros >= 0, axis=0)
    assert celulas.any()
    assert np.all(combinado[celulas] >= media[celulas] - 1e-5)
    assert combinado[celulas].mean() >= media[celulas].mean() - 1e-6
