"""
Testes da perda de Pearson, do Adam e do laço de treinamento.
"""

import math

import numpy as np
import pytest

from src.dados.extratores.sintetico import SynthSpec, gerar_gravacao
from src.dados.processadores.janelas import window
from src.dados.processadores.particoes import obter_fold
from src.modelo.arquitetura import ModelConfig, build_model
from src.treinamento import treinador
from src.treinamento.ablacao import comparar_envelope
from src.treinamento.otimizador import AdamHyper, adam_step
from src.treinamento.perda import pearson, pearson_linhas, pearson_loss
from src.treinamento.treinador import ParadaAntecipada, TrainSpec, pontuar, train, treinar_janelas
from src.tensores.tensor import Parametro, Tensor, backward
from src.utils.erros import ErroConfiguracao, ErroDivisaoVazia, ErroUso


def spec_rapido(**extras):
    valores = dict(window_len=128, window_hop=64, batch_size=4, max_epochs=2, patience=5, seed=0)
    valores.update(extras)
    return TrainSpec(**valores)


class TestPearson:
    def test_proporcional(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-6)

    def test_invertido(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-6)

    def test_valores_a_mao(self):
        assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-6)
        assert pearson([1, 2, 3, 4, 5], [3, 1, 2, 5, 4]) == pytest.approx(0.6, abs=1e-6)
        assert pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8, abs=1e-6)

    def test_serie_constante_da_zero(self):
        assert pearson([5, 5, 5, 5], [1, 2, 3, 4]) == 0.0
        assert pearson([1, 2, 3, 4], [0, 0, 0, 0]) == 0.0

    def test_confere_com_corrcoef(self, rng):
        a = rng.standard_normal((1000, 50))
        b = rng.standard_normal((1000, 50)) + 0.3 * a
        esperado = np.array([np.corrcoef(x, y)[0, 1] for x, y in zip(a, b)])
        np.testing.assert_allclose(pearson_linhas(a, b), esperado, atol=1e-10)

    def test_invariancia_afim(self, rng):
        x, y = rng.standard_normal(40), rng.standard_normal(40)
        r = pearson(x, y)
        assert pearson(3.0 * x + 7.0, y) == pytest.approx(r, abs=1e-9)
        assert pearson(-2.0 * x + 1.0, y) == pytest.approx(-r, abs=1e-9)

    def test_limites(self, rng):
        r = pearson_linhas(rng.standard_normal((200, 10)), rng.standard_normal((200, 10)))
        assert np.all(np.abs(r) <= 1.0)


class TestPerda:
    def test_predicao_perfeita(self, rng):
        alvo = rng.standard_normal((2, 11, 30))
        assert float(pearson_loss(alvo.copy(), alvo).dados) == pytest.approx(-1.0, abs=1e-8)

    def test_predicao_invertida(self, rng):
        alvo = rng.standard_normal((2, 11, 30))
        assert float(pearson_loss(-alvo, alvo).dados) == pytest.approx(1.0, abs=1e-8)

    def test_perda_escalar_sem_dimensao(self, rng):
        pred = Tensor(rng.standard_normal((2, 11, 30)), requer_grad=True)
        perda = pearson_loss(pred, rng.standard_normal((2, 11, 30)))
        assert perda.forma == ()
        assert isinstance(perda.dados.item(), float)
        backward(perda, [pred])
        assert pred.grad.shape == (2, 11, 30)


class TestAdam:
    @staticmethod
    def parametro(gradiente):
        p = Parametro(np.zeros(1), "p")
        p.grad = np.array([gradiente], dtype=np.float64)
        return p

    def test_primeiro_passo(self):
        p = self.parametro(1.0)
        hiper = AdamHyper()
        adam_step([p], hiper)
        assert p.dados[0] == pytest.approx(-1e-3, rel=1e-6)
        assert hiper.step_count == 1

    def test_gradiente_nulo_nao_move(self):
        p = self.parametro(0.0)
        adam_step([p], AdamHyper())
        assert p.dados[0] == 0.0

    def test_dois_passos(self):
        p = self.parametro(1.0)
        hiper = AdamHyper()
        adam_step([p], hiper)
        adam_step([p], hiper)
        assert p.dados[0] == pytest.approx(-2e-3, rel=1e-6)

    def test_passo_corrigido_tem_tamanho_lr(self):
        p = self.parametro(1.0)
        hiper = AdamHyper(eps=0.0)
        anterior = 0.0
        for _ in range(10):
            adam_step([p], hiper)
            passo = abs(p.dados[0] - anterior)
            assert 0.99 * hiper.lr <= passo <= 1.01 * hiper.lr
            anterior = p.dados[0]

    def test_antes_de_backward(self):
        with pytest.raises(ErroUso):
            adam_step([Parametro(np.zeros(2), "p")], AdamHyper())

    def test_hiper_invalido(self):
        with pytest.raises(ErroConfiguracao):
            AdamHyper.de_dict({"lr": 0.0})
        with pytest.raises(ErroConfiguracao):
            AdamHyper.de_dict({"momento": 0.5})


class TestTrainSpec:
    @pytest.mark.parametrize("campos", [
        {"batch_size": 0},
        {"window_len": 0},
        {"precision": 16},
        {"max_steps": 0},
    ])
    def test_invalido(self, campos):
        with pytest.raises(ErroConfiguracao):
            TrainSpec(**campos).validar()

    def test_chave_desconhecida(self):
        with pytest.raises(ErroConfiguracao):
            TrainSpec.de_dict({"epocas": 3})

    def test_precisao(self):
        assert TrainSpec().dtype == np.float32
        assert TrainSpec(precision=64).dtype == np.float64


class TestParadaAntecipada:
    def test_paciencia(self):
        parada = ParadaAntecipada(paciencia=2)
        assert parada.atualizar(0.1)
        assert not parada.atualizar(0.05)
        assert not parada.deve_parar
        assert not parada.atualizar(0.1)
        assert parada.deve_parar
        assert parada.melhor == 0.1


class TestTreino:
    def test_train_no_fold(self, dataset_sintetico, config_minima):
        checkpoint = train(build_model(config_minima, 0), dataset_sintetico, obter_fold(1), spec_rapido())
        assert checkpoint.metadados["fold_id"] == 1
        assert checkpoint.metadados["seed"] == 0
        assert list(checkpoint.historico.columns) == ["epoca", "perda_media", "val_r", "passos"]
        assert len(checkpoint.historico) == 2
        assert math.isfinite(checkpoint.metadados["validation_score"])
        assert checkpoint.metadados["validation_score"] == checkpoint.historico["val_r"].max()

    def test_deterministico(self, dataset_sintetico, config_minima):
        spec = spec_rapido(max_steps=3)
        a = train(build_model(config_minima, 0), dataset_sintetico, obter_fold(1), spec)
        b = train(build_model(config_minima, 0), dataset_sintetico, obter_fold(1), spec)
        assert a.historico.equals(b.historico)
        assert a.para_bytes() == b.para_bytes()

    def test_max_steps(self, dataset_sintetico, config_minima):
        checkpoint = train(build_model(config_minima, 0), dataset_sintetico, obter_fold(1),
                           spec_rapido(max_steps=2, max_epochs=10))
        assert checkpoint.historico["passos"].iloc[-1] == 2
        assert len(checkpoint.historico) == 1

    def test_parada_antecipada(self, monkeypatch, dataset_sintetico, config_minima):
        pontuacoes = iter([0.5, 0.4, 0.3, 0.2, 0.1])
        monkeypatch.setattr(treinador, "pontuar", lambda *args, **kwargs: next(pontuacoes))
        checkpoint = train(build_model(config_minima, 0), dataset_sintetico, obter_fold(1),
                           spec_rapido(max_epochs=5, patience=1))
        assert len(checkpoint.historico) == 2
        assert checkpoint.metadados["epoch"] == 1
        assert checkpoint.metadados["validation_score"] == 0.5

    def test_divisao_vazia(self, gravacao_aleatoria, config_minima):
        janelas = window(gravacao_aleatoria(), 128, 64)
        with pytest.raises(ErroDivisaoVazia):
            treinar_janelas(build_model(config_minima, 0), [], janelas, spec_rapido())
        with pytest.raises(ErroDivisaoVazia):
            treinar_janelas(build_model(config_minima, 0), janelas, [], spec_rapido())

    def test_janela_menor_que_contexto(self, gravacao_aleatoria, config_minima):
        janelas = window(gravacao_aleatoria(), 4, 4)
        with pytest.raises(ErroConfiguracao):
            treinar_janelas(build_model(config_minima, 0), janelas, janelas, spec_rapido(window_len=4))

    def test_subbandas_incompativeis(self, gravacao_aleatoria, config_minima):
        janelas = window(gravacao_aleatoria(), 128, 64, usar_envelope=False)
        with pytest.raises(ErroConfiguracao):
            treinar_janelas(build_model(config_minima, 0), janelas, janelas, spec_rapido())

    def test_treino_melhora_na_mesma_janela(self, config_minima):
        spec_dados = SynthSpec(n_subjects=1, recordings_per_subject=1, T=128, snr_db=40.0, lag_taps=1, seed=0)
        janelas = window(gerar_gravacao(spec_dados, 0, 1, 0, "SIN001-01", 1), 128, 128)
        modelo = build_model(config_minima, 0, dtype=np.float64)
        eeg = np.stack([j.eeg for j in janelas]).astype(np.float64)
        alvo = np.stack([j.alvo for j in janelas]).astype(np.float64)
        inicial = pontuar(modelo, eeg, alvo, 1)
        checkpoint = treinar_janelas(modelo, janelas, janelas,
                                     spec_rapido(window_len=128, batch_size=1, max_epochs=30,
                                                 patience=30, precision=64),
                                     AdamHyper(lr=5e-3))
        assert checkpoint.metadados["validation_score"] > inicial

    def test_ablacao_do_envelope(self, dataset_sintetico, config_minima):
        resultado = comparar_envelope(dataset_sintetico, obter_fold(1), config_minima,
                                      spec_rapido(max_epochs=1, max_steps=2))
        assert set(resultado) == {"com_envelope", "sem_envelope"}
        assert all(math.isfinite(v) for v in resultado.values())


@pytest.mark.lento
def test_memoriza_uma_gravacao():
    spec_dados = SynthSpec(n_subjects=1, recordings_per_subject=1, T=320, snr_db=40.0, lag_taps=1, seed=0)
    janelas = window(gerar_gravacao(spec_dados, 0, 1, 0, "SIN001-01", 1), 320, 320)
    config = ModelConfig(num_blocks=1, hidden_width=16, stack_filters=[32, 32, 32, 16, 16])
    spec = TrainSpec(window_len=320, window_hop=320, batch_size=1, max_epochs=200, patience=200,
                     max_steps=200)
    checkpoint = treinar_janelas(build_model(config, 0), janelas, janelas, spec, AdamHyper(lr=5e-3))
    assert checkpoint.metadados["validation_score"] >= 0.95
