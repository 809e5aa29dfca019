"""
Testes do layout de gravações, da segmentação e do gerador sintético.
"""

import json
import os

import numpy as np
import pytest

from src.dados.extratores.gravacoes import (
    ARQUIVO_MANIFESTO,
    RecordingSample,
    load_dataset,
    load_recording,
    nome_gravacao,
    save_recording,
)
from src.dados.extratores.sintetico import (
    SynthSpec,
    defasar,
    estimulos_sujeito,
    gerar_gravacao,
    ids_sujeitos,
    matriz_mistura,
    synth_dataset,
)
from src.dados.processadores.janelas import contar_janelas, fuse_targets, window
from src.treinamento.perda import pearson_linhas
from src.utils.erros import ErroCarregamento, ErroConfiguracao, ErroForma


class TestGravacoes:
    def test_ida_e_volta(self, tmp_path, gravacao_aleatoria):
        original = gravacao_aleatoria(subject_id=7, stimulus_id="SIN007-01", T=100)
        caminho = str(tmp_path / nome_gravacao(original))
        save_recording(original, caminho)
        lida = load_recording(caminho)
        assert os.path.basename(caminho) == "sub-007_SIN007-01"
        assert lida.subject_id == 7 and lida.stimulus_id == "SIN007-01"
        assert np.array_equal(lida.eeg, original.eeg)
        assert np.array_equal(lida.mel, original.mel)
        assert np.array_equal(lida.envelope, original.envelope)

    def test_manifesto_com_t_errado(self, tmp_path, gravacao_aleatoria):
        caminho = str(tmp_path / "g")
        save_recording(gravacao_aleatoria(T=50), caminho)
        arquivo = os.path.join(caminho, ARQUIVO_MANIFESTO)
        with open(arquivo, encoding="utf-8") as f:
            manifesto = json.load(f)
        manifesto["T"] = 51
        with open(arquivo, "w", encoding="utf-8") as f:
            json.dump(manifesto, f)
        with pytest.raises(ErroCarregamento) as erro:
            load_recording(caminho)
        assert erro.value.motivo == "tamanho"

    def test_manifesto_ausente(self, tmp_path):
        (tmp_path / "vazio").mkdir()
        with pytest.raises(ErroCarregamento) as erro:
            load_recording(str(tmp_path / "vazio"))
        assert erro.value.motivo == "ausente"

    def test_valores_nao_finitos(self, tmp_path, gravacao_aleatoria):
        caminho = str(tmp_path / "g")
        save_recording(gravacao_aleatoria(T=20), caminho)
        eeg = np.fromfile(os.path.join(caminho, "eeg.raw"), dtype="<f4")
        eeg[3] = np.nan
        eeg.tofile(os.path.join(caminho, "eeg.raw"))
        with pytest.raises(ErroCarregamento) as erro:
            load_recording(caminho)
        assert erro.value.motivo == "nao_finito"

    def test_nao_salva_nao_finito(self, tmp_path, gravacao_aleatoria):
        gravacao = gravacao_aleatoria(T=20)
        gravacao.mel[0, 0] = np.inf
        with pytest.raises(ErroCarregamento):
            save_recording(gravacao, str(tmp_path / "g"))
        assert not (tmp_path / "g").exists()

    def test_tempos_diferentes(self):
        gravacao = RecordingSample(np.zeros((64, 10)), np.zeros((10, 9)), np.zeros(10), 1, "X")
        with pytest.raises(ErroForma):
            gravacao.validar()

    def test_dataset_ignora_diretorio_sem_manifesto(self, tmp_path, gravacao_aleatoria):
        save_recording(gravacao_aleatoria(subject_id=2, T=30), str(tmp_path / "sub-002_A"))
        (tmp_path / "lixo").mkdir()
        gravacoes = load_dataset(str(tmp_path))
        assert [g.subject_id for g in gravacoes] == [2]

    def test_dataset_inexistente(self, tmp_path):
        with pytest.raises(ErroCarregamento):
            load_dataset(str(tmp_path / "nao_existe"))


class TestJanelas:
    def test_fuse_targets(self):
        envelope = np.arange(5.0)
        mel = np.ones((10, 5))
        alvo = fuse_targets(envelope, mel)
        assert alvo.shape == (11, 5)
        np.testing.assert_array_equal(alvo[0], envelope)
        np.testing.assert_array_equal(alvo[1:], mel)

    def test_fuse_targets_t_diferente(self):
        with pytest.raises(ErroForma):
            fuse_targets(np.zeros(4), np.zeros((10, 5)))

    @pytest.mark.parametrize("tempo, esperado", [(448, 3), (320, 1), (384, 2), (447, 2)])
    def test_contagem(self, gravacao_aleatoria, tempo, esperado):
        janelas = window(gravacao_aleatoria(T=tempo), 320, 64)
        assert len(janelas) == esperado
        assert [j.inicio for j in janelas] == [64 * k for k in range(esperado)]

    def test_gravacao_curta(self, gravacao_aleatoria):
        with pytest.raises(ErroForma):
            window(gravacao_aleatoria(T=319), 320, 64)
        assert window(gravacao_aleatoria(T=319), 320, 64, permitir_vazio=True) == []

    def test_formula_da_contagem(self):
        for tempo in range(1, 200, 7):
            for comprimento in (1, 16, 50):
                for salto in (1, 8, 33):
                    esperado = 0 if comprimento > tempo else (tempo - comprimento) // salto + 1
                    assert contar_janelas(tempo, comprimento, salto) == esperado

    def test_conteudo_da_janela(self, gravacao_aleatoria):
        gravacao = gravacao_aleatoria(T=448)
        segunda = window(gravacao, 320, 64)[1]
        np.testing.assert_array_equal(segunda.eeg, gravacao.eeg[:, 64:384])
        np.testing.assert_array_equal(segunda.alvo[0], gravacao.envelope[0, 64:384])
        np.testing.assert_array_equal(segunda.alvo[1:], gravacao.mel[:, 64:384])

    def test_sem_envelope(self, gravacao_aleatoria):
        janela = window(gravacao_aleatoria(T=320), 320, 64, usar_envelope=False)[0]
        assert janela.alvo.shape == (10, 320)


class TestSintetico:
    def test_ids_espalhados(self):
        assert ids_sujeitos(4) == [1, 29, 57, 85]
        assert ids_sujeitos(1) == [1]

    def test_ab1_e_ultima_gravacao(self):
        assert [e for e, _ in estimulos_sujeito(0, 3)] == ["SIN001-01", "SIN001-02", "AB1"]
        assert [e for e, _ in estimulos_sujeito(4, 1)] == ["SIN005-01"]

    def test_defasar(self):
        x = np.array([[1.0, 2.0, 3.0]])
        np.testing.assert_array_equal(defasar(x, 2), [[1, 2, 3], [0, 1, 2]])

    def test_defasar_com_mais_atrasos_que_amostras(self):
        x = np.array([[1.0, 2.0, 3.0]])
        saida = defasar(x, 6)
        assert saida.shape == (6, 3)
        np.testing.assert_array_equal(saida[:3], [[1, 2, 3], [0, 1, 2], [0, 0, 1]])
        assert not saida[3:].any()

    def test_gravacao_mais_curta_que_os_atrasos(self):
        spec = SynthSpec(n_subjects=1, recordings_per_subject=1, T=3, lag_taps=6, seed=0)
        gravacao = gerar_gravacao(spec, 0, 1, 0, "SIN001-01", 1)
        assert gravacao.eeg.shape == (64, 3)
        assert np.all(np.isfinite(gravacao.eeg))

    def test_mistura_comum_com_desvio_por_sujeito(self):
        spec = SynthSpec(lag_taps=4, seed=0)
        a, b = matriz_mistura(spec, 1), matriz_mistura(spec, 29)
        assert a.shape == (64, 40)
        assert not np.array_equal(a, b)
        assert np.corrcoef(a.ravel(), b.ravel())[0, 1] == pytest.approx(0.8, abs=0.1)
        assert np.mean(a ** 2) == pytest.approx(1 / 40, rel=0.15)

    def test_deterministico(self, tmp_path, spec_sintetico_pequeno):
        synth_dataset(spec_sintetico_pequeno, str(tmp_path / "a"))
        synth_dataset(spec_sintetico_pequeno, str(tmp_path / "b"))
        for nome in sorted(os.listdir(tmp_path / "a")):
            for arquivo in ("eeg.raw", "mel.raw", "env.raw", ARQUIVO_MANIFESTO):
                with open(tmp_path / "a" / nome / arquivo, "rb") as fa, \
                        open(tmp_path / "b" / nome / arquivo, "rb") as fb:
                    assert fa.read() == fb.read()

    def test_conjunto_gerado(self, dataset_sintetico):
        assert len(dataset_sintetico) == 8
        assert {g.subject_id for g in dataset_sintetico} == {1, 29, 57, 85}
        assert sum(g.stimulus_id == "AB1" for g in dataset_sintetico) == 4
        for g in dataset_sintetico:
            assert g.eeg.shape == (64, 192)
            assert g.mel.shape == (10, 192)
            np.testing.assert_allclose(g.envelope[0], g.mel.mean(axis=0), atol=1e-6)

    def test_ab1_compartilha_mel(self, dataset_sintetico):
        ab1 = [g for g in dataset_sintetico if g.stimulus_id == "AB1"]
        assert all(np.array_equal(g.mel, ab1[0].mel) for g in ab1)
        assert not np.array_equal(ab1[0].eeg, ab1[1].eeg)

    def test_sem_ruido_e_linearmente_recuperavel(self):
        spec = SynthSpec(n_subjects=1, recordings_per_subject=1, T=400, snr_db=float("inf"), lag_taps=2, seed=1)
        gravacao = gerar_gravacao(spec, 0, 1, 0, "SIN001-01", 1)
        regressores = np.vstack([defasar(gravacao.eeg.astype(np.float64), spec.lag_taps),
                                 np.ones((1, spec.T))]).T
        alvo = gravacao.mel.astype(np.float64).T
        coeficientes, *_ = np.linalg.lstsq(regressores, alvo, rcond=None)
        r = pearson_linhas((regressores @ coeficientes).T, alvo.T)
        assert np.all(r >= 0.999)

    def test_spec_invalido(self):
        with pytest.raises(ErroConfiguracao):
            SynthSpec.de_dict({"T": 0})
        with pytest.raises(ErroConfiguracao):
            SynthSpec.de_dict({"canais": 32})
