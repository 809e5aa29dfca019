"""
Testes da verificação de gradientes por diferenças finitas.
"""

import numpy as np
import pytest

from src.tensores import operacoes as ops
from src.tensores.operacoes import LeakyRelu
from src.tensores.tensor import Funcao
from src.tensores.verificacao import CASOS, GradReport, executar_suite, grad_check


class _DobroCorrompido(Funcao):
    """2·x com o gradiente analítico errado por um fator 1.01."""

    nome = "dobro_corrompido"

    def forward(self, x):
        return 2.0 * x

    def backward(self, g):
        return (2.0 * g * 1.01,)


def test_pointwise_conv_aprovado(rng):
    relatorio = grad_check(ops.pointwise_conv, [rng.standard_normal((1, 2, 5)), rng.standard_normal((3, 2)),
                                                rng.standard_normal(3)])
    assert relatorio.passed
    assert relatorio.op_name == "pointwise_conv"


def test_layer_norm_aprovado(rng):
    relatorio = grad_check(ops.layer_norm, [rng.standard_normal((1, 4, 3)), rng.standard_normal(4),
                                            rng.standard_normal(4)])
    assert relatorio.passed


def test_gradiente_corrompido_reprovado(rng):
    relatorio = grad_check(lambda x: _DobroCorrompido.aplicar(x), [rng.standard_normal((1, 2, 3))])
    assert not relatorio.passed
    assert relatorio.max_rel_error == pytest.approx(0.01 / 1.01, rel=1e-3)


def test_linha_do_relatorio():
    linha = GradReport("layer_norm", 2.5e-7, 1e-4).linha()
    assert "op=layer_norm" in linha
    assert "passed=true" in linha


def test_suite_cobre_todas_as_operacoes():
    relatorios = executar_suite(formas_por_operacao=2, semente=7)
    nomes = [r.op_name for r in relatorios]
    assert len(relatorios) == len(CASOS) == 14
    assert set(nomes) == {
        "pointwise_conv", "linear_per_timestep", "depthwise_temporal_conv", "temporal_conv",
        "layer_norm", "leaky_relu", "causal_pad", "concat_channels", "mean_over_time",
        "softmax_channels", "scale_channels", "sum", "spatial_attention", "pearson_loss",
    }
    assert all(r.passed for r in relatorios), [r.linha() for r in relatorios if not r.passed]


def test_suite_detecta_erro_injetado(monkeypatch):
    def backward_errado(self, g):
        return (1.01 * np.where(self.positivo, g, self.inclinacao * g),)

    monkeypatch.setattr(LeakyRelu, "backward", backward_errado)
    relatorios = {r.op_name: r for r in executar_suite(formas_por_operacao=1)}
    assert not relatorios["leaky_relu"].passed
    assert relatorios["pointwise_conv"].passed


@pytest.mark.lento
def test_suite_completa_vinte_formas():
    relatorios = executar_suite()
    assert all(r.passed for r in relatorios), [r.linha() for r in relatorios if not r.passed]
