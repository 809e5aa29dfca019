"""
Testes do formato binário de checkpoint.
"""

import json
import struct

import numpy as np
import pytest

from src.modelo.arquitetura import build_model, model_forward
from src.treinamento.checkpoint import (
    VERSAO,
    Checkpoint,
    carregar_checkpoint,
    ler_cabecalho,
    ler_metadados,
    load_checkpoint,
    save_checkpoint,
)
from src.utils.erros import ErroFormatoCheckpoint

PREFIXO = struct.Struct("<4sIQ")


def remontar(dados: bytes, cabecalho: dict, versao: int = VERSAO) -> bytes:
    """Regrava o checkpoint com outro cabeçalho e o mesmo payload."""
    payload = dados[cabecalho.pop("_inicio_payload"):]
    texto = json.dumps(cabecalho, sort_keys=True).encode("utf-8")
    return PREFIXO.pack(b"CCN1", versao, len(texto)) + texto + payload


def motivo_de(dados: bytes) -> str:
    with pytest.raises(ErroFormatoCheckpoint) as erro:
        load_checkpoint(dados)
    return erro.value.motivo


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_ida_e_volta_bit_a_bit(config_dois_blocos, rng, dtype):
    modelo = build_model(config_dois_blocos, seed=5, dtype=dtype)
    restaurado = load_checkpoint(save_checkpoint(modelo, {"fold_id": 2}))
    original, copia = modelo.estado(), restaurado.estado()
    assert list(original) == list(copia)
    for nome in original:
        assert copia[nome].dtype == original[nome].dtype
        assert np.array_equal(copia[nome], original[nome])
    eeg = rng.standard_normal((1, 64, 40))
    assert np.array_equal(model_forward(eeg, modelo).dados, model_forward(eeg, restaurado).dados)


def test_serializacao_deterministica(config_minima):
    a = save_checkpoint(build_model(config_minima, 1), {"seed": 1})
    b = save_checkpoint(build_model(config_minima, 1), {"seed": 1})
    assert a == b


def test_magica_invalida(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    assert motivo_de(b"XXXX" + dados[4:]) == "magica"


def test_versao_desconhecida(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    assert motivo_de(remontar(dados, ler_cabecalho(dados), versao=VERSAO + 1)) == "versao"


def test_truncado(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    assert motivo_de(dados[:-10]) == "truncado"
    assert motivo_de(dados[:8]) == "truncado"


def test_payload_alterado(config_minima):
    dados = bytearray(save_checkpoint(build_model(config_minima, 0)))
    dados[-1] ^= 0xFF
    assert motivo_de(bytes(dados)) == "verificacao"


def test_bytes_sobrando(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    assert motivo_de(dados + b"\x00" * 4) == "forma"


def test_parametros_permutados(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    cabecalho = ler_cabecalho(dados)
    parametros = cabecalho["parametros"]
    parametros[0], parametros[1] = parametros[1], parametros[0]
    assert motivo_de(remontar(dados, cabecalho)) in ("verificacao", "forma")


def test_dtypes_misturados(config_minima):
    modelo = build_model(config_minima, 0)
    ultimo = list(modelo.parametros())[-1]
    ultimo.dados = ultimo.dados.astype(np.float64)
    assert motivo_de(save_checkpoint(modelo)) == "cabecalho"


def test_cabecalho_ilegivel(config_minima):
    dados = save_checkpoint(build_model(config_minima, 0))
    _, versao, tamanho = PREFIXO.unpack_from(dados)
    corrompido = dados[:PREFIXO.size] + b"{" * tamanho + dados[PREFIXO.size + tamanho:]
    assert motivo_de(corrompido) == "cabecalho"


def test_salvar_e_ler_metadados(tmp_path, config_minima):
    caminho = str(tmp_path / "modelo.ccn")
    Checkpoint(build_model(config_minima, 3), {"fold_id": 4, "seed": 3}).salvar(caminho)
    assert ler_metadados(caminho) == {"fold_id": 4, "seed": 3}
    assert len(carregar_checkpoint(caminho).blocos) == 1
