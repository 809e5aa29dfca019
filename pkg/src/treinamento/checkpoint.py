"""
Serialização determinística de checkpoints.

Layout (little-endian):
- 4 bytes: mágica "CCN1"
- u32: versão
- u64: tamanho do cabeçalho
- cabeçalho: JSON UTF-8 (config, metadados, lista ordenada nome/forma/dtype, sha256 do payload)
- payload: valores dos parâmetros na ordem do cabeçalho
"""

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.modelo.arquitetura import Model, ModelConfig, build_model
from src.utils.arquivos import escrever_atomico
from src.utils.erros import ErroConfiguracao, ErroFormatoCheckpoint

logger = logging.getLogger(__name__)

MAGICA = b"CCN1"
VERSAO = 1
_PREFIXO = struct.Struct("<4sIQ")
_TIPOS = {"float32": np.dtype("<f4"), "float64": np.dtype("<f8")}


@dataclass
class Checkpoint:
    """Modelo treinado com metadados e histórico por época."""
    modelo: Model
    metadados: Dict[str, Any] = field(default_factory=dict)
    historico: Optional[pd.DataFrame] = None

    def para_bytes(self) -> bytes:
        meta = dict(self.metadados)
        if self.historico is not None:
            meta["historico"] = self.historico.to_dict(orient="records")
        return save_checkpoint(self.modelo, meta)

    def salvar(self, caminho: str) -> None:
        escrever_atomico(caminho, self.para_bytes())
        logger.info(f"Checkpoint salvo em {caminho}")


def save_checkpoint(modelo: Model, metadados: Optional[Dict[str, Any]] = None) -> bytes:
    """
    Serializa o modelo.

    Args:
        modelo: Modelo a salvar
        metadados: Fold, semente, época, pontuação de validação etc.

    Returns:
        Bytes do checkpoint
    """
    partes = []
    parametros = []
    for p in modelo.parametros():
        nome_tipo = p.dtype.name
        if nome_tipo not in _TIPOS:
            raise ErroConfiguracao(f"dtype não suportado em checkpoint: {nome_tipo}")
        partes.append(np.ascontiguousarray(p.dados, dtype=_TIPOS[nome_tipo]).tobytes())
        parametros.append({"nome": p.nome, "forma": list(p.forma), "dtype": nome_tipo})
    payload = b"".join(partes)

    cabecalho = {
        "config": modelo.config.para_dict(),
        "metadados": metadados or {},
        "parametros": parametros,
        "payload_bytes": len(payload),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    texto = json.dumps(cabecalho, ensure_ascii=False, indent=2, sort_keys=True).encode("utf-8")
    return _PREFIXO.pack(MAGICA, VERSAO, len(texto)) + texto + payload


def ler_cabecalho(dados: bytes) -> Dict[str, Any]:
    """Valida o prefixo e devolve o cabeçalho decodificado."""
    if len(dados) < _PREFIXO.size:
        raise ErroFormatoCheckpoint("checkpoint menor que o prefixo", motivo="truncado")
    magica, versao, tamanho = _PREFIXO.unpack_from(dados)
    if magica != MAGICA:
        raise ErroFormatoCheckpoint(f"mágica inválida: {magica!r}", motivo="magica")
    if versao != VERSAO:
        raise ErroFormatoCheckpoint(f"versão desconhecida: {versao}", motivo="versao")
    if len(dados) < _PREFIXO.size + tamanho:
        raise ErroFormatoCheckpoint("cabeçalho truncado", motivo="truncado")
    try:
        cabecalho = json.loads(dados[_PREFIXO.size:_PREFIXO.size + tamanho].decode("utf-8"))
        cabecalho["config"], cabecalho["parametros"], cabecalho["payload_sha256"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise ErroFormatoCheckpoint(f"cabeçalho ilegível: {e}", motivo="cabecalho") from e
    cabecalho["_inicio_payload"] = _PREFIXO.size + tamanho
    return cabecalho


def load_checkpoint(dados: bytes) -> Model:
    """
    Reconstrói o modelo a partir dos bytes.

    A lista de parâmetros do cabeçalho deve coincidir, em ordem, nomes e
    formas, com a do modelo reconstruído pela config; o payload deve ter o
    tamanho somado das formas e o hash registrado.

    Args:
        dados: Bytes produzidos por save_checkpoint

    Returns:
        Modelo com os valores restaurados bit a bit
    """
    cabecalho = ler_cabecalho(dados)
    payload = dados[cabecalho["_inicio_payload"]:]

    try:
        esperado = sum(int(np.prod(p["forma"])) * _TIPOS[p["dtype"]].itemsize
                       for p in cabecalho["parametros"])
    except (KeyError, TypeError) as e:
        raise ErroFormatoCheckpoint(f"lista de parâmetros inválida: {e}", motivo="cabecalho") from e
    if len(payload) < esperado:
        raise ErroFormatoCheckpoint(f"payload truncado: {len(payload)} < {esperado}", motivo="truncado")
    if len(payload) != esperado:
        raise ErroFormatoCheckpoint(f"payload de {len(payload)} bytes, formas somam {esperado}", motivo="forma")
    if hashlib.sha256(payload).hexdigest() != cabecalho["payload_sha256"]:
        raise ErroFormatoCheckpoint("hash do payload não confere", motivo="verificacao")

    try:
        config = ModelConfig.de_dict(cabecalho["config"])
    except (ErroConfiguracao, TypeError) as e:
        raise ErroFormatoCheckpoint(f"config inválida no cabeçalho: {e}", motivo="cabecalho") from e
    tipos = {p["dtype"] for p in cabecalho["parametros"]}
    if len(tipos) != 1:
        raise ErroFormatoCheckpoint(f"dtypes misturados no cabeçalho: {sorted(tipos)}", motivo="cabecalho")
    dtype = _TIPOS[tipos.pop()]
    modelo = build_model(config, seed=0, dtype=dtype.newbyteorder("="))

    canonicos = [(p.nome, list(p.forma)) for p in modelo.parametros()]
    registrados = [(p["nome"], list(p["forma"])) for p in cabecalho["parametros"]]
    if canonicos != registrados:
        raise ErroFormatoCheckpoint("ordem/formas dos parâmetros não conferem com a config",
                                    motivo="verificacao")

    deslocamento = 0
    for p, registro in zip(modelo.parametros(), cabecalho["parametros"]):
        tipo = _TIPOS[registro["dtype"]]
        n = int(np.prod(registro["forma"]))
        valores = np.frombuffer(payload, dtype=tipo, count=n, offset=deslocamento)
        p.dados = valores.reshape(registro["forma"]).astype(tipo.newbyteorder("="))
        p.adam_m = np.zeros_like(p.dados)
        p.adam_v = np.zeros_like(p.dados)
        deslocamento += n * tipo.itemsize
    return modelo


def carregar_checkpoint(caminho: str) -> Model:
    """Lê um checkpoint do disco."""
    with open(caminho, "rb") as f:
        return load_checkpoint(f.read())


def ler_metadados(caminho: str) -> Dict[str, Any]:
    """Metadados gravados no cabeçalho de um checkpoint em disco."""
    with open(caminho, "rb") as f:
        return ler_cabecalho(f.read()).get("metadados", {})
