"""
Escrita atômica de arquivos e diretórios.

Tudo é escrito primeiro em um caminho temporário no mesmo diretório e
depois renomeado, para que falhas não deixem artefatos parciais.
"""

import hashlib
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from typing import Any, Dict, Iterator

logger = logging.getLogger(__name__)


def escrever_atomico(caminho: str, conteudo: bytes) -> None:
    """
    Grava bytes em `caminho` via arquivo temporário + rename.

    Args:
        caminho: Destino final
        conteudo: Bytes a gravar
    """
    diretorio = os.path.dirname(os.path.abspath(caminho))
    os.makedirs(diretorio, exist_ok=True)
    descritor, temporario = tempfile.mkstemp(dir=diretorio, prefix=".tmp-")
    try:
        with os.fdopen(descritor, "wb") as f:
            f.write(conteudo)
        os.replace(temporario, caminho)
    except BaseException:
        if os.path.exists(temporario):
            os.remove(temporario)
        raise


def escrever_json_atomico(caminho: str, dados: Dict[str, Any]) -> None:
    """Grava um dicionário como JSON legível, de forma atômica."""
    texto = json.dumps(dados, ensure_ascii=False, indent=2, sort_keys=True)
    escrever_atomico(caminho, (texto + "\n").encode("utf-8"))


@contextmanager
def diretorio_atomico(caminho: str) -> Iterator[str]:
    """
    Fornece um diretório temporário que substitui `caminho` ao final.

    Se o bloco levantar exceção, o temporário é removido e `caminho` fica intacto.
    """
    pai = os.path.dirname(os.path.abspath(caminho))
    os.makedirs(pai, exist_ok=True)
    temporario = tempfile.mkdtemp(dir=pai, prefix=".tmp-")
    try:
        yield temporario
    except BaseException:
        shutil.rmtree(temporario, ignore_errors=True)
        raise
    if os.path.isdir(caminho):
        shutil.rmtree(caminho)
    os.replace(temporario, caminho)


def sha256_arquivo(caminho: str) -> str:
    """Hash SHA-256 de um arquivo."""
    h = hashlib.sha256()
    with open(caminho, "rb") as f:
        for bloco in iter(lambda: f.read(1 << 20), b""):
            h.update(bloco)
    return h.hexdigest()


def sha256_diretorio(caminho: str) -> str:
    """Hash SHA-256 do conteúdo de um diretório (nomes relativos + bytes, em ordem)."""
    h = hashlib.sha256()
    for raiz, dirs, arquivos in os.walk(caminho):
        dirs.sort()
        for nome in sorted(arquivos):
            completo = os.path.join(raiz, nome)
            h.update(os.path.relpath(completo, caminho).encode("utf-8"))
            h.update(sha256_arquivo(completo).encode("ascii"))
    return h.hexdigest()
