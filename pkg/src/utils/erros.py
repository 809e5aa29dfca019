"""
Hierarquia de exceções do decodificador ConvConcatNet.

Cada classe carrega o código de saída que a interface de linha de comando
devolve quando a exceção chega até ela.
"""

from typing import Optional


class ErroConvConcat(Exception):
    """Exceção base do projeto."""

    codigo_saida: int = 1


class ErroForma(ErroConvConcat, ValueError):
    """Dimensões incompatíveis entre tensores."""

    codigo_saida = 2


class ErroUso(ErroConvConcat):
    """Uso incorreto de uma API (ex.: backward sobre raiz não escalar)."""

    codigo_saida = 2


class ErroConfiguracao(ErroConvConcat):
    """Configuração inválida."""

    codigo_saida = 2


class ErroDivisaoVazia(ErroConfiguracao):
    """Divisão de treino ou validação sem nenhuma janela."""

    codigo_saida = 4


class ErroCarregamento(ErroConvConcat):
    """Falha ao ler uma gravação do disco."""

    codigo_saida = 3

    def __init__(self, mensagem: str, motivo: str, caminho: Optional[str] = None):
        super().__init__(mensagem)
        # ausente | tamanho | nao_finito | manifesto
        self.motivo = motivo
        self.caminho = caminho


class ErroFormatoCheckpoint(ErroConvConcat):
    """Checkpoint malformado."""

    codigo_saida = 5

    def __init__(self, mensagem: str, motivo: str):
        super().__init__(mensagem)
        # magica | versao | truncado | cabecalho | forma | verificacao
        self.motivo = motivo


class ErroAlinhamento(ErroConvConcat):
    """Predições e alvos (ou membros de ensemble) desalinhados."""

    codigo_saida = 6
