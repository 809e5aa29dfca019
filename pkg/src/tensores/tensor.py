"""
Núcleo de diferenciação automática em modo reverso.

Este módulo define o Tensor (dado + gradiente + função criadora), o
Parametro (tensor aprendível com momentos do Adam), a classe base Funcao
das operações diferenciáveis e a função backward que percorre o grafo.
"""

import logging
import threading
from contextlib import contextmanager
from typing import Any, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.erros import ErroUso

logger = logging.getLogger(__name__)

_estado = threading.local()


def gradiente_habilitado() -> bool:
    """Indica se as operações devem registrar o grafo nesta thread."""
    return getattr(_estado, 'habilitado', True)


@contextmanager
def sem_gradiente() -> Iterator[None]:
    """
    Desliga o registro do grafo (inferência e validação).

    O estado é por thread, então avaliações concorrentes não interferem.
    """
    anterior = gradiente_habilitado()
    _estado.habilitado = False
    try:
        yield
    finally:
        _estado.habilitado = anterior


class Tensor:
    """Array numpy com gradiente e referência à função que o produziu."""

    def __init__(self, dados: Union[np.ndarray, Sequence, float],
                 requer_grad: bool = False,
                 criador: Optional["Funcao"] = None,
                 dtype: Optional[np.dtype] = None):
        """
        Inicializa o tensor.

        Args:
            dados: Valores (convertidos para ponto flutuante)
            requer_grad: Se o gradiente deste tensor deve ser acumulado
            criador: Função que produziu o tensor (None para folhas)
            dtype: Tipo de ponto flutuante (padrão: mantém float32/float64, senão float64)
        """
        arr = np.asarray(dados)
        if dtype is None:
            dtype = arr.dtype if arr.dtype in (np.float32, np.float64) else np.float64
        arr = np.asarray(arr, dtype=dtype)
        # escalares 0-d mantêm a forma ()
        self.dados = arr if arr.flags.c_contiguous else np.ascontiguousarray(arr)
        self.requer_grad = requer_grad
        self.criador = criador
        self.grad: Optional[np.ndarray] = None

    @property
    def forma(self) -> Tuple[int, ...]:
        return self.dados.shape

    @property
    def dtype(self) -> np.dtype:
        return self.dados.dtype

    def zerar_grad(self) -> None:
        self.grad = np.zeros_like(self.dados)

    def _acumular(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=self.dados.dtype, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(forma={self.forma}, dtype={self.dtype}, requer_grad={self.requer_grad})"


class Parametro(Tensor):
    """Tensor aprendível, com nome único e momentos do otimizador Adam."""

    def __init__(self, dados: np.ndarray, nome: str):
        super().__init__(dados, requer_grad=True)
        self.nome = nome
        self.adam_m = np.zeros_like(self.dados)
        self.adam_v = np.zeros_like(self.dados)

    def converter(self, dtype: np.dtype) -> None:
        """Converte valor e estado do otimizador para outra precisão."""
        self.dados = self.dados.astype(dtype)
        self.adam_m = self.adam_m.astype(dtype)
        self.adam_v = self.adam_v.astype(dtype)
        self.grad = None if self.grad is None else self.grad.astype(dtype)

    def __repr__(self) -> str:
        return f"Parametro({self.nome!r}, forma={self.forma})"


class Funcao:
    """
    Base das operações diferenciáveis.

    Subclasses implementam forward (sobre arrays) e backward, que recebe o
    gradiente da saída e devolve um gradiente por entrada (ou None).
    """

    nome = "funcao"

    def __init__(self, *entradas: Tensor):
        self.entradas = entradas

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError("forward não implementado")

    def backward(self, g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError("backward não implementado")

    @classmethod
    def aplicar(cls, *entradas: Tensor, **kwargs: Any) -> Tensor:
        """
        Executa o forward e registra a função no grafo quando necessário.

        Args:
            *entradas: Tensores de entrada
            **kwargs: Parâmetros não diferenciáveis da operação

        Returns:
            Tensor de saída
        """
        funcao = cls(*entradas)
        saida = funcao.forward(*(t.dados for t in entradas), **kwargs)
        requer = gradiente_habilitado() and any(t.requer_grad for t in entradas)
        return Tensor(saida, requer_grad=requer, criador=funcao if requer else None,
                      dtype=saida.dtype)


def _ordem_topologica(raiz: Tensor) -> List[Tensor]:
    """Ordenação topológica iterativa (sem recursão) do grafo até a raiz."""
    visitados = set()
    ordem: List[Tensor] = []
    pilha: List[Tuple[Tensor, bool]] = [(raiz, False)]
    while pilha:
        no, expandido = pilha.pop()
        if expandido:
            ordem.append(no)
            continue
        if id(no) in visitados:
            continue
        visitados.add(id(no))
        pilha.append((no, True))
        if no.criador is not None:
            for entrada in no.criador.entradas:
                if entrada.requer_grad and id(entrada) not in visitados:
                    pilha.append((entrada, False))
    return ordem


def backward(raiz: Tensor, parametros: Optional[Iterable[Tensor]] = None) -> None:
    """
    Propaga gradientes em modo reverso a partir de uma raiz escalar.

    Os gradientes dos parâmetros informados são zerados antes, de modo que
    parâmetros fora do grafo terminam com gradiente nulo.

    Args:
        raiz: Tensor escalar (um único elemento)
        parametros: Tensores cujo gradiente deve ser (re)inicializado
    """
    if raiz.dados.size != 1:
        raise ErroUso(f"backward exige raiz escalar; recebida forma {raiz.forma}")

    for p in parametros or ():
        p.zerar_grad()

    ordem = _ordem_topologica(raiz)
    # gradientes intermediários ficam fora dos tensores para não vazar memória
    grads = {id(raiz): np.ones_like(raiz.dados)}
    for no in reversed(ordem):
        g = grads.pop(id(no), None)
        if g is None:
            continue
        if no.criador is None:
            no._acumular(g)
            continue
        for entrada, g_entrada in zip(no.criador.entradas, no.criador.backward(g)):
            if g_entrada is None or not entrada.requer_grad:
                continue
            chave = id(entrada)
            if chave in grads:
                grads[chave] = grads[chave] + g_entrada
            else:
                grads[chave] = g_entrada
