"""
Operações diferenciáveis sobre tensores (lote × canal × tempo).

Cada operação é uma subclasse de Funcao com forward e backward explícitos;
as funções públicas validam as formas e aplicam a operação no grafo.
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.tensores.tensor import Funcao, Tensor
from src.utils.erros import ErroForma, ErroUso

logger = logging.getLogger(__name__)

EPS_LAYER_NORM = 1e-5
INCLINACAO_PADRAO = 0.01

ArrayOuTensor = Union[Tensor, np.ndarray]


def como_tensor(valor: ArrayOuTensor) -> Tensor:
    """Envolve arrays constantes; tensores passam direto."""
    return valor if isinstance(valor, Tensor) else Tensor(valor)


def _exigir_tensor3(x: Tensor, nome: str = "x") -> None:
    if x.dados.ndim != 3 or min(x.forma) < 1:
        raise ErroForma(f"{nome} deve ser lote×canal×tempo com dimensões ≥ 1; recebido {x.forma}")


def _exigir_forma(t: Tensor, forma: Tuple[int, ...], nome: str) -> None:
    if t.forma != forma:
        raise ErroForma(f"{nome} deveria ter forma {forma}; recebido {t.forma}")


# ---------------------------------------------------------------------------
# Convoluções
# ---------------------------------------------------------------------------

class PointwiseConv(Funcao):
    nome = "pointwise_conv"

    def forward(self, x, peso, vies):
        self.x, self.peso = x, peso
        return np.matmul(peso, x) + vies[None, :, None]

    def backward(self, g):
        dx = np.matmul(self.peso.T, g)
        dpeso = np.tensordot(g, self.x, axes=([0, 2], [0, 2]))
        dvies = g.sum(axis=(0, 2))
        return dx, dpeso, dvies


class LinearPorPasso(PointwiseConv):
    """Camada linear aplicada independentemente em cada passo de tempo."""

    nome = "linear_per_timestep"


class DepthwiseTemporalConv(Funcao):
    nome = "depthwise_temporal_conv"

    def forward(self, x, peso, vies):
        self.forma_x, self.peso = x.shape, peso
        self.janelas = sliding_window_view(x, peso.shape[1], axis=2)
        return np.einsum('bctk,ck->bct', self.janelas, peso) + vies[None, :, None]

    def backward(self, g):
        k_total = self.peso.shape[1]
        t_saida = g.shape[2]
        dx = np.zeros(self.forma_x, dtype=g.dtype)
        for k in range(k_total):
            dx[:, :, k:k + t_saida] += g * self.peso[None, :, k, None]
        dpeso = np.einsum('bct,bctk->ck', g, self.janelas)
        return dx, dpeso, g.sum(axis=(0, 2))


class TemporalConv(Funcao):
    nome = "temporal_conv"

    def forward(self, x, peso, vies):
        self.forma_x, self.peso = x.shape, peso
        self.janelas = sliding_window_view(x, peso.shape[2], axis=2)
        saida = np.tensordot(self.janelas, peso, axes=([1, 3], [1, 2]))
        return saida.transpose(0, 2, 1) + vies[None, :, None]

    def backward(self, g):
        k_total = self.peso.shape[2]
        t_saida = g.shape[2]
        dx = np.zeros(self.forma_x, dtype=g.dtype)
        for k in range(k_total):
            dx[:, :, k:k + t_saida] += np.matmul(self.peso[:, :, k].T, g)
        dpeso = np.tensordot(g, self.janelas, axes=([0, 2], [0, 2]))
        return dx, dpeso, g.sum(axis=(0, 2))


# ---------------------------------------------------------------------------
# Normalização e ativação
# ---------------------------------------------------------------------------

class LayerNorm(Funcao):
    nome = "layer_norm"

    def forward(self, x, gama, beta, eps=EPS_LAYER_NORM):
        media = x.mean(axis=1, keepdims=True)
        centrado = x - media
        variancia = (centrado * centrado).mean(axis=1, keepdims=True)
        self.inv_desvio = 1.0 / np.sqrt(variancia + eps)
        self.x_norm = centrado * self.inv_desvio
        self.gama = gama
        return gama[None, :, None] * self.x_norm + beta[None, :, None]

    def backward(self, g):
        dx_norm = g * self.gama[None, :, None]
        dx = self.inv_desvio * (
            dx_norm
            - dx_norm.mean(axis=1, keepdims=True)
            - self.x_norm * (dx_norm * self.x_norm).mean(axis=1, keepdims=True)
        )
        dgama = (g * self.x_norm).sum(axis=(0, 2))
        dbeta = g.sum(axis=(0, 2))
        return dx, dgama, dbeta


class LeakyRelu(Funcao):
    nome = "leaky_relu"

    def forward(self, x, inclinacao=INCLINACAO_PADRAO):
        self.positivo = x >= 0
        self.inclinacao = inclinacao
        return np.where(self.positivo, x, inclinacao * x)

    def backward(self, g):
        return (np.where(self.positivo, g, self.inclinacao * g),)


# ---------------------------------------------------------------------------
# Estrutura (padding e concatenação)
# ---------------------------------------------------------------------------

class CausalPad(Funcao):
    nome = "causal_pad"

    def forward(self, x, quantidade=0):
        self.quantidade = quantidade
        return np.pad(x, ((0, 0), (0, 0), (quantidade, 0)))

    def backward(self, g):
        return (g[:, :, self.quantidade:],)


class ConcatCanais(Funcao):
    nome = "concat_channels"

    def forward(self, *partes):
        self.cortes = np.cumsum([p.shape[1] for p in partes])[:-1]
        return np.concatenate(partes, axis=1)

    def backward(self, g):
        return tuple(np.split(g, self.cortes, axis=1))


# ---------------------------------------------------------------------------
# Peças da atenção espacial
# ---------------------------------------------------------------------------

class MediaTemporal(Funcao):
    nome = "mean_over_time"

    def forward(self, x):
        self.forma_x = x.shape
        return x.mean(axis=2, keepdims=True)

    def backward(self, g):
        return (np.broadcast_to(g / self.forma_x[2], self.forma_x).copy(),)


class SoftmaxCanais(Funcao):
    """Softmax sobre o eixo de canais, multiplicado por `escala`."""

    nome = "softmax_channels"

    def forward(self, z, escala=1.0):
        e = np.exp(z - z.max(axis=1, keepdims=True))
        soma = e.sum(axis=1, keepdims=True)
        self.probabilidades = e / soma
        self.escala = escala
        # escala*e/soma (e não escala*(e/soma)) mantém pesos uniformes exatamente iguais a 1
        return (escala * e) / soma

    def backward(self, g):
        s = self.probabilidades
        return (self.escala * s * (g - (g * s).sum(axis=1, keepdims=True)),)


class EscalarCanais(Funcao):
    nome = "scale_channels"

    def forward(self, x, pesos):
        self.x, self.pesos = x, pesos
        return x * pesos

    def backward(self, g):
        return g * self.pesos, (g * self.x).sum(axis=2, keepdims=True)


class Soma(Funcao):
    nome = "sum"

    def forward(self, x):
        self.forma_x = x.shape
        return np.asarray(x.sum(), dtype=x.dtype)

    def backward(self, g):
        return (np.full(self.forma_x, g, dtype=g.dtype),)


# ---------------------------------------------------------------------------
# API funcional
# ---------------------------------------------------------------------------

def pointwise_conv(x: ArrayOuTensor, peso: ArrayOuTensor, vies: ArrayOuTensor) -> Tensor:
    """
    Convolução pontual: out[b,o,t] = vies[o] + Σ_i peso[o,i]·x[b,i,t].

    Args:
        x: Tensor (B, C_in, T)
        peso: Matriz (C_out, C_in)
        vies: Vetor (C_out,)

    Returns:
        Tensor (B, C_out, T)
    """
    x, peso, vies = como_tensor(x), como_tensor(peso), como_tensor(vies)
    _exigir_tensor3(x)
    if peso.dados.ndim != 2 or peso.forma[1] != x.forma[1]:
        raise ErroForma(f"peso {peso.forma} incompatível com {x.forma[1]} canais de entrada")
    _exigir_forma(vies, (peso.forma[0],), "vies")
    return PointwiseConv.aplicar(x, peso, vies)


def linear_per_timestep(x: ArrayOuTensor, peso: ArrayOuTensor, vies: ArrayOuTensor) -> Tensor:
    """Camada totalmente conectada por passo de tempo (mesmo contrato de pointwise_conv)."""
    x, peso, vies = como_tensor(x), como_tensor(peso), como_tensor(vies)
    _exigir_tensor3(x)
    if peso.dados.ndim != 2 or peso.forma[1] != x.forma[1]:
        raise ErroForma(f"peso {peso.forma} incompatível com {x.forma[1]} canais de entrada")
    _exigir_forma(vies, (peso.forma[0],), "vies")
    return LinearPorPasso.aplicar(x, peso, vies)


def depthwise_temporal_conv(x: ArrayOuTensor, peso: ArrayOuTensor, vies: ArrayOuTensor) -> Tensor:
    """
    Convolução temporal por canal (grupos = canais), modo válido.

    Args:
        x: Tensor (B, C, T)
        peso: Núcleos (C, K)
        vies: Vetor (C,)

    Returns:
        Tensor (B, C, T − K + 1)
    """
    x, peso, vies = como_tensor(x), como_tensor(peso), como_tensor(vies)
    _exigir_tensor3(x)
    if peso.dados.ndim != 2 or peso.forma[0] != x.forma[1]:
        raise ErroForma(f"peso {peso.forma} incompatível com {x.forma[1]} canais")
    if x.forma[2] < peso.forma[1]:
        raise ErroForma(f"tempo {x.forma[2]} menor que o núcleo {peso.forma[1]}")
    _exigir_forma(vies, (x.forma[1],), "vies")
    return DepthwiseTemporalConv.aplicar(x, peso, vies)


def temporal_conv(x: ArrayOuTensor, peso: ArrayOuTensor, vies: ArrayOuTensor) -> Tensor:
    """
    Convolução temporal completa (sem grupos), modo válido.

    Args:
        x: Tensor (B, C_in, T)
        peso: Núcleos (C_out, C_in, K)
        vies: Vetor (C_out,)

    Returns:
        Tensor (B, C_out, T − K + 1)
    """
    x, peso, vies = como_tensor(x), como_tensor(peso), como_tensor(vies)
    _exigir_tensor3(x)
    if peso.dados.ndim != 3 or peso.forma[1] != x.forma[1]:
        raise ErroForma(f"peso {peso.forma} incompatível com {x.forma[1]} canais de entrada")
    if x.forma[2] < peso.forma[2]:
        raise ErroForma(f"tempo {x.forma[2]} menor que o núcleo {peso.forma[2]}")
    _exigir_forma(vies, (peso.forma[0],), "vies")
    return TemporalConv.aplicar(x, peso, vies)


def layer_norm(x: ArrayOuTensor, gama: ArrayOuTensor, beta: ArrayOuTensor,
               eps: float = EPS_LAYER_NORM) -> Tensor:
    """Normaliza sobre os canais em cada (b, t) e aplica gama·(·)+beta."""
    x, gama, beta = como_tensor(x), como_tensor(gama), como_tensor(beta)
    _exigir_tensor3(x)
    _exigir_forma(gama, (x.forma[1],), "gama")
    _exigir_forma(beta, (x.forma[1],), "beta")
    return LayerNorm.aplicar(x, gama, beta, eps=eps)


def leaky_relu(x: ArrayOuTensor, inclinacao: float = INCLINACAO_PADRAO) -> Tensor:
    """x onde x ≥ 0, inclinacao·x caso contrário."""
    if not 0 < inclinacao < 1:
        raise ErroUso(f"inclinação deve estar em (0, 1); recebido {inclinacao}")
    return LeakyRelu.aplicar(como_tensor(x), inclinacao=inclinacao)


def causal_pad(x: ArrayOuTensor, quantidade: int) -> Tensor:
    """Antepõe `quantidade` zeros no eixo do tempo."""
    if quantidade < 0:
        raise ErroUso(f"quantidade de padding negativa: {quantidade}")
    x = como_tensor(x)
    _exigir_tensor3(x)
    return CausalPad.aplicar(x, quantidade=int(quantidade))


def concat_channels(partes: Sequence[ArrayOuTensor]) -> Tensor:
    """Concatena ao longo dos canais, na ordem da lista."""
    if not partes:
        raise ErroForma("concat_channels exige ao menos um tensor")
    tensores = [como_tensor(p) for p in partes]
    for t in tensores:
        _exigir_tensor3(t)
    b, _, tempo = tensores[0].forma
    for t in tensores[1:]:
        if t.forma[0] != b or t.forma[2] != tempo:
            raise ErroForma(f"lote/tempo incompatíveis: {tensores[0].forma} vs {t.forma}")
    return ConcatCanais.aplicar(*tensores)


def mean_over_time(x: ArrayOuTensor) -> Tensor:
    """Média no eixo do tempo, mantendo a dimensão: (B, C, 1)."""
    x = como_tensor(x)
    _exigir_tensor3(x)
    return MediaTemporal.aplicar(x)


def softmax_channels(z: ArrayOuTensor, escala: float = 1.0) -> Tensor:
    """Softmax sobre os canais multiplicado por `escala`."""
    z = como_tensor(z)
    _exigir_tensor3(z)
    return SoftmaxCanais.aplicar(z, escala=escala)


def scale_channels(x: ArrayOuTensor, pesos: ArrayOuTensor) -> Tensor:
    """Multiplica cada canal por um peso por item de lote: pesos (B, C, 1)."""
    x, pesos = como_tensor(x), como_tensor(pesos)
    _exigir_tensor3(x)
    _exigir_forma(pesos, (x.forma[0], x.forma[1], 1), "pesos")
    return EscalarCanais.aplicar(x, pesos)


def soma(x: ArrayOuTensor) -> Tensor:
    """Soma de todos os elementos (escalar)."""
    return Soma.aplicar(como_tensor(x))
