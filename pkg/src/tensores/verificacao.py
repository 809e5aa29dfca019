"""
Verificação de gradientes por diferenças finitas centrais.

O objetivo escalar usado é <op(entradas), R> com R aleatório fixo, o que
exercita o jacobiano completo de cada operação.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.tensores import operacoes as ops
from src.tensores.tensor import Funcao, Tensor, backward, sem_gradiente

logger = logging.getLogger(__name__)

PISO_DENOMINADOR = 1e-8
H_PADRAO = 1e-5
TOL_PADRAO = 1e-4
FORMAS_POR_OPERACAO = 20


@dataclass
class GradReport:
    """Resultado da verificação de uma operação."""
    op_name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def linha(self) -> str:
        estado = "OK" if self.passed else "FALHOU"
        return (f"op={self.op_name} max_rel_error={self.max_rel_error:.3e} "
                f"tolerance={self.tolerance:.1e} passed={str(self.passed).lower()} [{estado}]")


class _Projecao(Funcao):
    nome = "projecao"

    def forward(self, x, r=None):
        self.r = r
        return np.asarray((x * r).sum(), dtype=x.dtype)

    def backward(self, g):
        return (g * self.r,)


def grad_check(op: Callable[..., Tensor], entradas: Sequence[np.ndarray],
               h: float = H_PADRAO, tol: float = TOL_PADRAO,
               nome: Optional[str] = None, semente: int = 0) -> GradReport:
    """
    Compara gradientes analíticos com diferenças centrais (f(x+h)−f(x−h))/2h.

    Args:
        op: Função de tensores para tensor
        entradas: Arrays de entrada (convertidos para 64 bits)
        h: Passo das diferenças finitas
        tol: Tolerância do erro relativo máximo
        nome: Nome exibido no relatório
        semente: Semente da projeção aleatória

    Returns:
        GradReport com o maior erro relativo elemento a elemento
    """
    tensores = [Tensor(np.array(a, dtype=np.float64), requer_grad=True) for a in entradas]
    saida = op(*tensores)
    r = np.random.default_rng(semente).standard_normal(saida.forma)
    backward(_Projecao.aplicar(saida, r=r), tensores)

    def objetivo() -> float:
        with sem_gradiente():
            return float((op(*tensores).dados * r).sum())

    pior = 0.0
    for t in tensores:
        analitico = t.grad
        plano = t.dados.reshape(-1)
        for i in range(plano.size):
            original = plano[i]
            plano[i] = original + h
            f_mais = objetivo()
            plano[i] = original - h
            f_menos = objetivo()
            plano[i] = original
            numerico = (f_mais - f_menos) / (2 * h)
            a = analitico.reshape(-1)[i]
            denominador = max(abs(a), abs(numerico), PISO_DENOMINADOR)
            pior = max(pior, abs(a - numerico) / denominador)

    nome = nome or getattr(saida.criador, 'nome', 'op')
    return GradReport(op_name=nome, max_rel_error=pior, tolerance=tol)


# ---------------------------------------------------------------------------
# Suíte completa
# ---------------------------------------------------------------------------

Caso = Tuple[Callable[..., Tensor], List[np.ndarray]]


def _longe_de_zero(rng: np.random.Generator, forma) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=forma) * (0.1 + np.abs(rng.standard_normal(forma)))


def _caso_pointwise(rng) -> Caso:
    b, ci, co, t = rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 5), rng.integers(1, 6)
    return ops.pointwise_conv, [rng.standard_normal((b, ci, t)), rng.standard_normal((co, ci)),
                                rng.standard_normal(co)]


def _caso_linear(rng) -> Caso:
    _, entradas = _caso_pointwise(rng)
    return ops.linear_per_timestep, entradas


def _caso_depthwise(rng) -> Caso:
    b, c, k = rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 4)
    t = k + rng.integers(0, 4)
    return ops.depthwise_temporal_conv, [rng.standard_normal((b, c, t)), rng.standard_normal((c, k)),
                                         rng.standard_normal(c)]


def _caso_temporal(rng) -> Caso:
    b, ci, co, k = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 4), rng.integers(1, 4)
    t = k + rng.integers(0, 4)
    return ops.temporal_conv, [rng.standard_normal((b, ci, t)), rng.standard_normal((co, ci, k)),
                               rng.standard_normal(co)]


def _caso_layer_norm(rng) -> Caso:
    b, c, t = rng.integers(1, 3), rng.integers(2, 6), rng.integers(1, 5)
    return ops.layer_norm, [rng.standard_normal((b, c, t)), rng.standard_normal(c), rng.standard_normal(c)]


def _caso_leaky(rng) -> Caso:
    forma = (rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 6))
    return ops.leaky_relu, [_longe_de_zero(rng, forma)]


def _caso_pad(rng) -> Caso:
    forma = (rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 5))
    quantidade = int(rng.integers(0, 4))
    return (lambda x: ops.causal_pad(x, quantidade)), [rng.standard_normal(forma)]


def _caso_concat(rng) -> Caso:
    b, t, n = rng.integers(1, 3), rng.integers(1, 5), int(rng.integers(1, 4))
    partes = [rng.standard_normal((b, rng.integers(1, 4), t)) for _ in range(n)]
    return (lambda *xs: ops.concat_channels(list(xs))), partes


def _caso_media(rng) -> Caso:
    forma = (rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 6))
    return ops.mean_over_time, [rng.standard_normal(forma)]


def _caso_softmax(rng) -> Caso:
    b, c = rng.integers(1, 3), rng.integers(1, 6)
    escala = float(c)
    return (lambda z: ops.softmax_channels(z, escala)), [rng.standard_normal((b, c, 1))]


def _caso_escala(rng) -> Caso:
    b, c, t = rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 5)
    return ops.scale_channels, [rng.standard_normal((b, c, t)), rng.standard_normal((b, c, 1))]


def _caso_soma(rng) -> Caso:
    forma = (rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 5))
    return ops.soma, [rng.standard_normal(forma)]


def _caso_atencao(rng) -> Caso:
    from src.modelo.arquitetura import spatial_attention
    b, c, t = rng.integers(1, 3), rng.integers(1, 5), rng.integers(1, 5)
    return spatial_attention, [rng.standard_normal((b, c, t)), rng.standard_normal((c, c)),
                              rng.standard_normal(c)]


def _caso_pearson(rng) -> Caso:
    from src.treinamento.perda import pearson_loss
    b, s, t = rng.integers(1, 3), rng.integers(1, 4), rng.integers(3, 8)
    alvo = rng.standard_normal((b, s, t))
    return (lambda pred: pearson_loss(pred, alvo)), [rng.standard_normal((b, s, t))]


CASOS = {
    "pointwise_conv": _caso_pointwise,
    "linear_per_timestep": _caso_linear,
    "depthwise_temporal_conv": _caso_depthwise,
    "temporal_conv": _caso_temporal,
    "layer_norm": _caso_layer_norm,
    "leaky_relu": _caso_leaky,
    "causal_pad": _caso_pad,
    "concat_channels": _caso_concat,
    "mean_over_time": _caso_media,
    "softmax_channels": _caso_softmax,
    "scale_channels": _caso_escala,
    "sum": _caso_soma,
    "spatial_attention": _caso_atencao,
    "pearson_loss": _caso_pearson,
}


def executar_suite(formas_por_operacao: int = FORMAS_POR_OPERACAO, semente: int = 0,
                   h: float = H_PADRAO, tol: float = TOL_PADRAO) -> List[GradReport]:
    """
    Verifica todas as operações diferenciáveis em formas aleatórias.

    Args:
        formas_por_operacao: Quantidade de formas sorteadas por operação
        semente: Semente do sorteio
        h: Passo das diferenças finitas
        tol: Tolerância

    Returns:
        Um GradReport por operação (pior caso entre as formas)
    """
    rng = np.random.default_rng(semente)
    relatorios = []
    for nome, construtor in CASOS.items():
        pior = 0.0
        for _ in range(formas_por_operacao):
            op, entradas = construtor(rng)
            relatorio = grad_check(op, entradas, h=h, tol=tol, nome=nome,
                                   semente=int(rng.integers(2 ** 31)))
            pior = max(pior, relatorio.max_rel_error)
        relatorio = GradReport(op_name=nome, max_rel_error=pior, tolerance=tol)
        if not relatorio.passed:
            logger.error(f"Gradiente incorreto em {nome}: erro relativo {pior:.3e}")
        relatorios.append(relatorio)
    logger.info(f"Suíte de gradientes: {sum(r.passed for r in relatorios)}/{len(relatorios)} operações aprovadas")
    return relatorios
