"""
Módulo da arquitetura ConvConcatNet.

Cada bloco tem quatro partes: pilha CNN (Sconv/Tconv com concatenação da
entrada do bloco), camada linear por passo de tempo, camada de contexto de
saída e atenção espacial. O EEG, o contexto e a atenção de um bloco são
concatenados nos canais e formam a entrada do bloco seguinte.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.tensores import operacoes as ops
from src.tensores.tensor import Parametro, Tensor
from src.utils.erros import ErroConfiguracao, ErroForma, ErroUso

logger = logging.getLogger(__name__)

CAMADAS_PILHA = 5


@dataclass
class ModelConfig:
    """Hiperparâmetros arquiteturais."""
    num_blocks: int = 6
    eeg_channels: int = 64
    stack_filters: List[int] = field(default_factory=lambda: [256, 256, 256, 128, 128])
    stack_kernel: int = 8
    hidden_width: int = 64
    context_kernel: int = 32
    output_subbands: int = 11
    leaky_slope: float = 0.01
    attention_enabled: bool = True
    head_input: str = "concat"  # concat | ctx

    @classmethod
    def de_dict(cls, valores: Dict[str, Any]) -> "ModelConfig":
        conhecidos = {f.name for f in fields(cls)}
        desconhecidos = set(valores) - conhecidos
        if desconhecidos:
            raise ErroConfiguracao(f"Campos desconhecidos em ModelConfig: {sorted(desconhecidos)}")
        config = cls(**valores)
        config.stack_filters = [int(f) for f in config.stack_filters]
        config.validar()
        return config

    def para_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validar(self) -> None:
        """Levanta ErroConfiguracao se algum campo for inválido."""
        if self.num_blocks < 1:
            raise ErroConfiguracao(f"num_blocks deve ser ≥ 1: {self.num_blocks}")
        if len(self.stack_filters) != CAMADAS_PILHA or min(self.stack_filters) < 1:
            raise ErroConfiguracao(f"stack_filters deve ter {CAMADAS_PILHA} entradas ≥ 1: {self.stack_filters}")
        for nome in ("eeg_channels", "stack_kernel", "hidden_width", "context_kernel", "output_subbands"):
            if getattr(self, nome) < 1:
                raise ErroConfiguracao(f"{nome} deve ser ≥ 1: {getattr(self, nome)}")
        if not 0 < self.leaky_slope < 1:
            raise ErroConfiguracao(f"leaky_slope deve estar em (0, 1): {self.leaky_slope}")
        if self.head_input not in ("concat", "ctx"):
            raise ErroConfiguracao(f"head_input deve ser 'concat' ou 'ctx': {self.head_input}")


def canais_entrada_bloco(config: ModelConfig, indice: int) -> int:
    """Canais de entrada do bloco `indice` (0 = primeiro bloco)."""
    if indice == 0:
        return config.eeg_channels
    return config.eeg_channels + 2 * config.hidden_width


def larguras_tconv(config: ModelConfig, c0: int) -> List[int]:
    """Largura de cada Tconv da pilha: F_i + C0."""
    return [f + c0 for f in config.stack_filters[:4]]


def canais_cabeca(config: ModelConfig) -> int:
    if config.head_input == "ctx":
        return config.hidden_width
    return config.eeg_channels + 2 * config.hidden_width


@dataclass
class BlockParams:
    """Pesos de um bloco."""
    indice: int
    canais_entrada: int
    sconv_peso: List[Parametro]
    sconv_vies: List[Parametro]
    sconv_gama: List[Parametro]
    sconv_beta: List[Parametro]
    tconv_peso: List[Parametro]
    tconv_vies: List[Parametro]
    tconv_gama: List[Parametro]
    tconv_beta: List[Parametro]
    conv5_peso: Parametro
    conv5_vies: Parametro
    conv5_gama: Parametro
    conv5_beta: Parametro
    linear_peso: Parametro
    linear_vies: Parametro
    contexto_peso: Parametro
    contexto_vies: Parametro
    contexto_gama: Parametro
    contexto_beta: Parametro
    atencao_peso: Parametro
    atencao_vies: Parametro

    def parametros(self) -> List[Parametro]:
        """Parâmetros em ordem canônica."""
        lista: List[Parametro] = []
        for i in range(4):
            lista += [self.sconv_peso[i], self.sconv_vies[i], self.sconv_gama[i], self.sconv_beta[i],
                      self.tconv_peso[i], self.tconv_vies[i], self.tconv_gama[i], self.tconv_beta[i]]
        lista += [self.conv5_peso, self.conv5_vies, self.conv5_gama, self.conv5_beta,
                  self.linear_peso, self.linear_vies,
                  self.contexto_peso, self.contexto_vies, self.contexto_gama, self.contexto_beta,
                  self.atencao_peso, self.atencao_vies]
        return lista


class Model:
    """ConvConcatNet completo: blocos encadeados e cabeça de saída."""

    def __init__(self, config: ModelConfig, blocos: List[BlockParams],
                 cabeca_peso: Parametro, cabeca_vies: Parametro):
        self.config = config
        self.blocos = blocos
        self.cabeca_peso = cabeca_peso
        self.cabeca_vies = cabeca_vies

    def parametros(self) -> List[Parametro]:
        lista: List[Parametro] = []
        for bloco in self.blocos:
            lista += bloco.parametros()
        return lista + [self.cabeca_peso, self.cabeca_vies]

    @property
    def dtype(self) -> np.dtype:
        return self.cabeca_peso.dtype

    def converter(self, dtype) -> "Model":
        """Converte todos os parâmetros para a precisão indicada."""
        for p in self.parametros():
            p.converter(np.dtype(dtype))
        return self

    def estado(self) -> Dict[str, np.ndarray]:
        """Cópia ordenada dos valores (nome → array)."""
        return {p.nome: p.dados.copy() for p in self.parametros()}

    def carregar_estado(self, estado: Dict[str, np.ndarray]) -> None:
        for p in self.parametros():
            p.dados = np.array(estado[p.nome], dtype=p.dtype, copy=True)

    def __call__(self, eeg) -> Tensor:
        return model_forward(eeg, self)


# ---------------------------------------------------------------------------
# Construção
# ---------------------------------------------------------------------------

class _Inicializador:
    """Sorteia pesos uniformes em ±1/sqrt(fan_in) na ordem de criação."""

    def __init__(self, semente: int, dtype):
        self.rng = np.random.default_rng(semente)
        self.dtype = dtype

    def uniforme(self, nome: str, forma: Tuple[int, ...], fan_in: int) -> Parametro:
        limite = 1.0 / np.sqrt(fan_in)
        return Parametro(self.rng.uniform(-limite, limite, size=forma).astype(self.dtype), nome)

    def constante(self, nome: str, forma: Tuple[int, ...], valor: float) -> Parametro:
        return Parametro(np.full(forma, valor, dtype=self.dtype), nome)


def _construir_bloco(config: ModelConfig, indice: int, ini: _Inicializador) -> BlockParams:
    c0 = canais_entrada_bloco(config, indice)
    filtros = config.stack_filters
    k = config.stack_kernel
    h = config.hidden_width
    prefixo = f"bloco{indice + 1}"

    listas: Dict[str, List[Parametro]] = {chave: [] for chave in (
        "sconv_peso", "sconv_vies", "sconv_gama", "sconv_beta",
        "tconv_peso", "tconv_vies", "tconv_gama", "tconv_beta")}
    canais = c0
    for i, largura in enumerate(larguras_tconv(config, c0)):
        camada = f"{prefixo}.pilha{i + 1}"
        listas["sconv_peso"].append(ini.uniforme(f"{camada}.sconv.peso", (filtros[i], canais), canais))
        listas["sconv_vies"].append(ini.uniforme(f"{camada}.sconv.vies", (filtros[i],), canais))
        listas["sconv_gama"].append(ini.constante(f"{camada}.sconv.ln.gama", (filtros[i],), 1.0))
        listas["sconv_beta"].append(ini.constante(f"{camada}.sconv.ln.beta", (filtros[i],), 0.0))
        listas["tconv_peso"].append(ini.uniforme(f"{camada}.tconv.peso", (largura, k), k))
        listas["tconv_vies"].append(ini.uniforme(f"{camada}.tconv.vies", (largura,), k))
        listas["tconv_gama"].append(ini.constante(f"{camada}.tconv.ln.gama", (largura,), 1.0))
        listas["tconv_beta"].append(ini.constante(f"{camada}.tconv.ln.beta", (largura,), 0.0))
        canais = largura

    camada = f"{prefixo}.pilha5"
    fan_conv5 = canais * k
    return BlockParams(
        indice=indice,
        canais_entrada=c0,
        **listas,
        conv5_peso=ini.uniforme(f"{camada}.conv.peso", (filtros[4], canais, k), fan_conv5),
        conv5_vies=ini.uniforme(f"{camada}.conv.vies", (filtros[4],), fan_conv5),
        conv5_gama=ini.constante(f"{camada}.conv.ln.gama", (filtros[4],), 1.0),
        conv5_beta=ini.constante(f"{camada}.conv.ln.beta", (filtros[4],), 0.0),
        linear_peso=ini.uniforme(f"{prefixo}.linear.peso", (h, filtros[4]), filtros[4]),
        linear_vies=ini.uniforme(f"{prefixo}.linear.vies", (h,), filtros[4]),
        contexto_peso=ini.uniforme(f"{prefixo}.contexto.conv.peso", (h, h, config.context_kernel),
                                   h * config.context_kernel),
        contexto_vies=ini.uniforme(f"{prefixo}.contexto.conv.vies", (h,), h * config.context_kernel),
        contexto_gama=ini.constante(f"{prefixo}.contexto.ln.gama", (h,), 1.0),
        contexto_beta=ini.constante(f"{prefixo}.contexto.ln.beta", (h,), 0.0),
        atencao_peso=ini.uniforme(f"{prefixo}.atencao.peso", (h, h), h),
        atencao_vies=ini.uniforme(f"{prefixo}.atencao.vies", (h,), h),
    )


def _auditar_formas(modelo: Model) -> None:
    """Confere a contabilidade de canais e a unicidade dos nomes."""
    config = modelo.config
    for bloco in modelo.blocos:
        esperado = larguras_tconv(config, canais_entrada_bloco(config, bloco.indice))
        obtido = [p.forma[0] for p in bloco.tconv_peso]
        if obtido != esperado:
            raise ErroConfiguracao(f"bloco {bloco.indice + 1}: larguras Tconv {obtido} ≠ {esperado}")
        if bloco.conv5_peso.forma[1] != esperado[-1]:
            raise ErroConfiguracao(f"bloco {bloco.indice + 1}: entrada da conv5 {bloco.conv5_peso.forma[1]}")
    nomes = [p.nome for p in modelo.parametros()]
    if len(nomes) != len(set(nomes)):
        raise ErroConfiguracao("nomes de parâmetros repetidos")


def build_model(config: ModelConfig, seed: int, dtype=np.float32) -> Model:
    """
    Constrói o modelo com pesos determinísticos a partir da semente.

    Args:
        config: Hiperparâmetros arquiteturais
        seed: Semente da inicialização
        dtype: Precisão dos parâmetros

    Returns:
        Modelo inicializado
    """
    config.validar()
    ini = _Inicializador(seed, np.dtype(dtype))
    blocos = [_construir_bloco(config, i, ini) for i in range(config.num_blocks)]
    entrada = canais_cabeca(config)
    modelo = Model(
        config,
        blocos,
        ini.uniforme("cabeca.peso", (config.output_subbands, entrada), entrada),
        ini.uniforme("cabeca.vies", (config.output_subbands,), entrada),
    )
    _auditar_formas(modelo)
    logger.info(f"Modelo construído: {config.num_blocks} blocos, "
                f"{param_count(config)} parâmetros, semente {seed}")
    return modelo


def param_count(config: ModelConfig) -> int:
    """Total de escalares aprendíveis, pela fórmula fechada da contabilidade de canais."""
    config.validar()
    filtros = config.stack_filters
    k = config.stack_kernel
    h = config.hidden_width
    total = 0
    for indice in range(config.num_blocks):
        c0 = canais_entrada_bloco(config, indice)
        canais = c0
        for i, largura in enumerate(larguras_tconv(config, c0)):
            total += filtros[i] * canais + filtros[i] + 2 * filtros[i]
            total += largura * k + largura + 2 * largura
            canais = largura
        total += filtros[4] * canais * k + filtros[4] + 2 * filtros[4]
        total += h * filtros[4] + h
        total += h * h * config.context_kernel + h + 2 * h
        total += h * h + h
    entrada = canais_cabeca(config)
    return total + config.output_subbands * entrada + config.output_subbands


# ---------------------------------------------------------------------------
# Forward
# ---------------------------------------------------------------------------

def _llp(x: Tensor, gama: Parametro, beta: Parametro, inclinacao: float, pad: int) -> Tensor:
    """Layer norm → LeakyReLU → zero-padding causal para a convolução seguinte."""
    y = ops.leaky_relu(ops.layer_norm(x, gama, beta), inclinacao)
    return ops.causal_pad(y, pad) if pad else y


def cnn_stack_forward(x: Tensor, params: BlockParams, config: ModelConfig) -> Tensor:
    """
    Pilha CNN de 5 camadas.

    Nas camadas 1–4, a saída de Sconv é concatenada com a entrada do bloco
    antes da Tconv; a camada 5 é uma convolução temporal completa.

    Args:
        x: Entrada do bloco (B, C0, T)
        params: Pesos do bloco
        config: Hiperparâmetros

    Returns:
        Tensor (B, F_5, T)
    """
    if x.forma[1] != params.canais_entrada:
        raise ErroForma(f"pilha espera {params.canais_entrada} canais; recebido {x.forma[1]}")
    k = config.stack_kernel
    inclinacao = config.leaky_slope
    entrada_bloco = x
    atual = x
    for i in range(4):
        s = ops.pointwise_conv(atual, params.sconv_peso[i], params.sconv_vies[i])
        s = _llp(s, params.sconv_gama[i], params.sconv_beta[i], inclinacao, pad=0)
        u = ops.causal_pad(ops.concat_channels([s, entrada_bloco]), k - 1)
        t = ops.depthwise_temporal_conv(u, params.tconv_peso[i], params.tconv_vies[i])
        # a última Tconv prepara o padding da conv5; as demais alimentam uma Sconv (K=1)
        atual = _llp(t, params.tconv_gama[i], params.tconv_beta[i], inclinacao,
                     pad=k - 1 if i == 3 else 0)
    y = ops.temporal_conv(atual, params.conv5_peso, params.conv5_vies)
    return _llp(y, params.conv5_gama, params.conv5_beta, inclinacao, pad=0)


def spatial_attention(x, peso, vies) -> Tensor:
    """
    Atenção espacial: softmax sobre os canais de W_a·média_temporal(x)+b_a.

    A saída é H·score·x, de modo que pontuações uniformes dão a identidade.

    Args:
        x: Tensor (B, H, T)
        peso: Matriz (H, H)
        vies: Vetor (H,)

    Returns:
        Tensor (B, H, T)
    """
    x = ops.como_tensor(x)
    canais = x.forma[1]
    z = ops.pointwise_conv(ops.mean_over_time(x), peso, vies)
    pesos = ops.softmax_channels(z, escala=float(canais))
    return ops.scale_channels(x, pesos)


def attention_scores(x, peso, vies) -> np.ndarray:
    """Pontuações softmax (B, H), somando 1 por item do lote."""
    x = ops.como_tensor(x)
    z = ops.pointwise_conv(ops.mean_over_time(x), peso, vies)
    return ops.softmax_channels(z, escala=1.0).dados[:, :, 0]


def block_forward(eeg: Tensor, prev_ctx: Optional[Tensor], prev_att: Optional[Tensor],
                  params: BlockParams, config: ModelConfig) -> Tuple[Tensor, Tensor]:
    """
    Executa um bloco.

    Args:
        eeg: EEG (B, C_eeg, T)
        prev_ctx: Contexto do bloco anterior (None no primeiro bloco)
        prev_att: Atenção do bloco anterior (None no primeiro bloco)
        params: Pesos do bloco
        config: Hiperparâmetros

    Returns:
        (ctx, att), ambos (B, H, T)
    """
    if (prev_ctx is None) != (prev_att is None):
        raise ErroUso("prev_ctx e prev_att devem ser ambos informados ou ambos None")
    if prev_ctx is None:
        entrada = eeg
    else:
        for nome, t in (("prev_ctx", prev_ctx), ("prev_att", prev_att)):
            if t.forma[2] != eeg.forma[2] or t.forma[0] != eeg.forma[0]:
                raise ErroForma(f"{nome} {t.forma} desalinhado do EEG {eeg.forma}")
        entrada = ops.concat_channels([eeg, prev_ctx, prev_att])

    y = cnn_stack_forward(entrada, params, config)
    h = ops.linear_per_timestep(y, params.linear_peso, params.linear_vies)

    c = ops.causal_pad(h, config.context_kernel - 1)
    c = ops.temporal_conv(c, params.contexto_peso, params.contexto_vies)
    c = ops.leaky_relu(c, config.leaky_slope)
    ctx = ops.layer_norm(c, params.contexto_gama, params.contexto_beta)

    if config.attention_enabled:
        att = spatial_attention(ctx, params.atencao_peso, params.atencao_vies)
    else:
        att = ctx
    return ctx, att


def model_forward(eeg, modelo: Model) -> Tensor:
    """
    Forward completo: blocos encadeados e cabeça pontual.

    Args:
        eeg: EEG (B, C_eeg, T), array ou Tensor
        modelo: Modelo construído

    Returns:
        Predição (B, output_subbands, T); subbanda 0 é o envelope
    """
    config = modelo.config
    if not isinstance(eeg, Tensor):
        eeg = Tensor(np.asarray(eeg, dtype=modelo.dtype))
    elif eeg.dtype != modelo.dtype:
        eeg = Tensor(eeg.dados.astype(modelo.dtype), requer_grad=eeg.requer_grad)
    if eeg.dados.ndim != 3 or eeg.forma[1] != config.eeg_channels:
        raise ErroForma(f"EEG deve ter forma (B, {config.eeg_channels}, T); recebido {eeg.forma}")

    ctx = att = None
    for bloco in modelo.blocos:
        ctx, att = block_forward(eeg, ctx, att, bloco, config)

    entrada_cabeca = ctx if config.head_input == "ctx" else ops.concat_channels([eeg, ctx, att])
    return ops.pointwise_conv(entrada_cabeca, modelo.cabeca_peso, modelo.cabeca_vies)
