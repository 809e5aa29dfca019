"""
Sistema de Configuração Simplificado

Este módulo gerencia as configurações de modelo, treino, otimizador e
dados sintéticos: valores padrão em código com sobreposição por arquivo YAML.
"""

import copy
import logging
from typing import Any, Dict, Optional

import yaml

from src.utils.erros import ErroConfiguracao

logger = logging.getLogger(__name__)


class ConfiguradorSimples:
    """Gerenciador de configurações simplificado"""

    SECOES = ("modelo", "treino", "otimizador", "sintetico")

    def __init__(self, arquivo: Optional[str] = None):
        """
        Inicializa o configurador com valores padrão

        Args:
            arquivo: Arquivo YAML opcional sobreposto aos padrões
        """
        self._config = self._carregar_config_padrao()
        if arquivo:
            self.carregar_arquivo(arquivo)

    def _carregar_config_padrao(self) -> Dict[str, Any]:
        """Carrega configurações padrão a partir dos dataclasses do projeto"""
        from dataclasses import asdict
        from src.modelo.arquitetura import ModelConfig
        from src.treinamento.otimizador import AdamHyper
        from src.treinamento.treinador import TrainSpec
        from src.dados.extratores.sintetico import SynthSpec

        hiper = asdict(AdamHyper())
        hiper.pop('step_count')
        return {
            'modelo': asdict(ModelConfig()),
            'treino': asdict(TrainSpec()),
            'otimizador': hiper,
            'sintetico': asdict(SynthSpec()),
        }

    def carregar_arquivo(self, caminho: str) -> None:
        """
        Sobrepõe um arquivo YAML às configurações atuais

        Args:
            caminho: Caminho do arquivo YAML
        """
        try:
            with open(caminho, 'r', encoding='utf-8') as f:
                conteudo = yaml.safe_load(f) or {}
        except OSError as e:
            raise ErroConfiguracao(f"Não foi possível ler a configuração {caminho}: {e}") from e
        except yaml.YAMLError as e:
            raise ErroConfiguracao(f"YAML inválido em {caminho}: {e}") from e

        if not isinstance(conteudo, dict):
            raise ErroConfiguracao(f"Configuração {caminho} deve ser um mapeamento")

        for secao, valores in conteudo.items():
            if secao not in self.SECOES:
                raise ErroConfiguracao(f"Seção desconhecida na configuração: {secao}")
            if not isinstance(valores, dict):
                raise ErroConfiguracao(f"Seção {secao} deve ser um mapeamento")
            for chave, valor in valores.items():
                if chave not in self._config[secao]:
                    raise ErroConfiguracao(f"Chave desconhecida: {secao}.{chave}")
                self._config[secao][chave] = valor

        logger.info(f"Configuração carregada de {caminho}")

    def get(self, chave: str, padrao: Any = None) -> Any:
        """
        Obtém um valor de configuração

        Args:
            chave: Chave da configuração (ex: 'treino.batch_size')
            padrao: Valor padrão se não encontrado

        Returns:
            Valor da configuração ou padrão
        """
        try:
            valor = self._config
            for parte in chave.split('.'):
                valor = valor[parte]
            return valor
        except (KeyError, TypeError):
            return padrao

    def set(self, chave: str, valor: Any) -> None:
        """
        Define um valor de configuração

        Args:
            chave: Chave da configuração
            valor: Valor a ser definido
        """
        config_atual = self._config
        partes = chave.split('.')
        for parte in partes[:-1]:
            config_atual = config_atual.setdefault(parte, {})
        config_atual[partes[-1]] = valor

    def secao(self, nome: str) -> Dict[str, Any]:
        """Cópia de uma seção inteira"""
        return copy.deepcopy(self._config[nome])

    def modelo(self):
        """ModelConfig validado"""
        from src.modelo.arquitetura import ModelConfig
        return ModelConfig.de_dict(self.secao('modelo'))

    def treino(self):
        """TrainSpec validado"""
        from src.treinamento.treinador import TrainSpec
        return TrainSpec.de_dict(self.secao('treino'))

    def otimizador(self):
        """AdamHyper validado"""
        from src.treinamento.otimizador import AdamHyper
        return AdamHyper.de_dict(self.secao('otimizador'))

    def sintetico(self):
        """SynthSpec validado"""
        from src.dados.extratores.sintetico import SynthSpec
        return SynthSpec.de_dict(self.secao('sintetico'))

    def instantaneo(self) -> Dict[str, Any]:
        """Cópia completa, usada nos manifestos de execução"""
        return copy.deepcopy(self._config)
