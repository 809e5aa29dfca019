"""
Módulo de configuração centralizada do decodificador EEG → mel.

Este módulo centraliza:
- Caminhos de diretórios do projeto
- Variáveis de ambiente (arquivo .env)
- Configuração de logging
- Limite de paralelismo (CCN_THREADS)
"""

import os
import logging
import logging.config
from typing import Dict, Any, Optional
from dotenv import load_dotenv

# Carregar variáveis de ambiente do arquivo .env
load_dotenv()

# Configuração de diretórios
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
CONFIG_DIR = os.path.join(BASE_DIR, "config")
ARQUIVO_CONFIG_PADRAO = os.path.join(CONFIG_DIR, "convconcat_config.yaml")


def obter_num_threads() -> int:
    """
    Lê o limite de threads de trabalho da variável CCN_THREADS.

    Returns:
        Número de threads (mínimo 1)
    """
    valor = os.environ.get("CCN_THREADS", "1")
    try:
        return max(1, int(valor))
    except ValueError:
        logging.getLogger(__name__).warning(f"CCN_THREADS inválido ({valor!r}); usando 1")
        return 1


def montar_configuracao_logging(nivel: str = "INFO",
                                diretorio_logs: Optional[str] = None) -> Dict[str, Any]:
    """
    Monta o dicionário de logging no formato de dictConfig.

    Args:
        nivel: Nível mínimo das mensagens
        diretorio_logs: Se informado, adiciona um handler de arquivo rotativo

    Returns:
        Dicionário pronto para logging.config.dictConfig
    """
    handlers = ["console"]
    configuracao = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "padrao": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            },
        },
        "handlers": {
            # stdout fica reservado para a saída estruturada da CLI
            "console": {
                "class": "logging.StreamHandler",
                "level": nivel,
                "formatter": "padrao",
                "stream": "ext://sys.stderr"
            },
        },
        "loggers": {
            "": {
                "handlers": handlers,
                "level": nivel,
                "propagate": True
            }
        }
    }

    if diretorio_logs:
        os.makedirs(diretorio_logs, exist_ok=True)
        configuracao["handlers"]["arquivo"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": nivel,
            "formatter": "padrao",
            "filename": os.path.join(diretorio_logs, "convconcat.log"),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
            "encoding": "utf8"
        }
        handlers.append("arquivo")

    return configuracao


def configurar_logging(nivel: Optional[str] = None,
                       diretorio_logs: Optional[str] = None) -> None:
    """
    Configura o sistema de logging.

    Args:
        nivel: Nível de log (padrão: CCN_LOG_LEVEL ou INFO)
        diretorio_logs: Diretório do log em arquivo (padrão: CCN_LOG_DIR)
    """
    nivel = (nivel or os.environ.get("CCN_LOG_LEVEL", "INFO")).upper()
    diretorio_logs = diretorio_logs or os.environ.get("CCN_LOG_DIR")
    logging.config.dictConfig(montar_configuracao_logging(nivel, diretorio_logs))
    logging.getLogger(__name__).debug("Sistema de logging inicializado.")
