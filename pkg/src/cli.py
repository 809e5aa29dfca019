"""
Interface de linha de comando do decodificador ConvConcatNet.

Subcomandos: synth, folds, train, predict, ensemble, eval e gradcheck.
A saída estruturada (JSON) vai para stdout; os logs vão para stderr.

Códigos de saída: 0 ok, 1 falha de verificação, 2 uso, 3 E/S,
4 divisão vazia, 5 formato de checkpoint, 6 alinhamento.
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

from src.avaliacao.ensemble import EnsembleSpec, ensemble_por_fold, ensemble_sets
from src.avaliacao.metricas import evaluate_dataset
from src.avaliacao.predicoes import predict_recording, read_predictions, write_predictions
from src.dados.extratores.gravacoes import load_dataset
from src.dados.extratores.sintetico import synth_dataset
from src.dados.processadores.particoes import carregar_fold, make_folds, obter_fold, select_windows
from src.modelo.arquitetura import build_model
from src.tensores.verificacao import FORMAS_POR_OPERACAO, executar_suite
from src.treinamento.checkpoint import ler_cabecalho, load_checkpoint
from src.treinamento.treinador import train
from src.utils.arquivos import diretorio_atomico, escrever_json_atomico, sha256_arquivo, sha256_diretorio
from src.utils.config import ConfiguradorSimples
from src.utils.configuracao import configurar_logging, obter_num_threads
from src.utils.erros import ErroConvConcat, ErroDivisaoVazia, ErroUso

logger = logging.getLogger(__name__)

SUFIXO_MANIFESTO = ".run.json"


@dataclass
class RunManifest:
    """Registro de uma execução, gravado ao lado do artefato principal."""
    subcomando: str
    configuracao: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    fold_id: Optional[int] = None
    entradas: List[str] = field(default_factory=list)
    saidas: List[str] = field(default_factory=list)
    inicio: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    fim: Optional[str] = None
    hashes: Dict[str, str] = field(default_factory=dict)

    def finalizar(self, destino: str) -> str:
        """Calcula os hashes das saídas e grava o manifesto em `<destino>.run.json`."""
        for saida in self.saidas:
            self.hashes[saida] = sha256_diretorio(saida) if os.path.isdir(saida) else sha256_arquivo(saida)
        self.fim = datetime.now(timezone.utc).isoformat()
        caminho = destino.rstrip("/\\") + SUFIXO_MANIFESTO
        escrever_json_atomico(caminho, asdict(self))
        return caminho


def _emitir(dados: Dict[str, Any]) -> None:
    print(json.dumps(dados, ensure_ascii=False, sort_keys=True))


def _inteiro_positivo(texto: str) -> int:
    try:
        valor = int(texto)
    except ValueError:
        raise argparse.ArgumentTypeError(f"inteiro esperado: {texto!r}")
    if valor < 1:
        raise argparse.ArgumentTypeError(f"deve ser ≥ 1: {valor}")
    return valor


def _snr(texto: str) -> float:
    valor = float(texto)
    if math.isnan(valor):
        raise argparse.ArgumentTypeError("SNR não pode ser NaN")
    return valor


# ---------------------------------------------------------------------------
# Subcomandos
# ---------------------------------------------------------------------------

def cmd_synth(args: argparse.Namespace) -> int:
    configurador = ConfiguradorSimples(args.config)
    for campo, valor in (("n_subjects", args.subjects), ("recordings_per_subject", args.per_subject),
                         ("T", args.T), ("snr_db", args.snr_db), ("lag_taps", args.lag_taps),
                         ("seed", args.seed)):
        if valor is not None:
            configurador.set(f"sintetico.{campo}", valor)
    spec = configurador.sintetico()
    manifesto = RunManifest("synth", configuracao={"sintetico": asdict(spec)}, seed=spec.seed,
                            saidas=[args.out])
    with diretorio_atomico(args.out) as temporario:
        caminhos = synth_dataset(spec, temporario)
    manifesto.finalizar(args.out)
    _emitir({"recordings": len(caminhos), "out": args.out})
    return 0


def cmd_folds(args: argparse.Namespace) -> int:
    configurador = ConfiguradorSimples(args.config)
    spec = configurador.treino()
    dataset = load_dataset(args.data) if args.data else None
    saida = []
    for fold in make_folds():
        registro = fold.para_dict()
        if dataset is not None:
            for divisao in ("train", "val"):
                try:
                    n = len(select_windows(dataset, fold, divisao, spec.window_len, spec.window_hop))
                except ErroDivisaoVazia:
                    n = 0
                registro[f"janelas_{divisao}"] = n
        saida.append(registro)
    _emitir({"folds": saida})
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    configurador = ConfiguradorSimples(args.config)
    if args.seed is not None:
        configurador.set("treino.seed", args.seed)
    if args.sem_envelope:
        configurador.set("treino.usar_envelope", False)
        configurador.set("modelo.output_subbands", 10)
    config = configurador.modelo()
    spec = configurador.treino()
    hiper = configurador.otimizador()
    fold = carregar_fold(args.fold_file) if args.fold_file else obter_fold(args.fold)

    dataset = load_dataset(args.data)
    modelo = build_model(config, spec.seed, spec.dtype)
    checkpoint = train(modelo, dataset, fold, spec, hiper)
    checkpoint.salvar(args.out)

    manifesto = RunManifest("train", configuracao=configurador.instantaneo(), seed=spec.seed,
                            fold_id=fold.fold_id, entradas=[args.data] + ([args.config] if args.config else []),
                            saidas=[args.out])
    manifesto.finalizar(args.out)
    _emitir({
        "checkpoint": args.out,
        "fold_id": fold.fold_id,
        "seed": spec.seed,
        "epoch": checkpoint.metadados["epoch"],
        "validation_score": checkpoint.metadados["validation_score"],
    })
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    with open(args.ckpt, "rb") as f:
        bruto = f.read()
    modelo = load_checkpoint(bruto)
    metadados = ler_cabecalho(bruto).get("metadados", {})
    checkpoint_id = hashlib.sha256(bruto).hexdigest()[:16]
    fold_id = metadados.get("fold_id")

    gravacoes = load_dataset(args.data)
    with ThreadPoolExecutor(max_workers=obter_num_threads()) as executor:
        predicoes = list(executor.map(lambda g: predict_recording(modelo, g, checkpoint_id, fold_id), gravacoes))
    write_predictions(predicoes, args.out)

    manifesto = RunManifest("predict", seed=metadados.get("seed"), fold_id=fold_id,
                            entradas=[args.ckpt, args.data], saidas=[args.out])
    manifesto.finalizar(args.out)
    _emitir({"predictions": len(predicoes), "checkpoint_id": checkpoint_id, "out": args.out})
    return 0


def cmd_ensemble(args: argparse.Namespace) -> int:
    conjuntos = {diretorio: read_predictions(diretorio) for diretorio in args.preds}
    folds = {}
    for diretorio, conjunto in conjuntos.items():
        ids = {p.fold_id for p in conjunto}
        if len(ids) == 1 and None not in ids:
            folds[diretorio] = ids.pop()
    spec = EnsembleSpec(membros=list(args.preds), folds=folds)
    spec.validar()

    if args.por_fold:
        if len(folds) != len(spec.membros):
            raise ErroUso("--por-fold exige um fold_id único no manifesto de cada membro")
        grupos = {fold_id: [conjuntos[m] for m in membros] for fold_id, membros in spec.por_fold().items()}
        resultado = ensemble_por_fold(grupos)
        with diretorio_atomico(args.out) as temporario:
            for nome, predicoes in resultado.items():
                write_predictions(predicoes, os.path.join(temporario, nome))
        resumo = {nome: len(predicoes) for nome, predicoes in resultado.items()}
    else:
        predicoes = ensemble_sets([conjuntos[m] for m in spec.membros])
        write_predictions(predicoes, args.out)
        resumo = {"global": len(predicoes)}

    manifesto = RunManifest("ensemble", configuracao={"normalizacao": spec.normalizacao, "folds": folds},
                            entradas=list(args.preds), saidas=[args.out])
    manifesto.finalizar(args.out)
    _emitir({"members": len(spec.membros), "recordings": resumo, "out": args.out})
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    relatorio = evaluate_dataset(read_predictions(args.pred), load_dataset(args.data))
    if args.tabela:
        relatorio.por_gravacao.to_csv(args.tabela, index=False)
    _emitir(relatorio.para_dict())
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    relatorios = executar_suite(formas_por_operacao=args.formas, semente=args.semente)
    for relatorio in relatorios:
        print(relatorio.linha())
    falhas = [r.op_name for r in relatorios if not r.passed]
    _emitir({"ops": len(relatorios), "passed": len(relatorios) - len(falhas), "failed": falhas})
    return 1 if falhas else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def criar_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convconcat", description="Decodificador EEG → mel-espectrograma")
    parser.add_argument("--verbose", action="store_true", help="Logs em nível DEBUG")
    sub = parser.add_subparsers(dest="subcomando", required=True)

    p = sub.add_parser("synth", help="Gera um conjunto sintético (opções sobrepõem a seção sintetico do --config)")
    p.add_argument("--config", default=None)
    p.add_argument("--subjects", type=_inteiro_positivo, default=None)
    p.add_argument("--per-subject", dest="per_subject", type=_inteiro_positivo, default=None)
    p.add_argument("--T", type=_inteiro_positivo, default=None)
    p.add_argument("--snr-db", dest="snr_db", type=_snr, default=None)
    p.add_argument("--lag-taps", dest="lag_taps", type=_inteiro_positivo, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(funcao=cmd_synth)

    p = sub.add_parser("folds", help="Lista os folds da validação cruzada")
    p.add_argument("--data", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(funcao=cmd_folds)

    p = sub.add_parser("train", help="Treina um modelo em um fold")
    grupo = p.add_mutually_exclusive_group(required=True)
    grupo.add_argument("--fold", type=int, choices=[1, 2, 3, 4])
    grupo.add_argument("--fold-file", dest="fold_file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--sem-envelope", dest="sem_envelope", action="store_true",
                   help="Treina só com as 10 subbandas do mel")
    p.set_defaults(funcao=cmd_train)

    p = sub.add_parser("predict", help="Gera predições 11×T por gravação")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(funcao=cmd_predict)

    p = sub.add_parser("ensemble", help="Normaliza e faz a média de conjuntos de predições")
    p.add_argument("--preds", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--por-fold", dest="por_fold", action="store_true",
                   help="Grava também um ensemble por fold em out/fold_<k>/")
    p.set_defaults(funcao=cmd_ensemble)

    p = sub.add_parser("eval", help="Correlação por subbanda entre predições e mel alvo")
    p.add_argument("--pred", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--tabela", default=None, help="CSV com o detalhamento por gravação")
    p.set_defaults(funcao=cmd_eval)

    p = sub.add_parser("gradcheck", help="Verifica gradientes por diferenças finitas")
    p.add_argument("--formas", type=_inteiro_positivo, default=FORMAS_POR_OPERACAO)
    p.add_argument("--semente", type=int, default=0)
    p.set_defaults(funcao=cmd_gradcheck)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = criar_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configurar_logging("DEBUG" if args.verbose else None)
    try:
        return args.funcao(args)
    except ErroConvConcat as e:
        logger.error(f"{args.subcomando}: {e}")
        return e.codigo_saida
    except OSError as e:
        logger.error(f"{args.subcomando}: erro de E/S: {e}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
