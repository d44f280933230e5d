"""Linha de comando do experimento: gen, train, test, render e report.

Uso: python -m src.cli <comando> [opções]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.arvore import MODOS_PONTUACAO, carregar_arvore
from src.configuracao import aplicar_overrides, carregar_config
from src.erros import (
    ErroConfiguracao,
    ErroDominio,
    ErroFormato,
    ErroGeracao,
    ErroProtocolo,
)
from src.experimento import caminho_tabela, cmd_report, cmd_test, cmd_train
from src.gerador import gerar_corpus
from src.oraculo import oracle_tree
from src.topologia import carregar_grafo
from src.visualizador import salvar_svg

logger = logging.getLogger(__name__)

SAIDA_OK = 0
SAIDA_USO = 1
SAIDA_GERACAO = 2
SAIDA_FORMATO = 3


class ErroUso(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser que sai com 1 (e não 2) em erro de uso."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(SAIDA_USO)


def configurar_log(verbose: int) -> None:
    nivel = logging.WARNING
    if verbose == 1:
        nivel = logging.INFO
    elif verbose > 1:
        nivel = logging.DEBUG
    logging.basicConfig(
        level=nivel, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def lista_de_inteiros(texto: str) -> List[int]:
    try:
        valores = [int(p) for p in texto.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"esperado lista como 100,200,300: {texto!r}")
    if not valores:
        raise argparse.ArgumentTypeError("lista vazia")
    return valores


def _comuns(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="arquivo key=value com a configuração")
    p.add_argument("--out", help="pasta de saída")
    p.add_argument("--workers", type=int, help="processos para gen/test")
    p.add_argument("-v", "--verbose", action="count", default=0)


def criar_parser() -> Parser:
    parser = Parser(prog="python -m src.cli", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="comando", required=True, parser_class=Parser)

    gen = sub.add_parser("gen", help="gera o corpus de grafos de treino e teste")
    _comuns(gen)
    gen.add_argument("--seed", type=int, help="semente do corpus")
    gen.add_argument("--nodes", type=lista_de_inteiros, help="tamanhos N, ex.: 100,200,300")
    gen.add_argument("--graphs", type=int, help="M grafos de treino por N")
    gen.add_argument("--test-graphs", dest="test_graphs", type=int, help="T grafos de teste por N")
    gen.add_argument("--width", type=int, help="lado W da grade")
    gen.add_argument("--range", dest="comm_range", type=float, help="alcance R")

    train = sub.add_parser("train", help="treina uma tabela Q por tamanho N")
    _comuns(train)
    train.add_argument("--seed", dest="train_seed", type=int, help="semente do treino")
    train.add_argument("--nodes", type=lista_de_inteiros)
    train.add_argument("--graphs", type=int)
    train.add_argument("--episodes", type=int, help="K episódios por grafo")
    train.add_argument("--alpha", type=float)
    train.add_argument("--gamma", type=float)
    train.add_argument("--epsilon", type=float)
    train.add_argument(
        "--distributed",
        action="store_true",
        help="treina também com um agente por nó e compara as tabelas",
    )
    train.add_argument(
        "--stale-cache",
        dest="stale_cache",
        type=int,
        metavar="ATRASO",
        help="com --distributed, empurra resumos com esse atraso em passos",
    )

    test = sub.add_parser("test", help="constrói as árvores e mede a acurácia")
    _comuns(test)
    test.add_argument("--table", type=Path, help="tabela Q; padrão: a de mesmo N")
    test.add_argument("--nodes", type=lista_de_inteiros, help="tamanhos N de teste")
    test.add_argument("--test-graphs", dest="test_graphs", type=int)
    test.add_argument("--mode", choices=MODOS_PONTUACAO, default="q_distancia")
    test.add_argument("--trees", type=Path, help="pasta para gravar as árvores")

    render = sub.add_parser("render", help="desenha um grafo e uma árvore em SVG")
    render.add_argument("graph", type=Path, help="arquivo do grafo")
    render.add_argument("--tree", type=Path, help="arquivo da árvore")
    render.add_argument("--oracle", action="store_true", help="desenha também a árvore da BFS")
    render.add_argument("--svg", type=Path, help="arquivo de saída; padrão: ao lado do grafo")
    render.add_argument("-v", "--verbose", action="count", default=0)

    report = sub.add_parser("report", help="junta os CSVs de acurácia numa tabela")
    _comuns(report)
    return parser


def _executar(args) -> None:
    if args.comando == "render":
        _render(args)
        return

    cfg = aplicar_overrides(carregar_config(args.config), args)

    if args.comando == "gen":
        manifesto = gerar_corpus(cfg)
        print(f"✅ corpus gerado; manifesto em {manifesto}")

    elif args.comando == "train":
        if args.stale_cache is not None and not args.distributed:
            raise ErroUso("--stale-cache exige --distributed")
        for n in cfg.nodes:
            destino = cmd_train(cfg, n, distribuido=args.distributed, atraso=args.stale_cache)
            print(f"✅ tabela N={n} em {destino}")

    elif args.comando == "test":
        for n in cfg.nodes:
            tabela = args.table if args.table is not None else caminho_tabela(cfg, n)
            if not tabela.exists():
                raise ErroUso(f"tabela {tabela} não encontrada; rode `train` antes")
            arvores = args.trees / f"n{n}" if args.trees is not None else None
            destino = cmd_test(cfg, tabela, n, modo=args.mode, pasta_arvores=arvores)
            print(f"✅ acurácia de {tabela.name} em N={n}: {destino}")

    elif args.comando == "report":
        resumo = cmd_report(cfg)
        print(resumo.to_string(float_format=lambda x: f"{x:.4f}"))


def _render(args) -> None:
    g = carregar_grafo(args.graph)
    destino = args.svg if args.svg is not None else args.graph.with_suffix(".svg")
    arvore = carregar_arvore(args.tree, g) if args.tree is not None else None
    salvar_svg(g, arvore, destino, titulo=args.graph.name)
    print(f"✅ figura em {destino}")
    if args.oracle:
        oraculo = destino.with_name(f"{destino.stem}_oraculo.svg")
        salvar_svg(g, oracle_tree(g), oraculo, titulo=f"{args.graph.name} (BFS)")
        print(f"✅ figura da BFS em {oraculo}")


def main(argv: Optional[List[str]] = None) -> int:
    args = criar_parser().parse_args(argv)
    configurar_log(args.verbose)
    try:
        _executar(args)
    except ErroGeracao as erro:
        print(f"❌ geração falhou após {erro.tentativas} tentativa(s): {erro}", file=sys.stderr)
        return SAIDA_GERACAO
    except ErroFormato as erro:
        print(f"❌ arquivo inválido ({erro.campo}): {erro}", file=sys.stderr)
        return SAIDA_FORMATO
    except (ErroUso, ErroConfiguracao, ErroDominio, ErroProtocolo) as erro:
        print(f"❌ {erro}", file=sys.stderr)
        return SAIDA_USO
    return SAIDA_OK


if __name__ == "__main__":
    sys.exit(main())
