"""Módulo com as etapas de um experimento sobre o corpus em disco: treino,
teste (mesmo tamanho e tamanhos cruzados) e o resumo das acurácias."""

import logging
import re
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.arvore import build_tree, serialize_tree
from src.configuracao import ExperimentConfig
from src.distribuido import ResultadoDistribuido, run_distributed
from src.erros import ErroConfiguracao
from src.gerador import listar_grafos, pasta_corpus
from src.modelos import GraphInstance
from src.oraculo import (
    LinhaAcuracia,
    avaliar_arvore,
    excesso_para_frame,
    montar_relatorio,
    write_report,
)
from src.qlearning import QTable, carregar_qtable, salvar_qtable, train
from src.topologia import carregar_grafo, conferir_compatibilidade, formatar_alcance

logger = logging.getLogger(__name__)

PADRAO_RESULTADO = re.compile(r"acuracia_(?P<tabela>.+)_n(?P<teste>\d+)\.csv")
PADRAO_TABELA = re.compile(r"n(?P<treino>\d+)$")


def pasta_tabelas(cfg: ExperimentConfig) -> Path:
    return cfg.pasta_saida / "qtables"


def pasta_resultados(cfg: ExperimentConfig) -> Path:
    return cfg.pasta_saida / "resultados"


def caminho_tabela(cfg: ExperimentConfig, n_nodes: int) -> Path:
    return pasta_tabelas(cfg) / f"q_n{n_nodes}.txt"


def _carregar_corpus(
    cfg: ExperimentConfig, n_nodes: int, conjunto: str, quantidade: int
) -> Tuple[List[str], List[GraphInstance]]:
    arquivos = listar_grafos(pasta_corpus(cfg), n_nodes, conjunto)[:quantidade]
    if not arquivos:
        raise ErroConfiguracao(
            f"nenhum grafo de {conjunto} com N={n_nodes} em {pasta_corpus(cfg)}; rode `gen` antes"
        )
    if len(arquivos) < quantidade:
        logger.warning(
            "corpus %s N=%d tem %d grafo(s), menos que os %d pedidos",
            conjunto,
            n_nodes,
            len(arquivos),
            quantidade,
        )
    grafos = [carregar_grafo(c) for c in arquivos]
    params, sink = conferir_compatibilidade(grafos)
    if params != cfg.grid or sink != cfg.sink:
        raise ErroConfiguracao(
            f"o corpus usa W={params.width}, R={formatar_alcance(params.comm_range)}, "
            f"sink={sink}; a configuração pede W={cfg.width}, "
            f"R={formatar_alcance(cfg.comm_range)}, sink={cfg.sink}"
        )
    return [c.stem for c in arquivos], grafos


# --- treino ----------------------------------------------------------------


def _treinar_distribuido(
    cfg: ExperimentConfig, grafos: List[GraphInstance], atraso: Optional[int]
) -> ResultadoDistribuido:
    """Roda os agentes grafo a grafo, com um só gerador, e soma as mensagens."""
    rng = np.random.default_rng(cfg.train_seed)
    tabela = None
    mensagens = atualizacoes = resumos = 0
    for g in grafos:
        resultado = run_distributed(
            g,
            cfg.hiperparametros,
            rng,
            modo="puxar" if atraso is None else "cache",
            atraso=atraso or 0,
            q_inicial=tabela,
        )
        tabela = resultado.qtable
        mensagens += resultado.mensagens
        atualizacoes += resultado.atualizacoes
        resumos += resultado.resumos_servidos
    return ResultadoDistribuido(tabela, mensagens, atualizacoes, resumos)


def cmd_train(
    cfg: ExperimentConfig,
    n_nodes: int,
    distribuido: bool = False,
    atraso: Optional[int] = None,
) -> Path:
    """
    Treina uma tabela Q sobre os M grafos de treino de tamanho n_nodes.

    Escreve em <out>/qtables/ a tabela (q_nN.txt), a telemetria do treino
    (treino_nN.csv) e um log com a configuração, o tempo de parede e, com
    distribuido=True, a comparação com o treino centralizado.

    Parameters:
    -----------
    cfg : ExperimentConfig
        Configuração efetiva.
    n_nodes : int
        Tamanho das redes de treino.
    distribuido : bool
        Treina também com um agente por nó; a tabela gravada é a distribuída.
    atraso : Optional[int]
        Com distribuido=True, usa o modo de cache com esse atraso em vez de
        pedir o resumo a cada atualização.

    Returns:
    --------
    Path
        O arquivo da tabela Q.
    """
    # 1. Carrega o corpus de treino
    _, grafos = _carregar_corpus(cfg, n_nodes, "treino", cfg.graphs)
    h = cfg.hiperparametros
    logger.info(
        "treinando N=%d: %d grafo(s) x %d episódio(s)", n_nodes, len(grafos), h.episodes_per_graph
    )

    # 2. Treino centralizado, com telemetria
    registro: List[dict] = []
    inicio = time.perf_counter()
    tabela = train(grafos, h, cfg.train_seed, registro=registro)
    segundos = time.perf_counter() - inicio

    log = [cfg.como_texto().rstrip("\n"), f"n_nodes={n_nodes}"]
    log.append(f"episodios={len(grafos) * h.episodes_per_graph}")
    log.append(f"entradas_nao_nulas={sum(1 for _ in tabela.entradas_nao_nulas())}")
    log.append(f"tempo_s={segundos:.3f}")

    # 3. Treino distribuído, comparado entrada a entrada
    if distribuido:
        distribuida = _treinar_distribuido(cfg, grafos, atraso)
        iguais = distribuida.qtable == tabela
        log.append(f"distribuido_modo={'puxar' if atraso is None else f'cache(atraso={atraso})'}")
        log.append(f"distribuido_mensagens={distribuida.mensagens}")
        log.append(f"distribuido_atualizacoes={distribuida.atualizacoes}")
        log.append(
            f"distribuido_mensagens_por_atualizacao={distribuida.mensagens_por_atualizacao:.3f}"
        )
        log.append(f"distribuido_igual_ao_centralizado={iguais}")
        if atraso is None and not iguais:
            logger.error("a tabela distribuída difere da centralizada")
        else:
            logger.info("tabela distribuída igual à centralizada: %s", iguais)
        tabela = distribuida.qtable

    # 4. Escreve tabela, telemetria e log
    pasta = pasta_tabelas(cfg)
    destino = salvar_qtable(tabela, caminho_tabela(cfg, n_nodes))
    colunas = ["grafo", "episodios", "passos_medios", "truncados", "becos"]
    pd.DataFrame(registro, columns=colunas).to_csv(pasta / f"treino_n{n_nodes}.csv", index=False)
    (pasta / f"treino_n{n_nodes}.log").write_text("\n".join(log) + "\n", encoding="utf-8")
    return destino


# --- teste -----------------------------------------------------------------


def avaliar_grafo(
    item: Tuple[str, GraphInstance], q: QTable, modo: str
) -> Tuple[LinhaAcuracia, Counter, bytes]:
    """Constrói e pontua a árvore de um grafo; roda dentro do processo de trabalho."""
    graph_id, g = item
    arvore = build_tree(g, q, modo)
    linha, excesso = avaliar_arvore(graph_id, arvore)
    return linha, excesso, serialize_tree(arvore)


def cmd_test(
    cfg: ExperimentConfig,
    tabela: Union[str, Path],
    n_nodes: int,
    modo: str = "q_distancia",
    pasta_arvores: Optional[Union[str, Path]] = None,
) -> Path:
    """
    Testa uma tabela Q nos T grafos de teste de tamanho n_nodes.

    Qualquer tabela pode ser pareada com qualquer corpus que use a mesma
    grade (teste de tamanhos cruzados). Escreve
    <out>/resultados/acuracia_<tabela>_nN.csv e o histograma de saltos extras
    saltos_<tabela>_nN.csv; com pasta_arvores, também cada árvore construída.

    Returns:
    --------
    Path
        O CSV de acurácia.
    """
    # 1. Carrega tabela e corpus; a grade precisa coincidir
    q = carregar_qtable(tabela)
    ids, grafos = _carregar_corpus(cfg, n_nodes, "teste", cfg.test_graphs)
    if q.params != grafos[0].params:
        raise ErroConfiguracao(
            f"a tabela usa W={q.params.width}, R={formatar_alcance(q.params.comm_range)} "
            f"e o corpus W={grafos[0].params.width}, "
            f"R={formatar_alcance(grafos[0].params.comm_range)}"
        )

    # 2. Uma árvore por grafo, em paralelo se pedido; a ordem segue ids
    avaliar = partial(avaliar_grafo, q=q, modo=modo)
    itens = list(zip(ids, grafos))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            resultados = list(executor.map(avaliar, itens))
    else:
        resultados = [avaliar(item) for item in itens]

    # 3. Relatórios
    relatorio = montar_relatorio((linha, excesso) for linha, excesso, _ in resultados)
    nome = Path(tabela).stem
    pasta = pasta_resultados(cfg)
    destino = write_report(relatorio, pasta / f"acuracia_{nome}_n{n_nodes}.csv")
    excesso_para_frame(relatorio).to_csv(pasta / f"saltos_{nome}_n{n_nodes}.csv", index=False)

    if pasta_arvores is not None:
        pasta_arvores = Path(pasta_arvores)
        pasta_arvores.mkdir(parents=True, exist_ok=True)
        for graph_id, (_, _, dados) in zip(ids, resultados):
            (pasta_arvores / f"{graph_id}.txt").write_bytes(dados)

    logger.info(
        "%s em N=%d: acurácia média %.4f, agregada %.4f, %d beco(s) sem saída",
        nome,
        n_nodes,
        relatorio.mean_accuracy,
        relatorio.pooled_accuracy,
        relatorio.dead_ends,
    )
    return destino


# --- resumo ----------------------------------------------------------------


def cmd_report(cfg: ExperimentConfig, pasta: Optional[Union[str, Path]] = None) -> pd.DataFrame:
    """
    Junta os CSVs de acurácia numa tabela (tamanho de teste x tamanho de treino)
    de acurácias médias. A diagonal é o teste de mesmo tamanho.

    Escreve <pasta>/resumo.csv e devolve a tabela.
    """
    pasta = Path(pasta) if pasta is not None else pasta_resultados(cfg)
    linhas = []
    for caminho in sorted(pasta.glob("acuracia_*.csv")):
        casamento = PADRAO_RESULTADO.fullmatch(caminho.name)
        if casamento is None:
            continue
        treino = PADRAO_TABELA.search(casamento["tabela"])
        frame = pd.read_csv(caminho)
        media = frame.loc[frame["graph_id"] == "mean", "accuracy"]
        if treino is None or media.empty:
            logger.warning("ignorando %s", caminho.name)
            continue
        linhas.append(
            {
                "treino": int(treino["treino"]),
                "teste": int(casamento["teste"]),
                "accuracy": float(media.iloc[0]),
            }
        )
    if not linhas:
        raise ErroConfiguracao(f"nenhum CSV de acurácia em {pasta}")

    resumo = pd.DataFrame(linhas).pivot_table(
        index="teste", columns="treino", values="accuracy", aggfunc="mean"
    )
    resumo.to_csv(pasta / "resumo.csv")
    return resumo
