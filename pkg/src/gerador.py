"""Módulo que gera o corpus de grafos de um experimento (treino e teste por
tamanho de rede) e o manifesto com sementes e checksums."""

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from src.configuracao import ExperimentConfig
from src.geometria import GridParams, Location
from src.modelos import GraphInstance
from src.topologia import carregar_grafo, generate_graph, serialize_graph

logger = logging.getLogger(__name__)

CONJUNTOS = ("treino", "teste")
COLUNAS_MANIFESTO = ["arquivo", "n_nodes", "conjunto", "indice", "seed", "sha256"]


@dataclass(frozen=True)
class TarefaGrafo:
    """Um grafo a gerar: tudo o que o processo de trabalho precisa, e só isso."""

    width: int
    comm_range: float
    sink: Tuple[int, int]
    n_nodes: int
    conjunto: str
    indice: int
    seed: int

    @property
    def arquivo(self) -> str:
        return f"n{self.n_nodes}/{self.conjunto}/g{self.indice:04d}.txt"


def semente_do_grafo(corpus_seed: int, n_nodes: int, conjunto: str, indice: int) -> int:
    """Semente de um grafo, derivada só da sua identidade (não da ordem de geração)."""
    sequencia = np.random.SeedSequence(
        [corpus_seed, n_nodes, CONJUNTOS.index(conjunto), indice]
    )
    return int(sequencia.generate_state(1)[0])


def planejar_corpus(cfg: ExperimentConfig) -> List[TarefaGrafo]:
    """Lista os M + T grafos de cada N na ordem do manifesto."""
    tarefas = []
    for n in cfg.nodes:
        for conjunto, total in (("treino", cfg.graphs), ("teste", cfg.test_graphs)):
            for i in range(total):
                tarefas.append(
                    TarefaGrafo(
                        width=cfg.width,
                        comm_range=cfg.comm_range,
                        sink=(cfg.sink_x, cfg.sink_y),
                        n_nodes=n,
                        conjunto=conjunto,
                        indice=i,
                        seed=semente_do_grafo(cfg.corpus_seed, n, conjunto, i),
                    )
                )
    return tarefas


def gerar_um(tarefa: TarefaGrafo) -> bytes:
    """Gera e serializa um grafo; roda dentro do processo de trabalho."""
    g = generate_graph(
        GridParams(tarefa.width, tarefa.comm_range),
        tarefa.n_nodes,
        Location(*tarefa.sink),
        tarefa.seed,
    )
    return serialize_graph(g)


def pasta_corpus(cfg: ExperimentConfig) -> Path:
    return cfg.pasta_saida / "corpus"


def gerar_corpus(cfg: ExperimentConfig) -> Path:
    """
    Escreve o corpus em <out>/corpus/n<N>/{treino,teste}/gNNNN.txt e o
    manifesto em <out>/corpus/manifesto.csv.

    Parameters:
    -----------
    cfg : ExperimentConfig
        Configuração efetiva; ecoada como comentário no início do manifesto.

    Returns:
    --------
    Path
        O caminho do manifesto.

    Raises:
    -------
    ErroGeracao
        Se algum grafo não fica conexo dentro do orçamento de tentativas.
    """
    # 1. Planeja os grafos; cada semente depende só de (seed, N, conjunto, i)
    tarefas = planejar_corpus(cfg)
    raiz = pasta_corpus(cfg)
    logger.info("gerando %d grafo(s) em %s com %d processo(s)", len(tarefas), raiz, cfg.workers)

    # 2. Gera, em paralelo ou não; map preserva a ordem das tarefas
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            conteudos = list(executor.map(gerar_um, tarefas, chunksize=4))
    else:
        conteudos = [gerar_um(t) for t in tarefas]

    # 3. Escreve os arquivos e monta o manifesto
    linhas = []
    for tarefa, dados in zip(tarefas, conteudos):
        caminho = raiz / tarefa.arquivo
        caminho.parent.mkdir(parents=True, exist_ok=True)
        caminho.write_bytes(dados)
        linhas.append(
            {
                "arquivo": tarefa.arquivo,
                "n_nodes": tarefa.n_nodes,
                "conjunto": tarefa.conjunto,
                "indice": tarefa.indice,
                "seed": tarefa.seed,
                "sha256": hashlib.sha256(dados).hexdigest(),
            }
        )

    manifesto = raiz / "manifesto.csv"
    eco = "".join(f"# {linha}\n" for linha in cfg.como_texto().splitlines())
    tabela = pd.DataFrame(linhas, columns=COLUNAS_MANIFESTO).to_csv(index=False)
    manifesto.write_text(eco + tabela, encoding="utf-8")
    return manifesto


def ler_manifesto(caminho: Path) -> pd.DataFrame:
    return pd.read_csv(caminho, comment="#")


def listar_grafos(raiz: Path, n_nodes: int, conjunto: str) -> List[Path]:
    """Arquivos de um conjunto do corpus, em ordem de índice."""
    return sorted((Path(raiz) / f"n{n_nodes}" / conjunto).glob("g*.txt"))


def carregar_conjunto(raiz: Path, n_nodes: int, conjunto: str) -> List[GraphInstance]:
    return [carregar_grafo(c) for c in listar_grafos(raiz, n_nodes, conjunto)]
