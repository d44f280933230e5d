"""Módulo com a referência exata (BFS), a acurácia de roteamento, o ponto fixo
analítico de Q e a validação das árvores construídas."""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.erros import ErroDominio
from src.geometria import Location
from src.arvore import build_tree
from src.modelos import GraphInstance, RoutingTree
from src.qlearning import RECOMPENSA_SORVEDOURO, QTable

logger = logging.getLogger(__name__)

COLUNAS_RELATORIO = ["graph_id", "n_nodes", "accuracy", "dead_ends"]


@dataclass
class LayerMap:
    """
    Distância em saltos de cada nó até o sorvedouro.

    Parameters:
    -----------
    layers : Dict[Location, int]
        d_G(v, v0) para todo nó v.
    """

    layers: Dict[Location, int]

    def __getitem__(self, v: Location) -> int:
        return self.layers[v]

    def __len__(self) -> int:
        return len(self.layers)

    def __eq__(self, outro) -> bool:
        if isinstance(outro, LayerMap):
            return self.layers == outro.layers
        if isinstance(outro, dict):
            return self.layers == outro
        return NotImplemented


def bfs_layers(g: GraphInstance) -> LayerMap:
    """
    Caminhos mínimos até o sorvedouro (Dijkstra com pesos unitários = BFS).

    Raises:
    -------
    ErroDominio
        Se algum nó não alcança o sorvedouro.
    """
    camadas = {g.sink_idx: 0}
    fila = deque([g.sink_idx])
    while fila:
        atual = fila.popleft()
        for vizinho in g.vizinhos_idx[atual]:
            if vizinho not in camadas:
                camadas[vizinho] = camadas[atual] + 1
                fila.append(vizinho)
    if len(camadas) != g.n_nodes:
        raise ErroDominio(
            f"grafo desconexo: {g.n_nodes - len(camadas)} nó(s) sem caminho ao sorvedouro"
        )
    return LayerMap({g.local_de[i]: d for i, d in camadas.items()})


def _mesmos_nos(arvore: RoutingTree, rotulos: LayerMap) -> None:
    if set(arvore.graph.nodes) != set(rotulos.layers):
        raise ErroDominio("a árvore e os rótulos cobrem conjuntos de nós diferentes")


def _contar_acertos(tree: RoutingTree, labels: LayerMap) -> int:
    _mesmos_nos(tree, labels)
    return sum(
        1
        for v, d in labels.layers.items()
        if v not in tree.failures and tree.predicted_layers.get(v) == d
    )


def routing_accuracy(tree: RoutingTree, labels: LayerMap) -> float:
    """
    Fração dos nós (sorvedouro incluído) cuja camada prevista é a camada exata.

    Nós em beco sem saída contam como erro.
    """
    return _contar_acertos(tree, labels) / len(labels)


def q_star(g: GraphInstance, gamma: float) -> Dict[Tuple[Location, Location], float]:
    """
    Ponto fixo de Bellman com a recompensa 100 no sorvedouro e 0 no resto:
    Q*(v, u) = 100·γ^{d_G(u, v0)} para toda aresta direcionada (v, u) de g.
    """
    camadas = bfs_layers(g)
    return {
        (v, u): RECOMPENSA_SORVEDOURO * gamma ** camadas[u]
        for v in g.nodes
        for u in g.adjacency[v]
    }


def oracle_tree(g: GraphInstance) -> RoutingTree:
    """
    Árvore de caminhos mínimos pela BFS: o pai de v é o vizinho de menor índice
    uma camada mais perto do sorvedouro.
    """
    camadas = bfs_layers(g)
    arvore = RoutingTree(graph=g)
    for vi in g.nos_nao_sorvedouro():
        v = g.local_de[vi]
        pai = next(
            g.local_de[ui]
            for ui in g.vizinhos_idx[vi]
            if camadas[g.local_de[ui]] == camadas[v] - 1
        )
        arvore.parent[v] = pai
        arvore.predicted_layers[v] = camadas[v]
    return arvore


@dataclass
class RelatorioValidacao:
    """Violações encontradas por validate_tree; vazio em todas as listas = árvore válida."""

    arestas_invalidas: List[Tuple[Location, Location]] = field(default_factory=list)
    ciclos: List[Location] = field(default_factory=list)
    sem_caminho: List[Location] = field(default_factory=list)

    @property
    def aciclica(self) -> bool:
        return not self.ciclos

    @property
    def ok(self) -> bool:
        return not (self.arestas_invalidas or self.ciclos or self.sem_caminho)


def validate_tree(tree: RoutingTree, g: GraphInstance) -> RelatorioValidacao:
    """
    Confere as arestas de pai e a ausência de ciclos no mapa de pais.

    Seguindo os pais a partir de cada nó é preciso chegar ao sorvedouro em até
    |V| passos. Um nó cuja cadeia revisita um nó entra em ciclos; um nó cuja
    cadeia para num nó sem pai (beco sem saída) entra em sem_caminho.
    As violações são relatadas, nunca levantadas.
    """
    if set(tree.graph.nodes) != set(g.nodes):
        raise ErroDominio("a árvore e o grafo cobrem conjuntos de nós diferentes")
    relatorio = RelatorioValidacao()
    for v, pai in sorted(tree.parent.items()):
        if pai not in g.adjacency.get(v, ()):
            relatorio.arestas_invalidas.append((v, pai))

    for v in sorted(g.nodes):
        if v == g.sink:
            continue
        atual, vistos = v, {v}
        for _ in range(g.n_nodes):
            atual = tree.parent.get(atual)
            if atual is None or atual == g.sink:
                break
            if atual in vistos:
                relatorio.ciclos.append(v)
                break
            vistos.add(atual)
        if atual is None:
            relatorio.sem_caminho.append(v)
    return relatorio


def caminhadas_simples(tree: RoutingTree) -> bool:
    """True se nenhuma caminhada registrada repete um local."""
    return all(len(set(p)) == len(p) for p in tree.caminhadas.values())


# --- relatório de acurácia -------------------------------------------------


@dataclass(frozen=True)
class LinhaAcuracia:
    graph_id: str
    n_nodes: int
    accuracy: float
    dead_ends: int
    acertos: int


@dataclass
class AccuracyReport:
    """
    Acurácia de um conjunto de grafos de teste.

    Parameters:
    -----------
    per_graph : List[LinhaAcuracia]
        Uma linha por grafo, na ordem de avaliação.
    excesso_saltos : Counter
        Histograma de (camada prevista - camada exata) dos nós que chegaram ao
        sorvedouro.
    """

    per_graph: List[LinhaAcuracia] = field(default_factory=list)
    excesso_saltos: Counter = field(default_factory=Counter)

    @property
    def mean_accuracy(self) -> float:
        """Média das frações por grafo."""
        if not self.per_graph:
            return 0.0
        return float(pd.Series([l.accuracy for l in self.per_graph]).mean())

    @property
    def std_accuracy(self) -> float:
        if len(self.per_graph) < 2:
            return 0.0
        return float(pd.Series([l.accuracy for l in self.per_graph]).std())

    @property
    def pooled_accuracy(self) -> float:
        """Acertos somados sobre nós somados."""
        total = sum(l.n_nodes for l in self.per_graph)
        return sum(l.acertos for l in self.per_graph) / total if total else 0.0

    @property
    def dead_ends(self) -> int:
        return sum(l.dead_ends for l in self.per_graph)


def avaliar_arvore(graph_id: str, tree: RoutingTree) -> Tuple[LinhaAcuracia, Counter]:
    """Compara uma árvore com a BFS do seu grafo; devolve a linha e o excesso de saltos."""
    rotulos = bfs_layers(tree.graph)
    acertos = _contar_acertos(tree, rotulos)
    n = len(rotulos)
    excesso = Counter(
        tree.predicted_layers[v] - d
        for v, d in rotulos.layers.items()
        if v != tree.graph.sink and v not in tree.failures
    )
    linha = LinhaAcuracia(
        graph_id=graph_id,
        n_nodes=n,
        accuracy=acertos / n,
        dead_ends=len(tree.failures),
        acertos=acertos,
    )
    return linha, excesso


def montar_relatorio(avaliacoes: Iterable[Tuple[LinhaAcuracia, Counter]]) -> AccuracyReport:
    relatorio = AccuracyReport()
    for linha, excesso in avaliacoes:
        relatorio.per_graph.append(linha)
        relatorio.excesso_saltos.update(excesso)
    return relatorio


def evaluate_corpus(
    graphs: Sequence[GraphInstance],
    q: QTable,
    modo: str = "q_distancia",
    ids: Optional[Sequence[str]] = None,
) -> AccuracyReport:
    """Constrói a árvore de cada grafo com q e junta as acurácias num relatório."""
    if ids is None:
        ids = [f"g{i:04d}" for i in range(len(graphs))]
    if len(ids) != len(graphs):
        raise ErroDominio("um identificador por grafo")
    return montar_relatorio(
        avaliar_arvore(gid, build_tree(g, q, modo)) for gid, g in zip(ids, graphs)
    )


def report_to_frame(relatorio: AccuracyReport) -> pd.DataFrame:
    """
    Tabela graph_id,n_nodes,accuracy,dead_ends: uma linha por grafo e, no fim,
    as linhas mean, std e pooled (n_nodes e dead_ends somados nelas).
    """
    linhas = [
        {
            "graph_id": l.graph_id,
            "n_nodes": l.n_nodes,
            "accuracy": l.accuracy,
            "dead_ends": l.dead_ends,
        }
        for l in relatorio.per_graph
    ]
    total_nos = sum(l.n_nodes for l in relatorio.per_graph)
    for rotulo, valor in (
        ("mean", relatorio.mean_accuracy),
        ("std", relatorio.std_accuracy),
        ("pooled", relatorio.pooled_accuracy),
    ):
        linhas.append(
            {
                "graph_id": rotulo,
                "n_nodes": total_nos,
                "accuracy": valor,
                "dead_ends": relatorio.dead_ends,
            }
        )
    return pd.DataFrame(linhas, columns=COLUNAS_RELATORIO)


def write_report(relatorio: AccuracyReport, caminho: Union[str, Path]) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    report_to_frame(relatorio).to_csv(caminho, index=False)
    return caminho


def excesso_para_frame(relatorio: AccuracyReport) -> pd.DataFrame:
    """Histograma de saltos extras (0 = caminho mínimo) como tabela."""
    return pd.DataFrame(
        sorted(relatorio.excesso_saltos.items()), columns=["saltos_extras", "nos"]
    )
