"""Módulo que contém as classes compartilhadas entre os módulos:
a instância de rede, os hiperparâmetros do treino e a árvore de roteamento."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from src.erros import ErroConfiguracao, ErroDominio
from src.geometria import GridParams, Location, loc_index


class GraphInstance:
    """
    Uma rede geométrica aleatória: parâmetros da grade, sorvedouro, nós e adjacência.

    A instância é imutável depois de construída. Além das visões por Location,
    guarda visões por índice linear (vizinhos ordenados por índice), que são as
    usadas nos laços de treino.

    Parameters:
    -----------
    params : GridParams
        Parâmetros da grade.
    sink : Location
        O sorvedouro v0 (sempre membro de nodes).
    nodes : Iterable[Location]
        Os locais ocupados por nós.
    adjacency : Mapping[Location, Iterable[Location]]
        Lista de adjacência simétrica.
    """

    def __init__(
        self,
        params: GridParams,
        sink: Location,
        nodes: Iterable[Location],
        adjacency: Mapping[Location, Iterable[Location]],
    ):
        self.params = params
        self.sink = sink
        self.nodes: FrozenSet[Location] = frozenset(nodes)
        self.adjacency: Dict[Location, FrozenSet[Location]] = {
            v: frozenset(adjacency.get(v, ())) for v in self.nodes
        }
        if sink not in self.nodes:
            raise ErroDominio(f"o sorvedouro {sink} não está entre os nós")

        self.sink_idx = loc_index(sink, params)
        self.indices: Tuple[int, ...] = tuple(
            sorted(loc_index(v, params) for v in self.nodes)
        )
        self.local_de: Dict[int, Location] = {
            loc_index(v, params): v for v in self.nodes
        }
        self.vizinhos_idx: Dict[int, Tuple[int, ...]] = {
            loc_index(v, params): tuple(
                sorted(loc_index(u, params) for u in self.adjacency[v])
            )
            for v in self.nodes
        }

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def arestas(self):
        """Arestas não direcionadas (u, v) com índice(u) < índice(v), em ordem."""
        for vi in self.indices:
            for ui in self.vizinhos_idx[vi]:
                if vi < ui:
                    yield self.local_de[vi], self.local_de[ui]

    @property
    def n_arestas(self) -> int:
        return sum(len(viz) for viz in self.vizinhos_idx.values()) // 2

    def nos_nao_sorvedouro(self) -> Tuple[int, ...]:
        """Índices de V ∖ {v0}, em ordem crescente."""
        return tuple(i for i in self.indices if i != self.sink_idx)

    def __eq__(self, outro) -> bool:
        if not isinstance(outro, GraphInstance):
            return NotImplemented
        return (
            self.params == outro.params
            and self.sink == outro.sink
            and self.nodes == outro.nodes
            and self.adjacency == outro.adjacency
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"<GraphInstance(W={self.params.width}, R={self.params.comm_range}, "
            f"n={self.n_nodes}, arestas={self.n_arestas})>"
        )


@dataclass(frozen=True)
class Hyperparams:
    """
    Hiperparâmetros do treino.

    Parameters:
    -----------
    alpha : float
        Taxa de aprendizado, em (0, 1].
    gamma : float
        Fator de desconto, em [0, 1).
    epsilon : float
        Probabilidade de exploração, em [0, 1].
    episodes_per_graph : int
        K, episódios por grafo de treino (0 é permitido e não treina nada).
    max_steps_per_episode : Optional[int]
        Limite de passos por episódio; None usa 10·|V_m| de cada grafo.
    """

    alpha: float = 0.9
    gamma: float = 0.9
    epsilon: float = 0.5
    episodes_per_graph: int = 20_000
    max_steps_per_episode: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ErroConfiguracao(f"alpha deve estar em (0, 1], recebido {self.alpha}")
        if not 0 <= self.gamma < 1:
            raise ErroConfiguracao(f"gamma deve estar em [0, 1), recebido {self.gamma}")
        if not 0 <= self.epsilon <= 1:
            raise ErroConfiguracao(
                f"epsilon deve estar em [0, 1], recebido {self.epsilon}"
            )
        if self.episodes_per_graph < 0:
            raise ErroConfiguracao("episodes_per_graph não pode ser negativo")
        if self.max_steps_per_episode is not None and self.max_steps_per_episode < 1:
            raise ErroConfiguracao("max_steps_per_episode deve ser positivo")

    def limite_passos(self, g: GraphInstance) -> int:
        if self.max_steps_per_episode is not None:
            return self.max_steps_per_episode
        return 10 * g.n_nodes


@dataclass
class RoutingTree:
    """
    Resultado da fase de teste sobre um grafo.

    Parameters:
    -----------
    graph : GraphInstance
        O grafo sobre o qual a árvore foi construída.
    parent : Dict[Location, Location]
        Próximo salto de cada nó que chegou ao sorvedouro (o primeiro salto da
        sua própria caminhada). Nós que caíram num beco sem saída não têm pai.
    predicted_layers : Dict[Location, int]
        |P| - 1 da caminhada de cada nó; o sorvedouro tem camada 0.
    failures : FrozenSet[Location]
        Nós cuja caminhada terminou num beco sem saída.
    caminhadas : Dict[Location, Tuple[Location, ...]]
        A caminhada completa de cada nó (vazia quando a árvore veio de arquivo).
    arestas_percorridas : Counter
        Multiconjunto de todas as arestas (c, u) percorridas por todas as caminhadas.
    """

    graph: GraphInstance
    parent: Dict[Location, Location] = field(default_factory=dict)
    predicted_layers: Dict[Location, int] = field(default_factory=dict)
    failures: FrozenSet[Location] = frozenset()
    caminhadas: Dict[Location, Tuple[Location, ...]] = field(default_factory=dict)
    arestas_percorridas: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.predicted_layers.setdefault(self.graph.sink, 0)
