"""Módulo da fase de teste: constrói a árvore de roteamento de um grafo novo a
partir de uma tabela Q treinada, com caminhadas gulosas sem repetição de nós."""

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

from src.erros import ErroDominio, ErroFormato
from src.geometria import Location, euclid_dist, loc_index
from src.modelos import GraphInstance, RoutingTree
from src.qlearning import QTable

logger = logging.getLogger(__name__)

# S(u) = Q(c, u) - d(u, v0) é o padrão; os outros dois modos servem de comparação
MODOS_PONTUACAO = ("q_distancia", "q", "distancia")


def score(c: Location, u: Location, q: QTable, sink: Location) -> float:
    """S(u) = Q(c, u) - d(u, v0)."""
    return q.q(c, u) - euclid_dist(u, sink)


@dataclass(frozen=True)
class Caminho:
    """
    Caminhada de um nó na fase de teste.

    Parameters:
    -----------
    passos : Tuple[Location, ...]
        Os locais visitados, a começar pelo próprio nó.
    sucesso : bool
        True se a caminhada chegou ao sorvedouro; False marca um beco sem saída.
    """

    passos: Tuple[Location, ...]
    sucesso: bool

    @property
    def comprimento(self) -> int:
        return len(self.passos) - 1


def _pontuador(g: GraphInstance, q: QTable, modo: str):
    if modo not in MODOS_PONTUACAO:
        raise ErroDominio(f"modo de pontuação desconhecido: {modo!r}")
    sink = g.sink
    distancia = {i: euclid_dist(v, sink) for i, v in g.local_de.items()}
    if modo == "q_distancia":
        return lambda ci, ui: q.valor(ci, ui) - distancia[ui]
    if modo == "q":
        return lambda ci, ui: q.valor(ci, ui)
    return lambda ci, ui: -distancia[ui]


def _caminhar(g: GraphInstance, inicio: int, pontuar) -> Caminho:
    visitados = {inicio}
    passos = [inicio]
    atual = inicio
    limite = g.n_nodes
    while atual != g.sink_idx and len(passos) <= limite:
        melhor, melhor_s = None, None
        # vizinhos em ordem crescente de índice; só um escore estritamente
        # maior troca o escolhido, então o menor índice vence os empates
        for ui in g.vizinhos_idx[atual]:
            if ui in visitados:
                continue
            s = pontuar(atual, ui)
            if melhor is None or s > melhor_s:
                melhor, melhor_s = ui, s
        if melhor is None:
            break
        visitados.add(melhor)
        passos.append(melhor)
        atual = melhor
    return Caminho(
        tuple(g.local_de[i] for i in passos), sucesso=(atual == g.sink_idx)
    )


def build_path(
    v: Location, g: GraphInstance, q: QTable, modo: str = "q_distancia"
) -> Caminho:
    """
    Caminhada gulosa de v até o sorvedouro.

    A cada passo vai para o vizinho não visitado de maior escore; para ao
    chegar no sorvedouro, quando não sobra vizinho não visitado (beco sem saída)
    ou quando a caminhada passaria de |V| nós.

    Parameters:
    -----------
    v : Location
        Nó de partida, diferente do sorvedouro.
    g : GraphInstance
        Grafo de teste.
    q : QTable
        Tabela treinada (só leitura).
    modo : str
        "q_distancia" (padrão), "q" ou "distancia".

    Returns:
    --------
    Caminho
        A caminhada e a indicação de sucesso.
    """
    if v not in g.nodes:
        raise ErroDominio(f"{v} não é nó do grafo")
    if v == g.sink:
        raise ErroDominio("a caminhada não parte do sorvedouro")
    if q.params != g.params:
        raise ErroDominio("a tabela Q e o grafo usam grades diferentes")
    return _caminhar(g, loc_index(v, g.params), _pontuador(g, q, modo))


def build_tree(g: GraphInstance, q: QTable, modo: str = "q_distancia") -> RoutingTree:
    """
    Constrói a árvore de roteamento de g rodando build_path para cada nó.

    O pai de v é o primeiro salto da sua própria caminhada e a camada prevista é
    o comprimento dela. Becos sem saída ficam em failures, sem pai, e a camada
    prevista é o comprimento truncado.
    """
    if q.params != g.params:
        raise ErroDominio("a tabela Q e o grafo usam grades diferentes")
    pontuar = _pontuador(g, q, modo)
    arvore = RoutingTree(graph=g)
    falhas = set()

    for vi in g.nos_nao_sorvedouro():
        caminho = _caminhar(g, vi, pontuar)
        v = caminho.passos[0]
        arvore.caminhadas[v] = caminho.passos
        arvore.predicted_layers[v] = caminho.comprimento
        arvore.arestas_percorridas.update(zip(caminho.passos, caminho.passos[1:]))
        if caminho.sucesso:
            arvore.parent[v] = caminho.passos[1]
        else:
            falhas.add(v)

    arvore.failures = frozenset(falhas)
    if falhas:
        logger.debug("%d beco(s) sem saída em %r", len(falhas), g)
    return arvore


def arestas_multiplas(arvore: RoutingTree) -> Dict[Location, int]:
    """Nós que receberam mais de uma aresta de saída no multiconjunto das caminhadas."""
    saidas = Counter()
    for c, u in set(arvore.arestas_percorridas):
        saidas[c] += 1
    return {v: n for v, n in saidas.items() if n > 1}


# --- exportação da árvore --------------------------------------------------


def serialize_tree(arvore: RoutingTree) -> bytes:
    """
    Uma linha `x y parent_x parent_y layer` por nó, em ordem de índice.

    O sorvedouro, e também os nós em beco sem saída, levam `- -` no lugar do pai.
    """
    linhas = []
    for v in sorted(arvore.graph.nodes):
        pai = arvore.parent.get(v)
        camada = arvore.predicted_layers.get(v, 0)
        coluna_pai = f"{pai.x} {pai.y}" if pai is not None else "- -"
        linhas.append(f"{v.x} {v.y} {coluna_pai} {camada}")
    return ("\n".join(linhas) + "\n").encode("utf-8")


def parse_tree(dados: bytes, g: GraphInstance) -> RoutingTree:
    """
    Lê uma árvore exportada; o conjunto de nós deve ser exatamente o de g.

    Nós diferentes do sorvedouro sem pai são lidos como becos sem saída.
    """
    try:
        linhas = [l.split() for l in dados.decode("utf-8").splitlines() if l.strip()]
    except UnicodeDecodeError:
        raise ErroFormato("arquivo", "não é texto UTF-8") from None

    arvore = RoutingTree(graph=g)
    falhas = set()
    vistos = set()
    for k, partes in enumerate(linhas):
        if len(partes) != 5:
            raise ErroFormato(f"linha[{k}]", "esperado 'x y parent_x parent_y layer'")
        try:
            v = Location(int(partes[0]), int(partes[1]))
            camada = int(partes[4])
            pai = None
            if partes[2:4] != ["-", "-"]:
                pai = Location(int(partes[2]), int(partes[3]))
        except ValueError:
            raise ErroFormato(f"linha[{k}]", f"valores inválidos {partes}") from None
        if v not in g.nodes:
            raise ErroFormato(f"linha[{k}]", f"{v} não é nó do grafo")
        if v in vistos:
            raise ErroFormato(f"linha[{k}]", f"{v} repetido")
        if camada < 0:
            raise ErroFormato(f"linha[{k}]", "camada negativa")
        vistos.add(v)
        arvore.predicted_layers[v] = camada
        if v == g.sink:
            if pai is not None or camada != 0:
                raise ErroFormato(f"linha[{k}]", "o sorvedouro não tem pai e tem camada 0")
        elif pai is None:
            falhas.add(v)
        else:
            arvore.parent[v] = pai

    if vistos != g.nodes:
        raise ErroFormato("nos", f"{len(g.nodes ^ vistos)} nó(s) divergem do grafo")
    arvore.failures = frozenset(falhas)
    return arvore


def salvar_arvore(arvore: RoutingTree, caminho: Union[str, Path]) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_bytes(serialize_tree(arvore))
    return caminho


def carregar_arvore(caminho: Union[str, Path], g: GraphInstance) -> RoutingTree:
    caminho = Path(caminho)
    if not caminho.exists():
        raise ErroFormato("arquivo", f"{caminho} não encontrado")
    return parse_tree(caminho.read_bytes(), g)
