"""Módulo que desenha um grafo e uma árvore de roteamento em SVG: arestas do
grafo pontilhadas ao fundo, arestas da árvore cheias e direcionadas, nós
coloridos pela camada."""

import io
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import matplotlib
import networkx as nx
from matplotlib.colors import to_hex
from matplotlib.figure import Figure

from src.geometria import Location
from src.modelos import GraphInstance, RoutingTree
from src.topologia import to_networkx

logger = logging.getLogger(__name__)

POLEGADAS = 7.0
TAMANHO_NO = 24
COR_ARESTA = "#bbbbbb"
COR_ARVORE = "#333333"
COR_FALHA = "#d62728"
COR_SEM_CAMADA = "#888888"
COR_SORVEDOURO = "#000000"
MAPA_CORES = "viridis"

# ids fixos no SVG: a mesma entrada gera o mesmo arquivo
PARAMETROS_SVG = {"svg.hashsalt": "qspt", "svg.fonttype": "none"}


def cor_da_camada(camada: int, camada_max: int) -> str:
    mapa = matplotlib.colormaps[MAPA_CORES]
    return to_hex(mapa(camada / camada_max if camada_max else 0.0))


def gid_do_no(v: Location, g: GraphInstance, falhas=frozenset()) -> str:
    """Identificador do glifo de v no SVG; todos começam com "no-"."""
    if v == g.sink:
        return f"no-sorvedouro-{v.x}-{v.y}"
    if v in falhas:
        return f"no-falha-{v.x}-{v.y}"
    return f"no-{v.x}-{v.y}"


def _desenhar(g: GraphInstance, arvore: Optional[RoutingTree], titulo: str) -> Figure:
    grafo = to_networkx(g)
    pos: Dict[Location, Tuple[int, int]] = nx.get_node_attributes(grafo, "pos")
    camadas = arvore.predicted_layers if arvore is not None else {}
    falhas = arvore.failures if arvore is not None else frozenset()
    camada_max = max(camadas.values(), default=0)

    fig = Figure(figsize=(POLEGADAS, POLEGADAS))
    ax = fig.add_subplot()

    # 1. Grafo ao fundo, uma linha pontilhada por aresta
    arestas = nx.draw_networkx_edges(
        grafo,
        pos,
        edgelist=list(g.arestas()),
        arrows=True,
        arrowstyle="-",
        style="dotted",
        edge_color=COR_ARESTA,
        width=0.6,
        node_size=TAMANHO_NO,
        ax=ax,
    )
    for k, artista in enumerate(arestas):
        artista.set_gid(f"aresta-{k}")

    # 2. Arestas da árvore, do filho para o pai
    if arvore is not None and arvore.parent:
        dirigido = nx.DiGraph()
        dirigido.add_nodes_from(grafo.nodes)
        ligacoes = sorted(arvore.parent.items())
        setas = nx.draw_networkx_edges(
            dirigido,
            pos,
            edgelist=ligacoes,
            arrows=True,
            arrowstyle="-|>",
            arrowsize=8,
            edge_color=COR_ARVORE,
            width=1.0,
            node_size=TAMANHO_NO,
            ax=ax,
        )
        for (v, _), artista in zip(ligacoes, setas):
            artista.set_gid(f"arvore-{v.x}-{v.y}")

    # 3. Nós: um glifo por nó, o sorvedouro em quadrado
    for v in sorted(g.nodes):
        if v == g.sink:
            cor, forma = COR_SORVEDOURO, "s"
        elif v in falhas:
            cor, forma = COR_FALHA, "o"
        elif v in camadas:
            cor, forma = cor_da_camada(camadas[v], camada_max), "o"
        else:
            cor, forma = COR_SEM_CAMADA, "o"
        glifo = nx.draw_networkx_nodes(
            grafo,
            pos,
            nodelist=[v],
            node_color=cor,
            node_shape=forma,
            node_size=TAMANHO_NO * (2 if v == g.sink else 1),
            ax=ax,
        )
        glifo.set_gid(gid_do_no(v, g, falhas))

    lado = g.params.width
    ax.set_xlim(-1, lado)
    ax.set_ylim(-1, lado)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if titulo:
        ax.set_title(titulo, fontsize=9)
    return fig


def render_svg(g: GraphInstance, arvore: Optional[RoutingTree] = None, titulo: str = "") -> str:
    """
    Desenha g com a árvore por cima e devolve o documento SVG.

    Parameters:
    -----------
    g : GraphInstance
        O grafo; cada aresta vira um grupo pontilhado com id "aresta-k".
    arvore : Optional[RoutingTree]
        Árvore a desenhar (grupos "arvore-x-y", com seta para o pai); None
        desenha só o grafo.
    titulo : str
        Título da figura e do documento.

    Returns:
    --------
    str
        Documento SVG com exatamente um grupo "no-..." por nó.
    """
    fig = _desenhar(g, arvore, titulo)
    metadados = {"Date": None}
    if titulo:
        metadados["Title"] = titulo
    saida = io.StringIO()
    with matplotlib.rc_context(PARAMETROS_SVG):
        fig.savefig(saida, format="svg", metadata=metadados)
    return saida.getvalue()


def salvar_svg(
    g: GraphInstance,
    arvore: Optional[RoutingTree],
    caminho: Union[str, Path],
    titulo: str = "",
) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_text(render_svg(g, arvore, titulo), encoding="utf-8")
    logger.info("figura salva em %s", caminho)
    return caminho
