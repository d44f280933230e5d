"""Módulo que gera, valida, serializa e carrega as redes geométricas aleatórias."""

import logging
from collections import deque
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

import networkx as nx
import numpy as np

from src.erros import ErroConfiguracao, ErroDominio, ErroFormato, ErroGeracao
from src.geometria import GridParams, Location, dentro_do_alcance, validar_local
from src.modelos import GraphInstance

logger = logging.getLogger(__name__)

TENTATIVAS_MAX = 1000

Semente = Union[int, np.random.SeedSequence, np.random.Generator, None]


def construir_grafo(
    params: GridParams, sink: Location, nodes: Iterable[Location]
) -> GraphInstance:
    """
    Monta a GraphInstance calculando as arestas pelo predicado de alcance.

    As distâncias quadradas são inteiras, então o conjunto de arestas é o mesmo
    em qualquer plataforma.

    Parameters:
    -----------
    params : GridParams
        Parâmetros da grade.
    sink : Location
        O sorvedouro.
    nodes : Iterable[Location]
        Os nós (o sorvedouro incluído).

    Returns:
    --------
    GraphInstance
        A instância com a adjacência preenchida.
    """
    lista = sorted(set(nodes))
    if not lista:
        return GraphInstance(params, sink, lista, {})
    coords = np.array([(v.x, v.y) for v in lista], dtype=np.int64)
    diff = coords[:, None, :] - coords[None, :, :]
    d2 = (diff**2).sum(axis=-1)
    vizinhos = (d2 <= params.limite_quadrado) & (d2 > 0)

    adjacencia: Dict[Location, FrozenSet[Location]] = {}
    for i, v in enumerate(lista):
        adjacencia[v] = frozenset(lista[j] for j in np.flatnonzero(vizinhos[i]))
    return GraphInstance(params, sink, lista, adjacencia)


def _sortear_locais(
    params: GridParams, n_nodes: int, sink_idx: int, rng: np.random.Generator
) -> list:
    # n-1 índices distintos de P ∖ {sorvedouro}; pular o índice do sorvedouro
    amostra = rng.choice(params.n_locais - 1, size=n_nodes - 1, replace=False)
    locais = []
    for i in amostra.tolist():
        if i >= sink_idx:
            i += 1
        x, y = divmod(i, params.width)
        locais.append(Location(x, y))
    return locais


def generate_graph(
    params: GridParams,
    n_nodes: int,
    sink: Location,
    seed: Semente,
    tentativas_max: int = TENTATIVAS_MAX,
) -> GraphInstance:
    """
    Sorteia uma rede geométrica aleatória conexa ao sorvedouro.

    Os n_nodes - 1 nós restantes são sorteados sem repetição e de forma
    uniforme em P ∖ {sink}. Se algum nó não alcança o sorvedouro o grafo inteiro
    é descartado e sorteado de novo (amostragem por rejeição), até
    tentativas_max vezes.

    Parameters:
    -----------
    params : GridParams
        Parâmetros da grade.
    n_nodes : int
        Número de nós N, o sorvedouro incluído.
    sink : Location
        Local fixo do sorvedouro.
    seed : int | SeedSequence | Generator
        Semente (ou gerador já semeado) do sorteio.
    tentativas_max : int
        Orçamento de sorteios.

    Returns:
    --------
    GraphInstance
        Um grafo em que todos os nós têm caminho até o sorvedouro.
    """
    validar_local(sink, params)
    if n_nodes < 1:
        raise ErroDominio(f"n_nodes deve ser positivo, recebido {n_nodes}")
    if n_nodes > params.n_locais:
        raise ErroDominio(
            f"n_nodes={n_nodes} excede os {params.n_locais} locais da grade"
        )

    rng = np.random.default_rng(seed)
    sink_idx = sink.x * params.width + sink.y

    for tentativa in range(1, tentativas_max + 1):
        locais = _sortear_locais(params, n_nodes, sink_idx, rng)
        g = construir_grafo(params, sink, [sink, *locais])
        conexo, isolados = is_connected_to_sink(g)
        if conexo:
            logger.info(
                "grafo n=%d gerado após %d tentativa(s), %d arestas",
                n_nodes,
                tentativa,
                g.n_arestas,
            )
            return g
        logger.debug(
            "tentativa %d descartada: %d nó(s) sem caminho ao sorvedouro",
            tentativa,
            len(isolados),
        )

    raise ErroGeracao(
        f"nenhum grafo conexo com n={n_nodes}, W={params.width}, R={params.comm_range} "
        f"em {tentativas_max} tentativas",
        tentativas=tentativas_max,
    )


def is_connected_to_sink(g: GraphInstance) -> Tuple[bool, FrozenSet[Location]]:
    """
    Busca em largura a partir do sorvedouro.

    Returns:
    --------
    Tuple[bool, FrozenSet[Location]]
        (True se todos alcançam o sorvedouro, conjunto dos que não alcançam).
    """
    alcancados = {g.sink_idx}
    fila = deque([g.sink_idx])
    while fila:
        atual = fila.popleft()
        for vizinho in g.vizinhos_idx[atual]:
            if vizinho not in alcancados:
                alcancados.add(vizinho)
                fila.append(vizinho)
    isolados = frozenset(g.local_de[i] for i in g.indices if i not in alcancados)
    return not isolados, isolados


def estatisticas_grau(g: GraphInstance) -> Dict[str, float]:
    """Grau médio, mínimo e máximo da instância."""
    graus = np.array([len(g.vizinhos_idx[i]) for i in g.indices])
    return {
        "grau_medio": float(graus.mean()),
        "grau_min": int(graus.min()),
        "grau_max": int(graus.max()),
    }


def to_networkx(g: GraphInstance) -> nx.Graph:
    """Exporta para networkx; cada nó é a Location e carrega o atributo pos=(x, y)."""
    grafo = nx.Graph()
    for v in sorted(g.nodes):
        grafo.add_node(v, pos=(v.x, v.y), sorvedouro=(v == g.sink))
    grafo.add_edges_from(g.arestas())
    return grafo


def formatar_alcance(r: float) -> str:
    if float(r).is_integer():
        return str(int(r))
    return repr(float(r))


def serialize_graph(g: GraphInstance, incluir_arestas: bool = False) -> bytes:
    """
    Serializa no formato textual de grafo.

    Cabeçalho `chave=valor` (W, R, sink_x, sink_y, n) seguido de n linhas `x y`
    em ordem de índice linear. As arestas não são gravadas, a não ser que
    incluir_arestas seja pedido (seção opcional `edges=m` com linhas
    `x1 y1 x2 y2`, conferida na leitura).
    """
    linhas = [
        f"W={g.params.width}",
        f"R={formatar_alcance(g.params.comm_range)}",
        f"sink_x={g.sink.x}",
        f"sink_y={g.sink.y}",
        f"n={g.n_nodes}",
    ]
    linhas.extend(f"{v.x} {v.y}" for v in sorted(g.nodes))
    if incluir_arestas:
        arestas = list(g.arestas())
        linhas.append(f"edges={len(arestas)}")
        linhas.extend(f"{a.x} {a.y} {b.x} {b.y}" for a, b in arestas)
    return ("\n".join(linhas) + "\n").encode("utf-8")


def _ler_cabecalho(linhas: list, chaves: Tuple[str, ...]) -> Dict[str, str]:
    valores = {}
    for chave, linha in zip(chaves, linhas):
        nome, sep, valor = linha.partition("=")
        if not sep or nome.strip() != chave:
            raise ErroFormato(chave, f"esperado '{chave}=...', lido {linha!r}")
        valores[chave] = valor.strip()
    if len(valores) < len(chaves):
        faltando = chaves[len(valores)]
        raise ErroFormato(faltando, "cabeçalho incompleto")
    return valores


def _inteiro(campo: str, texto: str) -> int:
    try:
        return int(texto)
    except ValueError:
        raise ErroFormato(campo, f"inteiro inválido {texto!r}") from None


def ler_params(campo_w: str, texto_w: str, texto_r: str) -> GridParams:
    """Converte os campos W e R de um cabeçalho em GridParams, ou ErroFormato."""
    w = _inteiro(campo_w, texto_w)
    try:
        r = float(texto_r)
    except ValueError:
        raise ErroFormato("R", f"real inválido {texto_r!r}") from None
    try:
        return GridParams(w, r)
    except ErroConfiguracao as e:
        raise ErroFormato("W/R", str(e)) from None


def parse_graph(dados: bytes) -> GraphInstance:
    """
    Lê um grafo serializado e valida todos os invariantes da instância.

    Raises:
    -------
    ErroFormato
        Com o campo ofensor: cabeçalho, coordenadas, duplicatas, sorvedouro,
        arestas (se presentes) ou conectividade.
    """
    try:
        texto = dados.decode("utf-8")
    except UnicodeDecodeError:
        raise ErroFormato("arquivo", "não é texto UTF-8") from None
    linhas = [l.strip() for l in texto.splitlines() if l.strip()]

    cab = _ler_cabecalho(linhas, ("W", "R", "sink_x", "sink_y", "n"))
    params = ler_params("W", cab["W"], cab["R"])
    sink = Location(_inteiro("sink_x", cab["sink_x"]), _inteiro("sink_y", cab["sink_y"]))
    n = _inteiro("n", cab["n"])
    if n < 1:
        raise ErroFormato("n", f"deve ser positivo, lido {n}")

    corpo = linhas[5:]
    if len(corpo) < n:
        raise ErroFormato("n", f"declara {n} nós mas há {len(corpo)} linhas")

    nos = []
    vistos = set()
    for k, linha in enumerate(corpo[:n]):
        partes = linha.split()
        if len(partes) != 2:
            raise ErroFormato(f"no[{k}]", f"esperado 'x y', lido {linha!r}")
        v = Location(_inteiro(f"no[{k}].x", partes[0]), _inteiro(f"no[{k}].y", partes[1]))
        try:
            validar_local(v, params)
        except ErroDominio as e:
            raise ErroFormato(f"no[{k}]", str(e)) from None
        if v in vistos:
            raise ErroFormato(f"no[{k}]", f"coordenada duplicada {v}")
        vistos.add(v)
        nos.append(v)

    try:
        validar_local(sink, params)
    except ErroDominio as e:
        raise ErroFormato("sink", str(e)) from None
    if sink not in vistos:
        raise ErroFormato("sink", f"o sorvedouro {sink} não está na lista de nós")

    g = construir_grafo(params, sink, nos)

    resto = corpo[n:]
    if resto:
        _conferir_arestas(g, resto)

    conexo, isolados = is_connected_to_sink(g)
    if not conexo:
        raise ErroFormato(
            "conectividade", f"{len(isolados)} nó(s) sem caminho ao sorvedouro"
        )
    return g


def _conferir_arestas(g: GraphInstance, linhas: list) -> None:
    nome, sep, valor = linhas[0].partition("=")
    if not sep or nome.strip() != "edges":
        raise ErroFormato("edges", f"conteúdo inesperado após os nós: {linhas[0]!r}")
    m = _inteiro("edges", valor.strip())
    if len(linhas) - 1 != m:
        raise ErroFormato("edges", f"declara {m} arestas mas há {len(linhas) - 1}")

    lidas = set()
    for k, linha in enumerate(linhas[1:]):
        partes = linha.split()
        if len(partes) != 4:
            raise ErroFormato(f"aresta[{k}]", f"esperado 'x1 y1 x2 y2', lido {linha!r}")
        a = Location(_inteiro(f"aresta[{k}]", partes[0]), _inteiro(f"aresta[{k}]", partes[1]))
        b = Location(_inteiro(f"aresta[{k}]", partes[2]), _inteiro(f"aresta[{k}]", partes[3]))
        if a not in g.nodes or b not in g.nodes:
            raise ErroFormato(f"aresta[{k}]", "extremidade não é nó do grafo")
        if not dentro_do_alcance(a, b, g.params):
            raise ErroFormato(f"aresta[{k}]", f"{a}-{b} está fora do alcance R")
        lidas.add(frozenset((a, b)))

    esperadas = {frozenset(par) for par in g.arestas()}
    if lidas != esperadas:
        raise ErroFormato(
            "edges",
            f"{len(esperadas - lidas)} aresta(s) do predicado de alcance ausentes",
        )


def salvar_grafo(g: GraphInstance, caminho: Union[str, Path]) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_bytes(serialize_graph(g))
    return caminho


def carregar_grafo(caminho: Union[str, Path]) -> GraphInstance:
    caminho = Path(caminho)
    if not caminho.exists():
        raise ErroFormato("arquivo", f"{caminho} não encontrado")
    return parse_graph(caminho.read_bytes())


def conferir_compatibilidade(
    grafos: Iterable[GraphInstance], params: Optional[GridParams] = None
) -> Tuple[GridParams, Location]:
    """Confere que todos os grafos têm os mesmos GridParams e sorvedouro."""
    referencia = None
    for g in grafos:
        if referencia is None:
            referencia = (params or g.params, g.sink)
        if (g.params, g.sink) != referencia:
            raise ErroConfiguracao(
                f"grafo com W={g.params.width}, R={g.params.comm_range}, sink={g.sink} "
                f"difere de W={referencia[0].width}, R={referencia[0].comm_range}, "
                f"sink={referencia[1]}"
            )
    if referencia is None:
        raise ErroConfiguracao("lista de grafos vazia")
    return referencia
