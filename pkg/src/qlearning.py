"""Módulo do Q-learning tabular: a tabela Q indexada por local, a recompensa,
a política ε-gulosa, a atualização de Bellman e a fase de treino completa.

Ordem dos sorteios (um único gerador numpy, sempre via rng.random()):
  1. início do episódio: um sorteio, nó = nao_sorvedouro[int(u * len)];
  2. a cada passo, a moeda explorar/explotar: explora se u < ε;
  3. se explorar, um sorteio para o vizinho uniforme;
  4. se explotar e houver empate no máximo, um sorteio entre os maximizadores.
O runtime distribuído (src/distribuido.py) consome os sorteios na mesma ordem.

No arquivo da tabela só aparecem as entradas não nulas, com valores em
[0, 100]; as demais são implícitas (0 entre vizinhos de grade).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.erros import ErroConfiguracao, ErroDominio, ErroFormato
from src.geometria import (
    GridParams,
    Location,
    graph_neighbors,
    loc_index,
    total_pares_vizinhos,
)
from src.modelos import GraphInstance, Hyperparams
from src.topologia import conferir_compatibilidade, formatar_alcance, ler_params

logger = logging.getLogger(__name__)

RECOMPENSA_SORVEDOURO = 100.0
SENTINELA = -100.0
VERSAO_FORMATO = 1
BLOCO_TELEMETRIA = 10_000


class QTable:
    """
    Tabela Q(v, u) indexada pelos índices lineares dos locais.

    Logicamente existe uma entrada, iniciada em 0, para cada par (v, u) com
    u ∈ N(v); qualquer outro par lê a sentinela -100 sem ser armazenado.
    Fisicamente só as entradas já escritas ocupam memória (para W=100, R=20
    seriam ~1,2·10⁷ entradas densas).

    Parameters:
    -----------
    params : GridParams
        Grade à qual a tabela pertence.
    """

    def __init__(self, params: GridParams):
        self.params = params
        self._linhas: Dict[int, Dict[int, float]] = {}
        self._visitas: Dict[Tuple[int, int], int] = {}

    # --- consulta -------------------------------------------------------

    def e_par_valido(self, vi: int, ui: int) -> bool:
        w = self.params.width
        if not (0 <= vi < w * w and 0 <= ui < w * w):
            return False
        vx, vy = divmod(vi, w)
        ux, uy = divmod(ui, w)
        d2 = (vx - ux) ** 2 + (vy - uy) ** 2
        return 0 < d2 <= self.params.limite_quadrado

    def valor(self, vi: int, ui: int) -> float:
        """Q pelo índice linear; -100 para pares que não são vizinhos de grade."""
        linha = self._linhas.get(vi)
        if linha is not None and ui in linha:
            return linha[ui]
        return 0.0 if self.e_par_valido(vi, ui) else SENTINELA

    def q(self, v: Location, u: Location) -> float:
        return self.valor(loc_index(v, self.params), loc_index(u, self.params))

    def linha(self, vi: int) -> Dict[int, float]:
        """Linha Q(v, ·) mutável; criada vazia (todos os vizinhos em 0) se preciso."""
        linha = self._linhas.get(vi)
        if linha is None:
            linha = self._linhas[vi] = {}
        return linha

    def definir(self, v: Location, u: Location, valor: float) -> None:
        vi, ui = loc_index(v, self.params), loc_index(u, self.params)
        if not self.e_par_valido(vi, ui):
            raise ErroDominio(f"{u} não é vizinho de grade de {v}")
        self.linha(vi)[ui] = float(valor)

    def visitas(self, v: Location, u: Location) -> int:
        """Quantas atualizações de Bellman a entrada (v, u) recebeu."""
        return self._visitas.get((loc_index(v, self.params), loc_index(u, self.params)), 0)

    def registrar_visita(self, vi: int, ui: int, n: int = 1) -> None:
        chave = (vi, ui)
        self._visitas[chave] = self._visitas.get(chave, 0) + n

    @property
    def n_entradas(self) -> int:
        """Entradas lógicas: Σ_v |N(v)|."""
        return total_pares_vizinhos(self.params)

    def entradas_nao_nulas(self) -> Iterator[Tuple[int, int, float]]:
        """(from, to, q) com q != 0, em ordem de índices."""
        for vi in sorted(self._linhas):
            linha = self._linhas[vi]
            for ui in sorted(linha):
                if linha[ui] != 0.0:
                    yield vi, ui, linha[ui]

    def copiar(self) -> "QTable":
        nova = QTable(self.params)
        nova._linhas = {vi: dict(linha) for vi, linha in self._linhas.items()}
        nova._visitas = dict(self._visitas)
        return nova

    def __eq__(self, outra) -> bool:
        if not isinstance(outra, QTable):
            return NotImplemented
        return self.params == outra.params and list(self.entradas_nao_nulas()) == list(
            outra.entradas_nao_nulas()
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"<QTable(W={self.params.width}, R={self.params.comm_range}, "
            f"nao_nulas={sum(1 for _ in self.entradas_nao_nulas())})>"
        )


def init_qtable(params: GridParams) -> QTable:
    """Tabela inicial: 0 para vizinhos de grade, -100 para o resto."""
    return QTable(params)


def reward(v: Location, u: Location, g: GraphInstance) -> float:
    """
    Recompensa r(v, u): 100 se u é o sorvedouro, 0 para os demais vizinhos.

    Raises:
    -------
    ErroDominio
        Se u não é vizinho de v no grafo (a ação nunca é selecionável).
    """
    if u not in graph_neighbors(v, g):
        raise ErroDominio(f"{u} não é vizinho de {v} no grafo")
    return RECOMPENSA_SORVEDOURO if u == g.sink else 0.0


def escolher_posicao(
    valores: Sequence[float], epsilon: float, sorteio
) -> int:
    """
    Política ε-gulosa sobre uma lista de valores Q já ordenada por índice.

    Parameters:
    -----------
    valores : Sequence[float]
        Q(v, u) de cada vizinho u, na ordem dos vizinhos.
    epsilon : float
        Probabilidade de exploração.
    sorteio : Callable[[], float]
        Fonte de uniformes em [0, 1) (rng.random).

    Returns:
    --------
    int
        Posição escolhida na lista de vizinhos.
    """
    n = len(valores)
    if sorteio() < epsilon:
        return int(sorteio() * n)
    melhor = max(valores)
    maximos = [i for i, q in enumerate(valores) if q == melhor]
    if len(maximos) == 1:
        return maximos[0]
    return maximos[int(sorteio() * len(maximos))]


def valor_bellman(
    atual: float, r: float, max_proximo: float, alpha: float, gamma: float
) -> float:
    """(1 - α)·Q + α·(r + γ·max Q(u, ·)). Única expressão usada nos dois runtimes."""
    return (1.0 - alpha) * atual + alpha * (r + gamma * max_proximo)


def select_action(
    v: Location,
    g: GraphInstance,
    q: QTable,
    epsilon: float,
    rng: np.random.Generator,
) -> Location:
    """
    Escolhe o próximo salto de v entre os vizinhos do grafo.

    Com probabilidade ε sorteia um vizinho uniforme; senão toma um argmax de
    Q(v, ·), com desempate uniforme entre os maximizadores.
    """
    vizinhos = g.vizinhos_idx.get(loc_index(v, g.params))
    if vizinhos is None:
        raise ErroDominio(f"{v} não é nó do grafo")
    if not vizinhos:
        raise ErroDominio(f"beco sem saída: {v} não tem vizinhos")
    linha = q._linhas.get(loc_index(v, g.params), {})
    valores = [linha.get(u, 0.0) for u in vizinhos]
    return g.local_de[vizinhos[escolher_posicao(valores, epsilon, rng.random)]]


def _max_linha(linha: Optional[Dict[int, float]], vizinhos: Sequence[int]) -> float:
    if not vizinhos:
        return 0.0
    if not linha:
        return 0.0
    return max(linha.get(u, 0.0) for u in vizinhos)


def bellman_update(
    q: QTable,
    v: Location,
    u: Location,
    r: float,
    g: GraphInstance,
    alpha: float,
    gamma: float,
) -> float:
    """
    Atualiza Q(v, u) pela equação de Bellman e devolve o novo valor.

    O máximo é tomado sobre os vizinhos de u no grafo (0 se não houver);
    apenas a entrada (v, u) muda.
    """
    if u not in graph_neighbors(v, g):
        raise ErroDominio(f"{u} não é vizinho de {v} no grafo")
    vi, ui = loc_index(v, g.params), loc_index(u, g.params)
    linha_v = q.linha(vi)
    max_proximo = _max_linha(q._linhas.get(ui), g.vizinhos_idx[ui])
    novo = valor_bellman(linha_v.get(ui, 0.0), r, max_proximo, alpha, gamma)
    linha_v[ui] = novo
    q.registrar_visita(vi, ui)
    return novo


@dataclass(frozen=True)
class EpisodeRecord:
    """Resultado de um episódio: passos dados e como terminou."""

    passos: int
    chegou_ao_sorvedouro: bool
    beco_sem_saida: bool = False
    truncado: bool = False


def _episodio(
    g: GraphInstance,
    q: QTable,
    h: Hyperparams,
    inicio: int,
    sorteio,
    limite: int,
) -> EpisodeRecord:
    # laço quente do treino: só índices e dicionários locais
    alpha, gamma, epsilon = h.alpha, h.gamma, h.epsilon
    vizinhos_idx = g.vizinhos_idx
    linhas = q._linhas
    visitas = q._visitas
    sink = g.sink_idx
    v = inicio
    passos = 0
    while v != sink:
        if passos >= limite:
            return EpisodeRecord(passos, False, truncado=True)
        vizinhos = vizinhos_idx[v]
        if not vizinhos:
            return EpisodeRecord(passos, False, beco_sem_saida=True)
        linha_v = linhas.get(v)
        if linha_v is None:
            linha_v = linhas[v] = {}
        valores = [linha_v.get(u, 0.0) for u in vizinhos]
        u = vizinhos[escolher_posicao(valores, epsilon, sorteio)]
        r = RECOMPENSA_SORVEDOURO if u == sink else 0.0
        max_proximo = _max_linha(linhas.get(u), vizinhos_idx[u])
        linha_v[u] = valor_bellman(linha_v.get(u, 0.0), r, max_proximo, alpha, gamma)
        chave = (v, u)
        visitas[chave] = visitas.get(chave, 0) + 1
        v = u
        passos += 1
    return EpisodeRecord(passos, True)


def run_episode(
    g: GraphInstance,
    q: QTable,
    h: Hyperparams,
    start: Location,
    rng: np.random.Generator,
) -> EpisodeRecord:
    """
    Executa um episódio a partir de start, alterando q no lugar.

    O episódio termina ao chegar no sorvedouro, num beco sem saída ou ao
    atingir o limite de passos (10·|V_m| por padrão); os dois últimos casos são
    registrados no EpisodeRecord, não levantam exceção.
    """
    if start not in g.nodes or start == g.sink:
        raise ErroDominio(f"início {start} deve ser um nó diferente do sorvedouro")
    return _episodio(
        g, q, h, loc_index(start, g.params), rng.random, h.limite_passos(g)
    )


def train(
    graphs: Sequence[GraphInstance],
    h: Hyperparams,
    rng: Union[int, np.random.Generator, np.random.SeedSequence, None],
    q: Optional[QTable] = None,
    registro: Optional[List[dict]] = None,
) -> QTable:
    """
    Fase de treino: uma única tabela Q atravessa os M grafos, K episódios cada.

    Parameters:
    -----------
    graphs : Sequence[GraphInstance]
        Grafos de treino, na ordem em que serão usados. Todos com os mesmos
        GridParams e sorvedouro.
    h : Hyperparams
        Hiperparâmetros.
    rng : int | Generator | SeedSequence
        Semente ou gerador já semeado.
    q : Optional[QTable]
        Tabela a continuar treinando; None começa de init_qtable.
    registro : Optional[List[dict]]
        Se dado, recebe uma linha de telemetria a cada 10⁴ episódios e no fim
        de cada grafo.

    Returns:
    --------
    QTable
        A tabela treinada.
    """
    if not graphs:
        raise ErroConfiguracao("a lista de grafos de treino está vazia")
    params, _ = conferir_compatibilidade(graphs, q.params if q is not None else None)
    rng = np.random.default_rng(rng)
    sorteio = rng.random
    tabela = q if q is not None else init_qtable(params)

    episodios_totais = 0
    for m, g in enumerate(graphs):
        inicios = g.nos_nao_sorvedouro()
        if not inicios:
            logger.warning("grafo %d só contém o sorvedouro; nenhum episódio", m)
            continue
        limite = h.limite_passos(g)
        passos_bloco = truncados = becos = episodios_bloco = 0

        for k in range(h.episodes_per_graph):
            inicio = inicios[int(sorteio() * len(inicios))]
            ep = _episodio(g, tabela, h, inicio, sorteio, limite)
            passos_bloco += ep.passos
            truncados += ep.truncado
            becos += ep.beco_sem_saida
            episodios_bloco += 1
            episodios_totais += 1

            fim_do_grafo = k == h.episodes_per_graph - 1
            if episodios_totais % BLOCO_TELEMETRIA == 0 or fim_do_grafo:
                media = passos_bloco / episodios_bloco
                logger.info(
                    "grafo %d/%d: %d episódios, %.2f passos/episódio, "
                    "%d truncado(s), %d beco(s)",
                    m + 1,
                    len(graphs),
                    episodios_totais,
                    media,
                    truncados,
                    becos,
                )
                if registro is not None:
                    registro.append(
                        {
                            "grafo": m,
                            "episodios": episodios_totais,
                            "passos_medios": media,
                            "truncados": truncados,
                            "becos": becos,
                        }
                    )
                passos_bloco = truncados = becos = episodios_bloco = 0

    return tabela


def greedy_policy(g: GraphInstance, q: QTable) -> Dict[Location, Location]:
    """π(v) = argmax_u Q(v, u) sobre os vizinhos do grafo; menor índice nos empates."""
    politica = {}
    for vi in g.nos_nao_sorvedouro():
        vizinhos = g.vizinhos_idx[vi]
        if not vizinhos:
            continue
        melhor = max(vizinhos, key=lambda ui: (q.valor(vi, ui), -ui))
        politica[g.local_de[vi]] = g.local_de[melhor]
    return politica


# --- arquivo da tabela Q ---------------------------------------------------


def serialize_qtable(q: QTable) -> bytes:
    """
    Cabeçalho (formato, W, R, entradas) e uma linha `from to q` por entrada
    diferente do valor inicial 0. Os valores usam repr, a menor decimal que
    relê o mesmo float.

    Pares de vizinhos de grade ausentes do arquivo valem 0 e pares que não são
    vizinhos valem a sentinela; parse_qtable reconstrói a mesma tabela.
    """
    entradas = list(q.entradas_nao_nulas())
    linhas = [
        f"formato={VERSAO_FORMATO}",
        f"W={q.params.width}",
        f"R={formatar_alcance(q.params.comm_range)}",
        f"entradas={len(entradas)}",
    ]
    linhas.extend(f"{vi} {ui} {valor!r}" for vi, ui, valor in entradas)
    return ("\n".join(linhas) + "\n").encode("utf-8")


def parse_qtable(dados: bytes) -> QTable:
    """Lê a tabela e confere que todo registro é um par de vizinhos de grade."""
    try:
        linhas = [l.strip() for l in dados.decode("utf-8").splitlines() if l.strip()]
    except UnicodeDecodeError:
        raise ErroFormato("arquivo", "não é texto UTF-8") from None

    cab = {}
    for chave, linha in zip(("formato", "W", "R", "entradas"), linhas):
        nome, sep, valor = linha.partition("=")
        if not sep or nome != chave:
            raise ErroFormato(chave, f"esperado '{chave}=...', lido {linha!r}")
        cab[chave] = valor
    if len(cab) < 4:
        raise ErroFormato("cabecalho", "incompleto")
    if cab["formato"] != str(VERSAO_FORMATO):
        raise ErroFormato("formato", f"versão {cab['formato']!r} não suportada")
    params = ler_params("W", cab["W"], cab["R"])
    try:
        n = int(cab["entradas"])
    except ValueError:
        raise ErroFormato("entradas", f"inteiro inválido {cab['entradas']!r}") from None
    registros = linhas[4:]
    if len(registros) != n:
        raise ErroFormato("entradas", f"declara {n} mas há {len(registros)} registros")

    q = QTable(params)
    for k, linha in enumerate(registros):
        partes = linha.split()
        if len(partes) != 3:
            raise ErroFormato(f"entrada[{k}]", f"esperado 'from to q', lido {linha!r}")
        try:
            vi, ui, valor = int(partes[0]), int(partes[1]), float(partes[2])
        except ValueError:
            raise ErroFormato(f"entrada[{k}]", f"valores inválidos {linha!r}") from None
        if not 0.0 <= valor <= RECOMPENSA_SORVEDOURO:
            raise ErroFormato(
                f"entrada[{k}]", f"q={valor!r} fora de [0, {RECOMPENSA_SORVEDOURO:g}]"
            )
        if not q.e_par_valido(vi, ui):
            raise ErroFormato(f"entrada[{k}]", f"({vi}, {ui}) não é par de vizinhos de grade")
        linha_q = q.linha(vi)
        if ui in linha_q:
            raise ErroFormato(f"entrada[{k}]", f"({vi}, {ui}) repetido")
        linha_q[ui] = valor
    return q


def salvar_qtable(q: QTable, caminho: Union[str, Path]) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_bytes(serialize_qtable(q))
    return caminho


def carregar_qtable(caminho: Union[str, Path]) -> QTable:
    caminho = Path(caminho)
    if not caminho.exists():
        raise ErroFormato("arquivo", f"{caminho} não encontrado")
    return parse_qtable(caminho.read_bytes())
