"""Módulo do treino distribuído: um agente por nó, cada um com a sua linha
Q(v, ·), trocando apenas resumos max Q com os vizinhos por uma camada de
mensagens simulada (sem perdas e ordenada).

No modo padrão ("puxar") o agente pede o resumo do próximo salto no momento
da atualização; o resultado é idêntico, entrada a entrada, ao treino
centralizado de src/qlearning.py com a mesma semente. O modo "cache" empurra
resumos quando o máximo de uma linha muda, com atraso configurável, e serve
para medir o efeito de informação velha.
"""

import heapq
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.erros import ErroConfiguracao, ErroProtocolo
from src.geometria import Location, loc_index
from src.modelos import GraphInstance, Hyperparams
from src.qlearning import (
    RECOMPENSA_SORVEDOURO,
    QTable,
    escolher_posicao,
    init_qtable,
    valor_bellman,
)

logger = logging.getLogger(__name__)

MODOS = ("puxar", "cache")
COLUNAS_TRACE = ["step", "sender_x", "sender_y", "receiver_x", "receiver_y", "max_q"]


@dataclass(frozen=True)
class QSummaryMsg:
    """Resumo de um valor: max_u' Q(sender, u'), 0 se a linha está vazia."""

    sender: Location
    max_q: float

    def __post_init__(self):
        if not 0.0 <= self.max_q <= RECOMPENSA_SORVEDOURO:
            raise ErroProtocolo(f"max_q={self.max_q} fora de [0, 100]")


class NodeAgent:
    """
    O agente de um nó: conhece só a própria linha Q e o último resumo recebido
    de cada vizinho.

    Parameters:
    -----------
    location : Location
        O local do nó.
    vizinhos : Sequence[Location]
        Vizinhos do nó no grafo.
    q_row : Optional[Mapping[Location, float]]
        Valores iniciais de Q(v, ·); vizinhos ausentes começam em 0.
    """

    def __init__(
        self,
        location: Location,
        vizinhos: Sequence[Location],
        q_row: Optional[Mapping[Location, float]] = None,
    ):
        self.location = location
        # Location ordena como o índice linear, a mesma ordem do treino centralizado
        self.vizinhos = tuple(sorted(vizinhos))
        inicial = q_row or {}
        self.q_row: Dict[Location, float] = {u: inicial.get(u, 0.0) for u in self.vizinhos}
        self.neighbor_max_cache: Dict[Location, float] = {}
        self.resumos_recebidos = 0
        self.resumos_servidos = 0
        self.visitas: Counter = Counter()

    def resumo(self) -> QSummaryMsg:
        self.resumos_servidos += 1
        return QSummaryMsg(self.location, max(self.q_row.values(), default=0.0))

    def escolher(self, epsilon: float, sorteio) -> Location:
        valores = [self.q_row[u] for u in self.vizinhos]
        return self.vizinhos[escolher_posicao(valores, epsilon, sorteio)]

    def receber(self, msg: QSummaryMsg) -> None:
        if msg.sender not in self.q_row:
            raise ErroProtocolo(f"{self.location} recebeu resumo de não vizinho {msg.sender}")
        self.neighbor_max_cache[msg.sender] = msg.max_q

    def __repr__(self) -> str:
        return f"<NodeAgent({self.location}, vizinhos={len(self.vizinhos)})>"


def agent_update(
    agent: NodeAgent,
    u: Location,
    r: float,
    summary_from_u: QSummaryMsg,
    alpha: float,
    gamma: float,
) -> float:
    """
    Atualização de Bellman local: o máximo de Q(u, ·) vem do resumo de u.

    Raises:
    -------
    ErroProtocolo
        Se o resumo não foi enviado por u ou se u não é vizinho do agente.
    """
    if summary_from_u.sender != u:
        raise ErroProtocolo(
            f"resumo de {summary_from_u.sender} usado para atualizar Q({agent.location}, {u})"
        )
    if u not in agent.q_row:
        raise ErroProtocolo(f"{u} não é vizinho de {agent.location}")
    novo = valor_bellman(agent.q_row[u], r, summary_from_u.max_q, alpha, gamma)
    agent.q_row[u] = novo
    agent.resumos_recebidos += 1
    agent.visitas[u] += 1
    return novo


class CamadaMensagens:
    """
    Camada de mensagens ideal: entrega tudo, na ordem, e só entre vizinhos.

    Os agentes nunca se referenciam entre si; todo dado não local passa por aqui.
    """

    def __init__(self, g: GraphInstance, agentes: Dict[Location, NodeAgent], rastrear: bool):
        self.g = g
        self._agentes = agentes
        self.rastrear = rastrear
        self.mensagens = 0
        self.passo = 0
        self.trace: List[tuple] = []
        self._pendentes: list = []
        self._sequencia = 0

    def _contar(self, msg: QSummaryMsg, destino: Location) -> None:
        if destino not in self.g.adjacency[msg.sender]:
            raise ErroProtocolo(f"mensagem {msg.sender} -> {destino} fora de uma aresta")
        self.mensagens += 1
        if self.rastrear:
            self.trace.append(
                (self.passo, msg.sender.x, msg.sender.y, destino.x, destino.y, msg.max_q)
            )

    def solicitar_resumo(self, solicitante: Location, alvo: Location) -> QSummaryMsg:
        """Pedido/resposta: só a resposta (o resumo) conta como mensagem."""
        if alvo not in self.g.adjacency.get(solicitante, ()):
            raise ErroProtocolo(f"{solicitante} pediu resumo a não vizinho {alvo}")
        msg = self._agentes[alvo].resumo()
        self._contar(msg, solicitante)
        return msg

    def publicar(self, remetente: Location, entrega_em: Sequence[int]) -> None:
        """Empurra o resumo do remetente a cada vizinho, com o instante de entrega."""
        agente = self._agentes[remetente]
        msg = agente.resumo()
        for destino, quando in zip(agente.vizinhos, entrega_em):
            self._contar(msg, destino)
            heapq.heappush(self._pendentes, (quando, self._sequencia, destino, msg))
            self._sequencia += 1

    def entregar_ate(self, agora: int) -> None:
        while self._pendentes and self._pendentes[0][0] <= agora:
            _, _, destino, msg = heapq.heappop(self._pendentes)
            self._agentes[destino].receber(msg)


@dataclass
class ResultadoDistribuido:
    """Tabela montada a partir das linhas dos agentes e a contabilidade de mensagens."""

    qtable: QTable
    mensagens: int
    atualizacoes: int
    resumos_servidos: int
    trace: List[tuple] = field(default_factory=list)

    @property
    def mensagens_por_atualizacao(self) -> float:
        return self.mensagens / self.atualizacoes if self.atualizacoes else 0.0


@dataclass(eq=False)
class _Caminhante:
    no: Location
    passos: int = 0


def run_distributed(
    g: GraphInstance,
    h: Hyperparams,
    seed: Union[int, np.random.Generator, np.random.SeedSequence, None],
    modo: str = "puxar",
    atraso: int = 0,
    embaralhar: bool = False,
    caminhantes: int = 1,
    q_inicial: Optional[QTable] = None,
    rastrear: bool = False,
    semente_entregas: int = 0,
) -> ResultadoDistribuido:
    """
    Treina um grafo com um agente por nó.

    Parameters:
    -----------
    g : GraphInstance
        Grafo de treino (conexo).
    h : Hyperparams
        Hiperparâmetros; o cronograma de episódios é o mesmo de qlearning.train.
    seed : int | Generator | SeedSequence
        Semente ou gerador. Passar o mesmo Generator grafo após grafo reproduz
        train() sobre uma lista de grafos.
    modo : str
        "puxar" (padrão) ou "cache".
    atraso : int
        No modo "cache", passos lógicos até um resumo empurrado ser entregue.
    embaralhar : bool
        No modo "cache", sorteia o atraso de cada entrega em [0, atraso] com um
        gerador próprio, permitindo entregas fora de ordem.
    caminhantes : int
        Episódios simultâneos, avançando um passo cada por rodada. 1 reproduz
        o treino centralizado.
    q_inicial : Optional[QTable]
        Tabela de partida; não é alterada.
    rastrear : bool
        Guarda cada mensagem (step, remetente, destinatário, max_q).
    semente_entregas : int
        Semente do gerador de atrasos de embaralhar; não consome sorteios do
        gerador principal.

    Returns:
    --------
    ResultadoDistribuido
        A tabela montada e as contagens de mensagens e atualizações.
    """
    if modo not in MODOS:
        raise ErroConfiguracao(f"modo desconhecido {modo!r}; use um de {MODOS}")
    if caminhantes < 1 or atraso < 0:
        raise ErroConfiguracao("caminhantes deve ser >= 1 e atraso >= 0")
    params = g.params
    if q_inicial is not None and q_inicial.params != params:
        raise ErroConfiguracao("a tabela inicial usa outra grade")
    base = q_inicial.copiar() if q_inicial is not None else init_qtable(params)

    rng = np.random.default_rng(seed)
    sorteio = rng.random
    rng_entregas = np.random.default_rng(semente_entregas) if embaralhar else None

    agentes: Dict[Location, NodeAgent] = {}
    for v in sorted(g.nodes):
        vi = loc_index(v, params)
        linha = {g.local_de[ui]: base.valor(vi, ui) for ui in g.vizinhos_idx[vi]}
        agentes[v] = NodeAgent(v, g.adjacency[v], linha)
    camada = CamadaMensagens(g, agentes, rastrear)

    def instantes(remetente: Location) -> List[int]:
        n = len(agentes[remetente].vizinhos)
        if rng_entregas is None:
            return [camada.passo + atraso] * n
        return [camada.passo + int(d) for d in rng_entregas.integers(0, atraso + 1, size=n)]

    if modo == "cache":
        for v in agentes:
            camada.publicar(v, [0] * len(agentes[v].vizinhos))
        camada.entregar_ate(0)

    inicios = [g.local_de[i] for i in g.nos_nao_sorvedouro()]
    limite = h.limite_passos(g)
    alpha, gamma, epsilon = h.alpha, h.gamma, h.epsilon
    atualizacoes = 0
    iniciados = 0
    ativos: List[_Caminhante] = []

    while inicios:
        while len(ativos) < caminhantes and iniciados < h.episodes_per_graph:
            ativos.append(_Caminhante(inicios[int(sorteio() * len(inicios))]))
            iniciados += 1
        if not ativos:
            break
        for caminhante in list(ativos):
            camada.passo += 1
            camada.entregar_ate(camada.passo)
            v = caminhante.no
            agente = agentes[v]
            if caminhante.passos >= limite or not agente.vizinhos:
                ativos.remove(caminhante)
                continue
            u = agente.escolher(epsilon, sorteio)
            r = RECOMPENSA_SORVEDOURO if u == g.sink else 0.0
            if modo == "puxar":
                resumo = camada.solicitar_resumo(v, u)
            else:
                resumo = QSummaryMsg(u, agente.neighbor_max_cache.get(u, 0.0))
            maximo_antes = max(agente.q_row.values())
            agent_update(agente, u, r, resumo, alpha, gamma)
            atualizacoes += 1
            if modo == "cache" and max(agente.q_row.values()) != maximo_antes:
                camada.publicar(v, instantes(v))
            caminhante.no = u
            caminhante.passos += 1
            if u == g.sink:
                ativos.remove(caminhante)

    tabela = base
    for v, agente in agentes.items():
        vi = loc_index(v, params)
        linha = tabela.linha(vi)
        for u, valor in agente.q_row.items():
            linha[loc_index(u, params)] = valor
        for u, n in agente.visitas.items():
            tabela.registrar_visita(vi, loc_index(u, params), n)

    logger.info(
        "treino distribuído (%s): %d atualizações, %d mensagens, %d episódios",
        modo,
        atualizacoes,
        camada.mensagens,
        iniciados,
    )
    return ResultadoDistribuido(
        qtable=tabela,
        mensagens=camada.mensagens,
        atualizacoes=atualizacoes,
        resumos_servidos=sum(a.resumos_servidos for a in agentes.values()),
        trace=camada.trace,
    )


def trace_para_frame(resultado: ResultadoDistribuido) -> pd.DataFrame:
    return pd.DataFrame(resultado.trace, columns=COLUNAS_TRACE)


def salvar_trace(resultado: ResultadoDistribuido, caminho: Union[str, Path]) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    trace_para_frame(resultado).to_csv(caminho, index=False)
    return caminho
