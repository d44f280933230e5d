from collections import Counter

import networkx as nx
import numpy as np
import pandas as pd
import pytest

from src.arvore import build_tree
from src.erros import ErroDominio
from src.geometria import GridParams, Location
from src.modelos import RoutingTree
from src.oraculo import (
    COLUNAS_RELATORIO,
    AccuracyReport,
    LinhaAcuracia,
    avaliar_arvore,
    bfs_layers,
    evaluate_corpus,
    excesso_para_frame,
    oracle_tree,
    q_star,
    report_to_frame,
    routing_accuracy,
    validate_tree,
    write_report,
)
from src.qlearning import init_qtable
from src.topologia import construir_grafo, generate_graph, to_networkx

SINK, A, B = Location(0, 0), Location(0, 1), Location(0, 2)


def test_bfs_layers_linha(grafo_linha):
    assert bfs_layers(grafo_linha) == {SINK: 0, A: 1, B: 2}


def test_bfs_layers_singleton(grade_pequena):
    g = construir_grafo(grade_pequena, SINK, [SINK])
    assert bfs_layers(g) == {SINK: 0}


def test_bfs_layers_desconexo(grade_pequena):
    g = construir_grafo(grade_pequena, SINK, [SINK, Location(9, 9)])
    with pytest.raises(ErroDominio):
        bfs_layers(g)


def test_bfs_layers_contra_caminhos_simples():
    """Mínimo exaustivo sobre todos os caminhos simples, em 100 grafos pequenos."""
    params = GridParams(8, 4)
    sink = Location(4, 4)
    rng = np.random.default_rng(123)
    for _ in range(100):
        n = int(rng.integers(1, 11))
        g = generate_graph(params, n, sink, seed=rng)
        camadas = bfs_layers(g)
        grafo = to_networkx(g)
        for v in g.nodes:
            if v == sink:
                assert camadas[v] == 0
                continue
            minimo = min(len(p) - 1 for p in nx.all_simple_paths(grafo, v, sink))
            assert camadas[v] == minimo


def test_bfs_layers_contra_floyd_warshall(grafo_40):
    distancias = nx.floyd_warshall(to_networkx(grafo_40))
    camadas = bfs_layers(grafo_40)
    for v in grafo_40.nodes:
        assert camadas[v] == distancias[v][grafo_40.sink]


def test_routing_accuracy_exemplos(grafo_linha):
    perfeita = RoutingTree(graph=grafo_linha, parent={A: SINK, B: A}, predicted_layers={A: 1, B: 2})
    assert routing_accuracy(perfeita, bfs_layers(grafo_linha)) == 1.0

    errada = RoutingTree(graph=grafo_linha, parent={A: SINK, B: A}, predicted_layers={A: 1, B: 3})
    assert routing_accuracy(errada, bfs_layers(grafo_linha)) == pytest.approx(2 / 3)

    com_falha = RoutingTree(
        graph=grafo_linha,
        parent={A: SINK},
        predicted_layers={A: 1, B: 2},
        failures=frozenset({B}),
    )
    assert routing_accuracy(com_falha, bfs_layers(grafo_linha)) == pytest.approx(2 / 3)


def test_routing_accuracy_nos_diferentes(grafo_linha, grafo_estrela):
    arvore = RoutingTree(graph=grafo_linha)
    with pytest.raises(ErroDominio):
        routing_accuracy(arvore, bfs_layers(grafo_estrela))


def test_q_star(grafo_linha):
    esperado = q_star(grafo_linha, 0.9)
    assert esperado[(A, SINK)] == 100.0
    assert esperado[(B, A)] == pytest.approx(90.0)
    assert esperado[(A, B)] == pytest.approx(81.0)
    assert esperado[(SINK, A)] == pytest.approx(90.0)
    assert len(esperado) == 4


def test_oracle_tree_e_perfeita(grafo_40):
    arvore = oracle_tree(grafo_40)
    assert routing_accuracy(arvore, bfs_layers(grafo_40)) == 1.0
    assert validate_tree(arvore, grafo_40).ok


def test_oracle_tree_pai_de_menor_indice(grafo_estrela):
    arvore = oracle_tree(grafo_estrela)
    assert arvore.parent[Location(5, 7)] == Location(5, 6)
    assert arvore.parent[Location(4, 5)] == Location(5, 5)


def test_validate_tree_detecta_violacoes(grafo_linha):
    ciclo = RoutingTree(graph=grafo_linha, parent={A: B, B: A})
    relatorio = validate_tree(ciclo, grafo_linha)
    assert relatorio.ciclos == [A, B]
    assert not relatorio.aciclica

    fora = RoutingTree(graph=grafo_linha, parent={A: SINK, B: SINK})
    relatorio = validate_tree(fora, grafo_linha)
    assert relatorio.arestas_invalidas == [(B, SINK)]
    assert relatorio.aciclica and not relatorio.ok


def test_avaliar_arvore_e_excesso(grafo_linha):
    arvore = RoutingTree(graph=grafo_linha, parent={A: SINK, B: A}, predicted_layers={A: 1, B: 4})
    linha, excesso = avaliar_arvore("g0", arvore)
    assert linha == LinhaAcuracia("g0", 3, pytest.approx(2 / 3), 0, 2)
    assert excesso == Counter({0: 1, 2: 1})


def _relatorio():
    return AccuracyReport(
        per_graph=[
            LinhaAcuracia("g0000", 100, 0.9, 2, 90),
            LinhaAcuracia("g0001", 200, 0.8, 1, 160),
            LinhaAcuracia("g0002", 100, 1.0, 0, 100),
        ]
    )


def test_accuracy_report_agregados():
    relatorio = _relatorio()
    assert relatorio.mean_accuracy == pytest.approx(0.9)
    assert relatorio.std_accuracy == pytest.approx(0.1)
    assert relatorio.pooled_accuracy == pytest.approx(350 / 400)
    assert relatorio.dead_ends == 3


def test_accuracy_report_vazio():
    relatorio = AccuracyReport()
    assert relatorio.mean_accuracy == 0.0
    assert relatorio.std_accuracy == 0.0
    assert relatorio.pooled_accuracy == 0.0


def test_report_to_frame_e_csv(tmp_path):
    relatorio = _relatorio()
    tabela = report_to_frame(relatorio)
    assert list(tabela.columns) == COLUNAS_RELATORIO
    assert list(tabela["graph_id"]) == ["g0000", "g0001", "g0002", "mean", "std", "pooled"]
    media = tabela.loc[tabela["graph_id"] == "mean"].iloc[0]
    assert media["accuracy"] == tabela["accuracy"].iloc[:3].mean()
    assert media["n_nodes"] == 400
    assert media["dead_ends"] == 3

    caminho = write_report(relatorio, tmp_path / "r" / "acuracia.csv")
    lido = pd.read_csv(caminho)
    assert lido["accuracy"].between(0, 1).all()
    assert lido.shape == (6, 4)


def test_evaluate_corpus(grafo_40):
    grafos = [grafo_40, generate_graph(grafo_40.params, 40, grafo_40.sink, seed=8)]
    relatorio = evaluate_corpus(grafos, init_qtable(grafo_40.params))
    assert [l.graph_id for l in relatorio.per_graph] == ["g0000", "g0001"]
    assert all(0.0 <= l.accuracy <= 1.0 for l in relatorio.per_graph)
    assert relatorio.mean_accuracy == pytest.approx(
        np.mean([l.accuracy for l in relatorio.per_graph])
    )
    with pytest.raises(ErroDominio):
        evaluate_corpus(grafos, init_qtable(grafo_40.params), ids=["só um"])


def test_tabela_nao_treinada_e_roteamento_geografico(grafo_40):
    """Com Q = 0 o escore é só a distância: a árvore é a do guloso geográfico."""
    q = init_qtable(grafo_40.params)
    assert build_tree(grafo_40, q).parent == build_tree(grafo_40, q, "distancia").parent


def test_excesso_para_frame():
    relatorio = AccuracyReport(excesso_saltos=Counter({0: 30, 1: 4, 2: 1}))
    tabela = excesso_para_frame(relatorio)
    assert tabela.to_dict("records") == [
        {"saltos_extras": 0, "nos": 30},
        {"saltos_extras": 1, "nos": 4},
        {"saltos_extras": 2, "nos": 1},
    ]
