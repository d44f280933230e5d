import math

import pytest

from src.erros import ErroConfiguracao, ErroDominio
from src.geometria import (
    GridParams,
    Location,
    deslocamentos,
    euclid_dist,
    graph_neighbors,
    grid_neighbors,
    loc_from_index,
    loc_index,
    total_pares_vizinhos,
)
from src.topologia import construir_grafo

GRADE_100 = GridParams(100, 1)


@pytest.mark.parametrize(
    "local, esperado",
    [(Location(0, 0), 0), (Location(50, 50), 5050), (Location(99, 99), 9999)],
)
def test_loc_index_exemplos(local, esperado):
    assert loc_index(local, GRADE_100) == esperado
    assert loc_from_index(esperado, GRADE_100) == local


@pytest.mark.parametrize("local", [Location(100, 0), Location(0, -1), Location(-3, 5)])
def test_loc_index_fora_da_grade(local):
    with pytest.raises(ErroDominio):
        loc_index(local, GRADE_100)


def test_loc_index_bijetivo_e_monotono():
    params = GridParams(7, 2)
    locais = sorted(Location(x, y) for x in range(7) for y in range(7))
    indices = [loc_index(v, params) for v in locais]
    assert indices == list(range(49))


@pytest.mark.parametrize(
    "a, b, d",
    [
        (Location(0, 0), Location(0, 0), 0.0),
        (Location(0, 0), Location(3, 4), 5.0),
        (Location(10, 10), Location(10, 30), 20.0),
    ],
)
def test_euclid_dist(a, b, d):
    assert euclid_dist(a, b) == d
    assert euclid_dist(b, a) == d


def test_grid_neighbors_canto_e_centro():
    assert grid_neighbors(Location(0, 0), GRADE_100) == {Location(0, 1), Location(1, 0)}
    assert grid_neighbors(Location(50, 50), GRADE_100) == {
        Location(49, 50),
        Location(51, 50),
        Location(50, 49),
        Location(50, 51),
    }


def test_grid_neighbors_alcance_menor_que_um():
    assert grid_neighbors(Location(3, 3), GridParams(10, 0.5)) == frozenset()


def test_grid_neighbors_diagonal_raiz_de_dois():
    params = GridParams(10, math.sqrt(2))
    assert len(grid_neighbors(Location(5, 5), params)) == 8


def test_grid_neighbors_confere_com_forca_bruta():
    """Para R=20 num ponto interior a contagem é a do círculo de Gauss menos 1."""
    params = GridParams(100, 20)
    v = Location(50, 50)
    bruta = {
        Location(x, y)
        for x in range(100)
        for y in range(100)
        if (x, y) != (50, 50) and (x - 50) ** 2 + (y - 50) ** 2 <= 400
    }
    assert grid_neighbors(v, params) == bruta
    assert len(bruta) == 1256


def test_grid_neighbors_simetria_e_bordas():
    params = GridParams(12, 2.5)
    for x in range(12):
        for y in range(12):
            v = Location(x, y)
            for u in grid_neighbors(v, params):
                assert v in grid_neighbors(u, params)
                assert 0 <= u.x < 12 and 0 <= u.y < 12


def test_alcance_exato_na_fronteira():
    # 3-4-5: distância exatamente R entra na vizinhança
    params = GridParams(10, 5)
    assert Location(3, 4) in grid_neighbors(Location(0, 0), params)
    assert Location(4, 4) not in grid_neighbors(Location(0, 0), params)


def test_total_pares_vizinhos():
    params = GridParams(6, 2)
    esperado = sum(
        len(grid_neighbors(Location(x, y), params)) for x in range(6) for y in range(6)
    )
    assert total_pares_vizinhos(params) == esperado


def test_deslocamentos_ordenados():
    desl = deslocamentos(GridParams(10, 2))
    assert list(desl) == sorted(desl)
    assert len(desl) == 12


@pytest.mark.parametrize(
    "w, r",
    [(1, 1), (10, 0), (10, -2), (10, 15), (10, 14.15), (10, math.inf), (10, math.nan)],
)
def test_grid_params_invalidos(w, r):
    with pytest.raises(ErroConfiguracao):
        GridParams(w, r)


def test_grid_params_w_nao_inteiro():
    with pytest.raises(ErroConfiguracao):
        GridParams(10.0, 2)


def test_graph_neighbors():
    params = GridParams(10, 2)
    g = construir_grafo(
        params, Location(0, 0), [Location(0, 0), Location(0, 1), Location(5, 5)]
    )
    assert graph_neighbors(Location(0, 0), g) == {Location(0, 1)}
    assert graph_neighbors(Location(5, 5), g) == frozenset()
    assert graph_neighbors(Location(0, 0), g) <= grid_neighbors(Location(0, 0), params)
    with pytest.raises(ErroDominio):
        graph_neighbors(Location(9, 9), g)
