import pytest

from src.geometria import GridParams, Location
from src.modelos import Hyperparams
from src.qlearning import train
from src.topologia import construir_grafo, generate_graph


@pytest.fixture
def grade_pequena():
    return GridParams(10, 1)


@pytest.fixture
def grafo_linha(grade_pequena):
    """Caminho sorvedouro (0,0) - a (0,1) - b (0,2) com R=1."""
    return construir_grafo(
        grade_pequena, Location(0, 0), [Location(0, 0), Location(0, 1), Location(0, 2)]
    )


@pytest.fixture
def grafo_estrela(grade_pequena):
    """Sorvedouro (5,5) com um vizinho em cada direção e um nó a dois saltos."""
    nos = [
        Location(5, 5),
        Location(4, 5),
        Location(6, 5),
        Location(5, 4),
        Location(5, 6),
        Location(5, 7),
    ]
    return construir_grafo(grade_pequena, Location(5, 5), nos)


@pytest.fixture(scope="session")
def grafo_40():
    """Grafo de 40 nós em W=30, R=8, sorvedouro no centro."""
    return generate_graph(GridParams(30, 8), 40, Location(15, 15), seed=2024)


@pytest.fixture
def hiper_rapido():
    return Hyperparams(episodes_per_graph=2_000)


@pytest.fixture(scope="session")
def tabela_convergida(grafo_40):
    """Tabela treinada até o ponto fixo no grafo de 40 nós (K = 2·10⁵)."""
    return train([grafo_40], Hyperparams(episodes_per_graph=200_000), 7)
