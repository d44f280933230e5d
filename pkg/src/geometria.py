"""Módulo com a geometria da grade W x W: locais, distâncias e vizinhanças.

Um nó da rede é identificado pelo seu local na grade; por isso tudo o que é
indexado por nó (tabela Q, árvores, camadas) é indexado por local.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, FrozenSet, Tuple

from src.erros import ErroConfiguracao, ErroDominio

if TYPE_CHECKING:
    from src.modelos import GraphInstance


@dataclass(frozen=True)
class GridParams:
    """
    Parâmetros da área de implantação.

    Parameters:
    -----------
    width : int
        Lado W da grade (em unidades de grade).
    comm_range : float
        Alcance de comunicação R, na mesma unidade.
    """

    width: int
    comm_range: float

    def __post_init__(self):
        if isinstance(self.width, bool) or not isinstance(self.width, int):
            raise ErroConfiguracao(f"W deve ser inteiro, recebido {self.width!r}")
        if self.width < 2:
            raise ErroConfiguracao(f"W deve ser >= 2, recebido {self.width}")
        if not self.comm_range > 0:
            raise ErroConfiguracao(f"R deve ser > 0, recebido {self.comm_range}")
        if not math.isfinite(self.comm_range):
            raise ErroConfiguracao(f"R deve ser finito, recebido {self.comm_range}")
        # R < W·√2, comparado sem raiz: R² < 2W²
        if self.alcance_exato**2 >= 2 * self.width**2:
            raise ErroConfiguracao(
                f"R={self.comm_range} cobre a diagonal da grade {self.width}x{self.width}"
            )

    @cached_property
    def alcance_exato(self) -> Fraction:
        # Fraction(str(...)) lê 141.4 como 1414/10 e não como o binário mais próximo
        return Fraction(str(self.comm_range))

    @cached_property
    def limite_quadrado(self) -> int:
        """⌊R²⌋: dois locais são vizinhos se dx² + dy² <= este valor."""
        return math.floor(self.alcance_exato**2)

    @property
    def n_locais(self) -> int:
        return self.width * self.width


@dataclass(frozen=True, order=True)
class Location:
    """Coordenada inteira (x, y) da grade. A ordem natural coincide com loc_index."""

    x: int
    y: int

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def validar_local(v: Location, params: GridParams) -> None:
    """Levanta ErroDominio se v estiver fora de [0, W) x [0, W)."""
    if not (0 <= v.x < params.width and 0 <= v.y < params.width):
        raise ErroDominio(f"local {v} fora da grade {params.width}x{params.width}")


def loc_index(v: Location, params: GridParams) -> int:
    """
    Índice linear do local: x·W + y.

    Parameters:
    -----------
    v : Location
        Local válido para params.
    params : GridParams
        Parâmetros da grade.

    Returns:
    --------
    int
        Índice em [0, W²).
    """
    validar_local(v, params)
    return v.x * params.width + v.y


def loc_from_index(indice: int, params: GridParams) -> Location:
    """Inversa de loc_index."""
    if not 0 <= indice < params.n_locais:
        raise ErroDominio(f"índice {indice} fora de [0, {params.n_locais})")
    x, y = divmod(indice, params.width)
    return Location(x, y)


def euclid_dist(a: Location, b: Location) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def dist_quadrada(a: Location, b: Location) -> int:
    return (a.x - b.x) ** 2 + (a.y - b.y) ** 2


def dentro_do_alcance(a: Location, b: Location, params: GridParams) -> bool:
    """Predicado de enlace em aritmética inteira; um local não é vizinho de si mesmo."""
    d2 = dist_quadrada(a, b)
    return 0 < d2 <= params.limite_quadrado


@lru_cache(maxsize=32)
def deslocamentos(params: GridParams) -> Tuple[Tuple[int, int], ...]:
    """
    Todos os (dx, dy) != (0, 0) com dx² + dy² <= ⌊R²⌋, em ordem lexicográfica.

    Somar um deslocamento a um local e descartar o que sai da grade dá os
    vizinhos de grade já ordenados por índice linear.
    """
    lim = params.limite_quadrado
    raio = math.isqrt(lim)
    return tuple(
        (dx, dy)
        for dx in range(-raio, raio + 1)
        for dy in range(-raio, raio + 1)
        if 0 < dx * dx + dy * dy <= lim
    )


def grid_neighbors(v: Location, params: GridParams) -> FrozenSet[Location]:
    """
    Vizinhos de grade N(v): todo local da grade a distância <= R, exceto v.

    Nas bordas a vizinhança é simplesmente recortada pela grade.
    """
    validar_local(v, params)
    w = params.width
    return frozenset(
        Location(v.x + dx, v.y + dy)
        for dx, dy in deslocamentos(params)
        if 0 <= v.x + dx < w and 0 <= v.y + dy < w
    )


def total_pares_vizinhos(params: GridParams) -> int:
    """Σ_v |N(v)| sobre a grade inteira, sem enumerar os W² locais."""
    w = params.width
    return sum(
        max(0, w - abs(dx)) * max(0, w - abs(dy)) for dx, dy in deslocamentos(params)
    )


def graph_neighbors(v: Location, g: "GraphInstance") -> FrozenSet[Location]:
    """
    Vizinhos específicos do grafo: N(v) ∩ V, isto é, a lista de adjacência de v em g.

    Parameters:
    -----------
    v : Location
        Um nó de g.
    g : GraphInstance
        A instância de rede.

    Returns:
    --------
    FrozenSet[Location]
        Os nós de g ao alcance de v.
    """
    try:
        return g.adjacency[v]
    except KeyError:
        raise ErroDominio(f"local {v} não é nó do grafo") from None
