import xml.etree.ElementTree as ET

from src.arvore import build_tree
from src.geometria import GridParams, Location
from src.oraculo import oracle_tree
from src.qlearning import init_qtable
from src.topologia import construir_grafo
from src.visualizador import (
    COR_FALHA,
    COR_SORVEDOURO,
    cor_da_camada,
    gid_do_no,
    render_svg,
    salvar_svg,
)

SVG = "{http://www.w3.org/2000/svg}"


def _grupos(texto, prefixo):
    raiz = ET.fromstring(texto.encode("utf-8"))
    return [e for e in raiz.iter(f"{SVG}g") if e.get("id", "").startswith(prefixo)]


def _texto(elemento):
    return ET.tostring(elemento, encoding="unicode")


def test_um_glifo_por_no_e_uma_linha_por_aresta(grafo_40):
    texto = render_svg(grafo_40, oracle_tree(grafo_40), "g0000")
    assert len(_grupos(texto, "no-")) == grafo_40.n_nodes
    assert len(_grupos(texto, "aresta-")) == grafo_40.n_arestas
    assert len(_grupos(texto, "arvore-")) == grafo_40.n_nodes - 1


def test_sorvedouro_em_destaque(grafo_estrela):
    texto = render_svg(grafo_estrela, oracle_tree(grafo_estrela))
    sorvedouro = _grupos(texto, "no-sorvedouro-")
    assert len(sorvedouro) == 1
    assert sorvedouro[0].get("id") == gid_do_no(grafo_estrela.sink, grafo_estrela)
    assert COR_SORVEDOURO in _texto(sorvedouro[0])


def test_falhas_em_destaque():
    params = GridParams(10, 1)
    nos = [Location(0, 0), Location(0, 1), Location(1, 1), Location(0, 2), Location(0, 3)]
    g = construir_grafo(params, Location(0, 0), nos)
    q = init_qtable(params)
    q.definir(Location(0, 2), Location(0, 3), 500.0)
    falhas = _grupos(render_svg(g, build_tree(g, q)), "no-falha-")
    assert [f.get("id") for f in falhas] == ["no-falha-0-2"]
    assert COR_FALHA in _texto(falhas[0])


def test_cor_pela_camada(grafo_linha):
    texto = render_svg(grafo_linha, oracle_tree(grafo_linha))
    (no_b,) = _grupos(texto, "no-0-2")
    assert cor_da_camada(2, 2) in _texto(no_b)


def test_singleton(grade_pequena):
    g = construir_grafo(grade_pequena, Location(3, 3), [Location(3, 3)])
    texto = render_svg(g, build_tree(g, init_qtable(grade_pequena)))
    assert len(_grupos(texto, "no-")) == 1
    assert not _grupos(texto, "aresta-")
    assert not _grupos(texto, "arvore-")


def test_titulo(grafo_linha):
    raiz = ET.fromstring(render_svg(grafo_linha, titulo="a < b & c").encode("utf-8"))
    assert raiz.find(f"{SVG}title").text == "a < b & c"


def test_mesma_entrada_mesmo_svg(grafo_estrela):
    arvore = oracle_tree(grafo_estrela)
    assert render_svg(grafo_estrela, arvore, "x") == render_svg(grafo_estrela, arvore, "x")


def test_cor_da_camada():
    assert cor_da_camada(0, 0) == cor_da_camada(0, 5)
    assert cor_da_camada(0, 5) != cor_da_camada(5, 5)
    assert cor_da_camada(3, 5).startswith("#")


def test_salvar_svg(grafo_linha, tmp_path):
    caminho = salvar_svg(grafo_linha, None, tmp_path / "fig" / "g.svg")
    assert caminho.exists()
    assert ET.parse(caminho).getroot().tag == f"{SVG}svg"
