import hashlib

import pytest

from src.configuracao import ExperimentConfig
from src.erros import ErroGeracao
from src.gerador import (
    carregar_conjunto,
    gerar_corpus,
    ler_manifesto,
    listar_grafos,
    pasta_corpus,
    planejar_corpus,
    semente_do_grafo,
)
from src.topologia import is_connected_to_sink


@pytest.fixture
def cfg_pequena(tmp_path):
    return ExperimentConfig(
        width=30,
        comm_range=8,
        sink_x=15,
        sink_y=15,
        nodes=(20, 30),
        graphs=3,
        test_graphs=2,
        out=str(tmp_path / "saida"),
    )


def test_gerar_corpus_arquivos_e_manifesto(cfg_pequena):
    """Gera M + T arquivos por N e um manifesto com sementes e checksums."""

    # 1. Gera
    manifesto = gerar_corpus(cfg_pequena)
    raiz = pasta_corpus(cfg_pequena)

    # 2. Confere os arquivos de cada conjunto
    assert len(listar_grafos(raiz, 20, "treino")) == 3
    assert len(listar_grafos(raiz, 20, "teste")) == 2
    assert len(listar_grafos(raiz, 30, "treino")) == 3

    # 3. Confere o manifesto contra os arquivos
    tabela = ler_manifesto(manifesto)
    assert len(tabela) == 10
    for linha in tabela.itertuples():
        dados = (raiz / linha.arquivo).read_bytes()
        assert hashlib.sha256(dados).hexdigest() == linha.sha256
        assert linha.seed == semente_do_grafo(7, linha.n_nodes, linha.conjunto, linha.indice)

    # 4. A configuração efetiva está ecoada no início
    texto = manifesto.read_text(encoding="utf-8")
    assert texto.startswith("# width=30\n")
    assert "# nodes=20,30\n" in texto


def test_grafos_do_corpus_sao_conexos(cfg_pequena):
    gerar_corpus(cfg_pequena)
    grafos = carregar_conjunto(pasta_corpus(cfg_pequena), 30, "teste")
    assert len(grafos) == 2
    for g in grafos:
        assert g.n_nodes == 30
        assert is_connected_to_sink(g)[0]


def test_mesma_semente_mesmos_checksums(cfg_pequena, tmp_path):
    from dataclasses import replace

    primeiro = ler_manifesto(gerar_corpus(cfg_pequena))
    outra = replace(cfg_pequena, out=str(tmp_path / "outra"))
    segundo = ler_manifesto(gerar_corpus(outra))
    assert list(primeiro["sha256"]) == list(segundo["sha256"])

    diferente = replace(cfg_pequena, out=str(tmp_path / "dif"), corpus_seed=8)
    terceiro = ler_manifesto(gerar_corpus(diferente))
    assert list(primeiro["sha256"]) != list(terceiro["sha256"])


def test_processos_nao_mudam_o_corpus(cfg_pequena, tmp_path):
    from dataclasses import replace

    serial = ler_manifesto(gerar_corpus(cfg_pequena))
    paralela = replace(cfg_pequena, out=str(tmp_path / "par"), workers=2)
    assert list(ler_manifesto(gerar_corpus(paralela))["sha256"]) == list(serial["sha256"])


def test_semente_depende_so_da_identidade():
    assert semente_do_grafo(7, 100, "treino", 3) == semente_do_grafo(7, 100, "treino", 3)
    sementes = {
        semente_do_grafo(7, n, c, i)
        for n in (100, 200)
        for c in ("treino", "teste")
        for i in range(5)
    }
    assert len(sementes) == 20


def test_planejar_corpus_ordem(cfg_pequena):
    tarefas = planejar_corpus(cfg_pequena)
    assert [t.arquivo for t in tarefas[:5]] == [
        "n20/treino/g0000.txt",
        "n20/treino/g0001.txt",
        "n20/treino/g0002.txt",
        "n20/teste/g0000.txt",
        "n20/teste/g0001.txt",
    ]


def test_gerar_corpus_orcamento_esgotado(tmp_path):
    """Uma rede esparsa demais nunca fica conexa: a geração desiste com ErroGeracao."""
    cfg = ExperimentConfig(
        width=100, comm_range=1, nodes=(50,), graphs=1, test_graphs=1, out=str(tmp_path)
    )
    with pytest.raises(ErroGeracao):
        gerar_corpus(cfg)
