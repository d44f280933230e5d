import pytest

from src.cli import SAIDA_FORMATO, SAIDA_GERACAO, SAIDA_OK, SAIDA_USO, lista_de_inteiros, main


@pytest.fixture
def config(tmp_path):
    arquivo = tmp_path / "pequeno.cfg"
    arquivo.write_text(
        "width=30\ncomm_range=8\nsink_x=15\nsink_y=15\n"
        "nodes=20\ngraphs=2\ntest_graphs=2\nepisodes=300\n",
        encoding="utf-8",
    )
    return arquivo


def _comando(config, tmp_path, *args):
    return [*args, "--config", str(config), "--out", str(tmp_path / "saida")]


def test_fluxo_completo(config, tmp_path, capsys):
    assert main(_comando(config, tmp_path, "gen")) == SAIDA_OK
    assert main(_comando(config, tmp_path, "train")) == SAIDA_OK
    arvores = str(tmp_path / "arvores")
    assert main(_comando(config, tmp_path, "test", "--trees", arvores)) == SAIDA_OK
    assert main(_comando(config, tmp_path, "report")) == SAIDA_OK

    saida = capsys.readouterr().out
    assert "✅ corpus gerado" in saida
    assert "✅ tabela N=20" in saida
    assert (tmp_path / "saida" / "qtables" / "q_n20.txt").exists()
    assert (tmp_path / "saida" / "resultados" / "acuracia_q_n20_n20.csv").exists()
    assert len(list((tmp_path / "arvores" / "n20").glob("g*.txt"))) == 2

    grafo = tmp_path / "saida" / "corpus" / "n20" / "teste" / "g0000.txt"
    arvore = tmp_path / "arvores" / "n20" / "g0000.txt"
    svg = tmp_path / "fig.svg"
    assert main(["render", str(grafo), "--tree", str(arvore), "--svg", str(svg), "--oracle"]) == 0
    assert svg.exists()
    assert (tmp_path / "fig_oraculo.svg").exists()


def test_flags_sobrescrevem_o_arquivo(config, tmp_path):
    assert main(_comando(config, tmp_path, "gen", "--graphs", "1", "--test-graphs", "1")) == 0
    treino = tmp_path / "saida" / "corpus" / "n20" / "treino"
    assert [p.name for p in treino.glob("g*.txt")] == ["g0000.txt"]


def test_treino_distribuido(config, tmp_path):
    main(_comando(config, tmp_path, "gen"))
    assert main(_comando(config, tmp_path, "train", "--distributed")) == SAIDA_OK
    log = (tmp_path / "saida" / "qtables" / "treino_n20.log").read_text(encoding="utf-8")
    assert "distribuido_igual_ao_centralizado=True" in log


def test_stale_cache_exige_distributed(config, tmp_path, capsys):
    main(_comando(config, tmp_path, "gen"))
    assert main(_comando(config, tmp_path, "train", "--stale-cache", "3")) == SAIDA_USO
    assert "--distributed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["voar"],
        ["gen", "--graphs", "muitos"],
        ["test", "--mode", "aleatorio"],
        ["train", "--nodes", "a,b"],
    ],
)
def test_erro_de_uso_sai_com_1(argv):
    with pytest.raises(SystemExit) as saida:
        main(argv)
    assert saida.value.code == SAIDA_USO


def test_configuracao_invalida(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path), "--width", "0"]) == SAIDA_USO
    assert "❌" in capsys.readouterr().err


@pytest.mark.parametrize("comando", ["gen", "train"])
def test_semente_negativa(comando, tmp_path, capsys):
    assert main([comando, "--out", str(tmp_path), "--seed", "-1"]) == SAIDA_USO
    assert "train_seed" in capsys.readouterr().err


def test_teste_sem_corpus(config, tmp_path):
    assert main(_comando(config, tmp_path, "test")) == SAIDA_USO


def test_geracao_impossivel(tmp_path, capsys):
    argv = ["gen", "--out", str(tmp_path), "--width", "100", "--range", "1"]
    argv += ["--nodes", "50", "--graphs", "1", "--test-graphs", "1"]
    assert main(argv) == SAIDA_GERACAO
    assert "tentativa" in capsys.readouterr().err


def test_arquivo_corrompido(tmp_path, capsys):
    ruim = tmp_path / "g.txt"
    ruim.write_text("W=30\nR=oito\n", encoding="utf-8")
    assert main(["render", str(ruim)]) == SAIDA_FORMATO
    assert "❌ arquivo inválido" in capsys.readouterr().err


def test_lista_de_inteiros():
    assert lista_de_inteiros("100,200, 300") == [100, 200, 300]
