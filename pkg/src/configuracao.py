"""Módulo com a configuração de um experimento: valores padrão, leitura do
arquivo key=value, sobrescrita pelos argumentos da linha de comando e o eco
da configuração efetiva nos manifestos."""

import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.erros import ErroConfiguracao, ErroDominio
from src.geometria import GridParams, Location, validar_local
from src.modelos import Hyperparams
from src.topologia import formatar_alcance

logger = logging.getLogger(__name__)

# acima disto o custo sai da escala de uma estação de trabalho
ESCALA_COMPLETA = {"graphs": 5000, "episodes": 500_000, "test_graphs": 100}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parâmetros de um experimento completo (gen, train, test).

    Parameters:
    -----------
    width, comm_range : int, float
        A grade W×W e o alcance R.
    sink_x, sink_y : int
        Local do sorvedouro.
    nodes : Tuple[int, ...]
        Tamanhos de rede N gerados e avaliados.
    graphs, test_graphs : int
        M grafos de treino e T grafos de teste por tamanho.
    episodes : int
        K episódios por grafo de treino.
    alpha, gamma, epsilon : float
        Hiperparâmetros do Q-learning.
    corpus_seed, train_seed : int
        Sementes da geração dos grafos e do treino.
    workers : int
        Processos usados na geração e no teste.
    out : str
        Pasta de saída.
    """

    width: int = 100
    comm_range: float = 20.0
    sink_x: int = 50
    sink_y: int = 50
    nodes: Tuple[int, ...] = (100, 200, 300)
    graphs: int = 50
    test_graphs: int = 20
    episodes: int = 20_000
    alpha: float = 0.9
    gamma: float = 0.9
    epsilon: float = 0.5
    corpus_seed: int = 7
    train_seed: int = 11
    workers: int = 1
    out: str = "saida"
    max_steps: Optional[int] = None

    def __post_init__(self):
        self.validar()

    @property
    def grid(self) -> GridParams:
        return GridParams(self.width, self.comm_range)

    @property
    def sink(self) -> Location:
        return Location(self.sink_x, self.sink_y)

    @property
    def hiperparametros(self) -> Hyperparams:
        return Hyperparams(
            alpha=self.alpha,
            gamma=self.gamma,
            epsilon=self.epsilon,
            episodes_per_graph=self.episodes,
            max_steps_per_episode=self.max_steps,
        )

    @property
    def pasta_saida(self) -> Path:
        return Path(self.out)

    def validar(self) -> None:
        """
        Confere os invariantes; avisa (sem falhar) quando a escala é a completa.

        Raises:
        -------
        ErroConfiguracao
            Contagens não positivas, sementes negativas, N acima de W², sorvedouro
            fora da grade ou hiperparâmetros inválidos.
        """
        grade = self.grid
        try:
            validar_local(self.sink, grade)
        except ErroDominio as erro:
            raise ErroConfiguracao(f"sink: {erro}") from None
        if not self.nodes:
            raise ErroConfiguracao("nodes: informe ao menos um tamanho de rede")
        for n in self.nodes:
            if n < 1:
                raise ErroConfiguracao(f"nodes: {n} não é positivo")
            if n > grade.n_locais:
                raise ErroConfiguracao(f"nodes: {n} excede W² = {grade.n_locais}")
        if self.graphs < 1 or self.test_graphs < 1:
            raise ErroConfiguracao("graphs e test_graphs devem ser positivos")
        if self.workers < 1:
            raise ErroConfiguracao("workers deve ser positivo")
        if self.corpus_seed < 0 or self.train_seed < 0:
            raise ErroConfiguracao("corpus_seed e train_seed não podem ser negativas")
        self.hiperparametros  # valida α, γ, ε e K

        if (
            self.graphs >= ESCALA_COMPLETA["graphs"]
            or self.episodes >= ESCALA_COMPLETA["episodes"]
            or self.test_graphs >= ESCALA_COMPLETA["test_graphs"]
        ):
            logger.warning(
                "escala completa (M=%d, K=%d, T=%d): a execução pode levar dias",
                self.graphs,
                self.episodes,
                self.test_graphs,
            )

    def como_texto(self) -> str:
        """A configuração efetiva como linhas key=value, na ordem dos campos."""
        linhas = []
        for campo in fields(self):
            valor = getattr(self, campo.name)
            if campo.name == "nodes":
                texto = ",".join(str(n) for n in valor)
            elif campo.name == "comm_range":
                texto = formatar_alcance(valor)
            elif valor is None:
                texto = ""
            else:
                texto = repr(valor) if isinstance(valor, float) else str(valor)
            linhas.append(f"{campo.name}={texto}")
        return "\n".join(linhas) + "\n"


_CONVERSORES = {
    "width": int,
    "comm_range": float,
    "sink_x": int,
    "sink_y": int,
    "nodes": lambda s: tuple(int(p) for p in s.split(",") if p.strip()),
    "graphs": int,
    "test_graphs": int,
    "episodes": int,
    "alpha": float,
    "gamma": float,
    "epsilon": float,
    "corpus_seed": int,
    "train_seed": int,
    "workers": int,
    "out": str,
    "max_steps": lambda s: int(s) if s.strip() else None,
}


def _converter(chave: str, texto: str) -> Any:
    if chave not in _CONVERSORES:
        raise ErroConfiguracao(f"chave desconhecida: {chave!r}")
    try:
        return _CONVERSORES[chave](texto.strip())
    except ValueError:
        raise ErroConfiguracao(f"{chave}: valor inválido {texto.strip()!r}") from None


def ler_config(texto: str) -> Dict[str, Any]:
    """Lê linhas key=value; # inicia comentário e linhas em branco são ignoradas."""
    valores = {}
    for numero, linha in enumerate(texto.splitlines(), start=1):
        linha = linha.split("#", 1)[0].strip()
        if not linha:
            continue
        if "=" not in linha:
            raise ErroConfiguracao(f"linha {numero}: esperado key=value")
        chave, valor = linha.split("=", 1)
        valores[chave.strip()] = _converter(chave.strip(), valor)
    return valores


def carregar_config(caminho: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """
    Monta a configuração a partir dos padrões e, se dado, de um arquivo.

    Parameters:
    -----------
    caminho : Optional[str | Path]
        Arquivo key=value; None devolve os padrões.

    Returns:
    --------
    ExperimentConfig
        A configuração validada.
    """
    if caminho is None:
        return ExperimentConfig()
    caminho = Path(caminho)
    if not caminho.exists():
        raise ErroConfiguracao(f"arquivo de configuração não encontrado: {caminho}")
    return ExperimentConfig(**ler_config(caminho.read_text(encoding="utf-8")))


# argumento da CLI -> campo da configuração
_FLAGS = {
    "seed": "corpus_seed",
    "train_seed": "train_seed",
    "nodes": "nodes",
    "graphs": "graphs",
    "test_graphs": "test_graphs",
    "episodes": "episodes",
    "alpha": "alpha",
    "gamma": "gamma",
    "epsilon": "epsilon",
    "out": "out",
    "workers": "workers",
    "width": "width",
    "comm_range": "comm_range",
}


def aplicar_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    """Todo argumento informado (diferente de None) sobrescreve o valor do arquivo."""
    mudancas = {}
    for flag, campo in _FLAGS.items():
        valor = getattr(args, flag, None)
        if valor is None:
            continue
        mudancas[campo] = tuple(valor) if campo == "nodes" else valor
    if not mudancas:
        return cfg
    logger.debug("sobrescritas da linha de comando: %s", mudancas)
    return replace(cfg, **mudancas)
