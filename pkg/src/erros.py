"""Módulo que contém as exceções do pacote.

As funções da biblioteca sempre levantam uma destas exceções; apenas a
linha de comando (src/cli.py) as captura e converte em códigos de saída.
"""


class ErroQSPT(Exception):
    """Base de todas as exceções do pacote."""


class ErroDominio(ErroQSPT, ValueError):
    """Pré-condição violada (coordenada fora da grade, par não vizinho, etc.)."""


class ErroConfiguracao(ErroQSPT, ValueError):
    """Parâmetros inválidos ou incompatíveis entre si."""


class ErroGeracao(ErroQSPT):
    """
    A geração de um grafo conexo não foi possível dentro do orçamento.

    Parameters:
    -----------
    tentativas : int
        Quantos grafos foram sorteados antes de desistir.
    """

    def __init__(self, mensagem: str, tentativas: int):
        super().__init__(mensagem)
        self.tentativas = tentativas

    def __reduce__(self):
        return type(self), (str(self), self.tentativas)


class ErroFormato(ErroQSPT, ValueError):
    """
    Arquivo malformado ou que viola algum invariante ao ser lido.

    Parameters:
    -----------
    campo : str
        Nome do campo (ou seção) que causou a rejeição.
    """

    def __init__(self, campo: str, mensagem: str):
        super().__init__(f"{campo}: {mensagem}")
        self.campo = campo
        self.mensagem = mensagem

    def __reduce__(self):
        return type(self), (self.campo, self.mensagem)


class ErroProtocolo(ErroQSPT):
    """Violação do protocolo de troca de resumos entre agentes."""
