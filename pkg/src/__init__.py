"""Árvores de caminhos mínimos em redes de sensores com Q-learning indexado por local."""
