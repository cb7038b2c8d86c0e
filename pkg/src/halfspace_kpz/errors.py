"""
Exceções do pacote halfspace_kpz
"""


class HalfspaceKPZError(Exception):
    """Erro base do pacote."""


class ParameterError(HalfspaceKPZError, ValueError):
    """Combinação de parâmetros que não define uma lei válida."""


class DomainError(HalfspaceKPZError, ValueError):
    """Argumento fora do domínio da operação."""


class RangeError(HalfspaceKPZError, ValueError, IndexError):
    """Coordenada fora da janela materializada."""


class NoPathError(HalfspaceKPZError, ValueError):
    """Não existe caminho admissível entre os pontos pedidos."""


class PaddingError(HalfspaceKPZError, ValueError):
    """A borda direita da janela contaminou um sítio observado."""


class ConfigurationError(HalfspaceKPZError, ValueError):
    """Configuração inválida (ambiente, arquivo ou observável proibido)."""


class UsageError(HalfspaceKPZError, ValueError):
    """Uso inválido da linha de comando ou de uma suíte."""


class CapacityError(HalfspaceKPZError, MemoryError):
    """Janela maior que o orçamento de memória configurado."""


class InvariantError(HalfspaceKPZError, ArithmeticError):
    """Um limite exato garantido pela construção foi violado."""
