"""
halfspace-kpz - Simulação e verificação de modelos KPZ em meio-espaço
"""
from .ks import ks_two_sample

__version__ = "0.0.1-alpha"

__all__ = ["ks_two_sample", "__version__"]
