"""
Script de entrada para executar a CLI halfspace-kpz
"""
import sys

from src.halfspace_kpz.cli import main

if __name__ == "__main__":
    sys.exit(main())
