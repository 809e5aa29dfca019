"""
Módulo de fontes de gravações (disco e sintéticas)
"""
