"""
Módulo de dados do decodificador ConvConcatNet
"""
