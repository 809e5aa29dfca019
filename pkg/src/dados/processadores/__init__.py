"""
Módulo de janelamento e particionamento em folds
"""
