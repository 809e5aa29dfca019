"""Pacote de avaliação e ensemble das predições."""
