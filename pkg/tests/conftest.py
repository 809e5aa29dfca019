"""
Fixtures compartilhadas dos testes.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.dados.extratores.gravacoes import RecordingSample, load_dataset  # noqa: E402
from src.dados.extratores.sintetico import SynthSpec, synth_dataset  # noqa: E402
from src.modelo.arquitetura import ModelConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_minima():
    """Um bloco estreito, rápido o bastante para testes de gradiente e treino."""
    return ModelConfig(num_blocks=1, eeg_channels=64, stack_filters=[16, 16, 16, 8, 8],
                       stack_kernel=4, hidden_width=8, context_kernel=8)


@pytest.fixture
def config_dois_blocos():
    return ModelConfig(num_blocks=2, eeg_channels=64, stack_filters=[16, 16, 16, 8, 8],
                       stack_kernel=4, hidden_width=8, context_kernel=8)


@pytest.fixture
def gravacao_aleatoria(rng):
    def _criar(subject_id=1, stimulus_id="SIN001-01", T=448):
        mel = np.abs(rng.standard_normal((10, T))).astype(np.float32)
        return RecordingSample(
            eeg=rng.standard_normal((64, T)).astype(np.float32),
            mel=mel,
            envelope=mel.mean(axis=0, keepdims=True),
            subject_id=subject_id,
            stimulus_id=stimulus_id,
        )
    return _criar


@pytest.fixture
def spec_sintetico_pequeno():
    return SynthSpec(n_subjects=4, recordings_per_subject=2, T=192, snr_db=20.0, lag_taps=2, seed=3)


@pytest.fixture
def diretorio_sintetico(tmp_path, spec_sintetico_pequeno):
    diretorio = tmp_path / "dados"
    synth_dataset(spec_sintetico_pequeno, str(diretorio))
    return diretorio


@pytest.fixture
def dataset_sintetico(diretorio_sintetico):
    return load_dataset(str(diretorio_sintetico))
