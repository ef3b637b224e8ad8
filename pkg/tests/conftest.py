"""Shared fixtures: a tiny dataset, tokenizer and trained model."""
import pytest

from src.config import DataConfig, TrainConfig, settings
from src.data.generate import generate
from src.data.split import split_forget
from src.model.network import Model
from src.model.tokenizer import Tokenizer
from src.model.train import train_original

settings.progress = False


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale end-to-end runs (deselect with -m 'not slow')")


@pytest.fixture(scope="session")
def tiny_data_config():
    return DataConfig(n_patients=40, vocab_size=60, seed=11)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_data_config):
    """(train, test, profiles) for 40 patients."""
    return generate(tiny_data_config)


@pytest.fixture(scope="session")
def tiny_train(tiny_dataset):
    return tiny_dataset[0]


@pytest.fixture(scope="session")
def tiny_test(tiny_dataset):
    return tiny_dataset[1]


@pytest.fixture(scope="session")
def tiny_tokenizer(tiny_train):
    return Tokenizer.from_samples(tiny_train)


@pytest.fixture(scope="session")
def tiny_split(tiny_train):
    return split_forget(tiny_train, 10, seed=3)


@pytest.fixture(scope="session")
def tiny_forget(tiny_split, tiny_train):
    return tiny_split.forget_samples(tiny_train)


@pytest.fixture(scope="session")
def tiny_retain(tiny_split, tiny_train):
    return tiny_split.retain_samples(tiny_train)


@pytest.fixture(scope="session")
def tiny_model(tiny_tokenizer, tiny_train):
    """Original model briefly trained on the tiny train split (treat as read-only)."""
    config = TrainConfig(epochs=40, lr=3e-3, batch_size=16)
    return train_original(Model.init(tiny_tokenizer, seed=1), tiny_train, config, seed=2)


@pytest.fixture
def fresh_model(tiny_tokenizer):
    return Model.init(tiny_tokenizer, seed=5)
