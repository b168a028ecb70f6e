from pathlib import Path

import pytest

from anatreport.data import generate_synthetic
from anatreport.generator import DecoderConfig
from anatreport.training import TrainConfig, run_stage


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        bucket = getattr(item.session.config, "_acceptance_results", None)
        if bucket is None:
            bucket = item.session.config._acceptance_results = []
        bucket.append((doc, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, passed in results:
            terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}")


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def tiny_pipeline():
    """A small but fully trained pipeline shared across integration tests."""
    train = generate_synthetic(24, seed=7, name="train")
    val = generate_synthetic(8, seed=17, name="validation")
    test = generate_synthetic(6, seed=27, name="test")
    state, _ = run_stage(TrainConfig(stage=2, epochs=3, batch_size=64, seed=7), train, val)
    decoder_config = DecoderConfig(layers=2, heads=2, model_dim=48, feedforward_dim=96,
                                   max_len=24, vocab_size=0)
    state, _ = run_stage(
        TrainConfig(stage=3, epochs=8, batch_size=32, seed=7, learning_rate=5e-4,
                    decoder_learning_rate=1.5e-3, patience=8),
        train, val, state=state, decoder_config=decoder_config,
    )
    return state, train, val, test
