from pathlib import Path

import pytest

from lexsmt import fixtures
from lexsmt.pipeline import ExperimentConfig, run_pipeline


@pytest.fixture(scope="session")
def bundle(tmp_path_factory) -> Path:
    """The synthetic Sinhala-English fixture bundle written to disk."""
    directory = tmp_path_factory.mktemp("bundle")
    fixtures.write(directory)
    return directory


@pytest.fixture(scope="session")
def matrix_runs(bundle, tmp_path_factory):
    """Score rows for every config of the experiment matrix, keyed by id."""
    runs = tmp_path_factory.mktemp("runs")
    rows = {}
    for config_id in fixtures.MATRIX:
        cfg = ExperimentConfig.load(bundle / f"{config_id}.ini")
        row = run_pipeline(cfg, runs / config_id)
        rows[config_id] = parse_row(row)
    return runs, rows


def parse_row(row: str) -> dict:
    config_id, direction, bleu, oov_tok, oov_typ = row.split("\t")
    return {"id": config_id, "direction": direction, "bleu": float(bleu),
            "oov_tokens": int(oov_tok), "oov_types": int(oov_typ)}


CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")
    config.stash[CRITERIA_KEY] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.failed):
        number, title = marker.args
        results = item.config.stash[CRITERIA_KEY]
        passed = report.passed and results.get(number, (title, True))[1]
        results[number] = (title, passed)
    return report


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[CRITERIA_KEY]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")
