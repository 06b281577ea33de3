import os
from pathlib import Path

import pytest

from mcrcf.ratings import ML100K_SCALE, RatingRecord, RatingsDataset, load_ratings

ROOT = Path(__file__).resolve().parents[1]


def ml100k_path():
    p = os.environ.get("ML100K_PATH") or ROOT / "data" / "ml-100k" / "u.data"
    return Path(p) if Path(p).exists() else None


@pytest.fixture(scope="session")
def ml100k():
    p = ml100k_path()
    if p is None:
        pytest.skip("MovieLens 100K not found (set ML100K_PATH or add data/ml-100k/u.data)")
    return load_ratings(p, "ml100k")


def make_dataset(triples, scale=ML100K_SCALE):
    return RatingsDataset([RatingRecord(u, i, float(r), 0) for u, i, r in triples], scale)


@pytest.fixture
def tiny():
    # 3 users x 4 items, used by several hand-computed examples
    return make_dataset(
        [
            (1, 1, 5), (1, 2, 3), (1, 3, 4),
            (2, 1, 4), (2, 2, 2), (2, 4, 5),
            (3, 1, 1), (3, 3, 2), (3, 4, 4),
        ]
    )


# one verdict line per acceptance criterion, echoed after the run
ACCEPTANCE: list[str] = []


def record_verdict(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
