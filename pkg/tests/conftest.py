from collections.abc import Callable, Iterable
from pathlib import Path
from typing import Any

import pytest

from loglshd.pipeline import build_run_config
from loglshd.types import RunConfig

TABLE1_LINES = (
    '2025-01-30 18:01:01 INFO Found block rdd_42_20 locally',
    '2025-01-30 18:01:02 INFO Found block rdd_7_3 locally',
)
TABLE1_FORMAT = '<Date> <Time> <Level> <Content>'


@pytest.fixture
def write_lines(tmp_path: Path) -> Callable[..., Path]:
    def _write(lines: Iterable[str], name: str = 'corpus.log') -> Path:
        path = tmp_path / name
        path.write_text(''.join(f'{line}\n' for line in lines), encoding='utf-8')
        return path

    return _write


@pytest.fixture
def make_config(tmp_path: Path) -> Callable[..., RunConfig]:
    def _make(log_file: Path, **kwargs: Any) -> RunConfig:
        settings: dict[str, Any] = {
            'dataset': 'test',
            'log_format': '<Content>',
            'output_dir': tmp_path / 'out',
            'show_progress': False,
        }
        settings.update(kwargs)
        return build_run_config(log_file=log_file, **settings)

    return _make
