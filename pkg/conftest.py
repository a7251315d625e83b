"""
Shared pytest fixtures for the dsgravity test scripts
"""

import sys
from pathlib import Path

import pytest

# Add the src directory to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from desitter_gravity.algebra import AlgebraMode, build_generators  # noqa: E402


@pytest.fixture
def desitter():
    return build_generators(AlgebraMode.DESITTER)


@pytest.fixture
def so5():
    return build_generators(AlgebraMode.SO5)


@pytest.fixture
def poincare():
    return build_generators(AlgebraMode.POINCARE)


@pytest.fixture(params=list(AlgebraMode), ids=lambda m: m.value)
def any_generators(request):
    return build_generators(request.param)


@pytest.fixture
def isolated_config(tmp_path, monkeypatch):
    """Runner configuration writing into a temporary directory"""
    monkeypatch.delenv("DSGRAVITY_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("DSGRAVITY_LOG_LEVEL", raising=False)
    config = tmp_path / "config.json"
    config.write_text(
        '{"output_dir": "%s", "log_file": "%s", "debug_mode": false, "seed": 0, "coupling_ag": 1.0}'
        % ((tmp_path / "results").as_posix(), (tmp_path / "dsgravity.log").as_posix())
    )
    return config
