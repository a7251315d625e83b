#!/usr/bin/env python3
"""
Test Script for de Sitter Gravity
Verifies installation and basic functionality
"""

import json
import sys
from pathlib import Path

# Add the src directory to Python path
sys.path.append(str(Path(__file__).parent / "src"))


def test_imports():
    """Test if all required modules can be imported"""
    print("🧪 Testing imports...")

    import numpy  # noqa: F401
    import scipy  # noqa: F401
    import astropy  # noqa: F401
    import click  # noqa: F401
    import pydantic  # noqa: F401
    import rich  # noqa: F401
    from loguru import logger  # noqa: F401
    from dotenv import load_dotenv  # noqa: F401
    print("✅ Core dependencies imported")

    from desitter_gravity import algebra, cosmology, field, geodesic, lattice, matter  # noqa: F401
    from desitter_gravity import post_newtonian, radiation, reporting, scenarios, units  # noqa: F401
    from desitter_gravity.cli import main  # noqa: F401
    print("✅ desitter_gravity modules imported")


def test_configuration():
    """Test configuration loading"""
    print("\n🔧 Testing configuration...")

    from desitter_gravity.scenarios import RunnerConfig

    config_path = Path(__file__).parent / "config.example.json"
    with open(config_path, "r") as f:
        config = RunnerConfig(**json.load(f))

    assert config.coupling_ag > 0
    assert config.log_file.endswith(".log")
    print(f"✅ Configuration loaded: output_dir={config.output_dir}")


def test_missing_config_uses_defaults(tmp_path, monkeypatch):
    """A missing config file falls back to defaults"""
    from desitter_gravity.scenarios import RunnerConfig, ScenarioRunner

    monkeypatch.chdir(tmp_path)
    runner = ScenarioRunner(str(tmp_path / "absent.json"))
    assert runner.config == RunnerConfig()


def test_version():
    import desitter_gravity

    assert desitter_gravity.__version__.count(".") == 2
    assert "build_generators" in desitter_gravity.__all__


def main():
    """Run all installation tests"""
    print("🚀 de Sitter Gravity - Installation Test")
    print("=" * 50)
    test_imports()
    test_configuration()
    test_version()
    print("\n🎉 All tests passed!")


if __name__ == "__main__":
    main()
