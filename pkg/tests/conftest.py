from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from rulebench.rules import Jurisdiction, parse_rule_file

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def china_rule_text() -> str:
    return (FIXTURES / "rules" / "china.yaml").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def china_rules(china_rule_text):
    return parse_rule_file(china_rule_text, Jurisdiction.CHINA)
