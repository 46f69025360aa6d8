import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from linkquery.fixtures import demo_manifest, demo_policy, demo_query, demo_structures
from linkquery.guidance import parse_policy, parse_structure_registry
from linkquery.query import parse_query
from linkquery.webfetch import FixtureSource

SEED = "https://uma.ex/#me"


@pytest.fixture
def demo_source():
    return FixtureSource.from_manifest(demo_manifest())


@pytest.fixture
def demo_query_obj():
    return parse_query(demo_query().read_text(encoding="utf-8"))


@pytest.fixture
def demo_registry():
    return parse_structure_registry(demo_structures().read_text(encoding="utf-8"))


@pytest.fixture
def uma_policy():
    return parse_policy(demo_policy().read_text(encoding="utf-8"))
