import json
from importlib import resources

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

ACCEPTANCE_LINES: list[str] = []


def _registry():
    resources_ = []
    for entry in resources.files("mmot").joinpath("schemas").iterdir():
        if entry.name.endswith(".json"):
            schema = json.loads(entry.read_text())
            resources_.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources_)


@pytest.fixture(scope="session")
def validate():
    registry = _registry()

    def check(name: str, payload):
        schema = registry.contents(f"{name}.json")
        Draft202012Validator(schema, registry=registry).validate(payload)

    return check


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
