"""JSON Schema documents for every machine-readable file this package
emits or consumes. Downstream tooling should validate against these
rather than scraping console tables."""

import json
from importlib import resources

NAMES = (
    "domain-schema",
    "dataset-line",
    "planner",
    "evaluation-report",
    "comparison-report",
    "synthetic-spec",
)


def load(name: str) -> dict:
    """Load one of the shipped schemas by short name (see NAMES)."""
    if name not in NAMES:
        raise KeyError(f"no such schema: {name!r}; known: {', '.join(NAMES)}")
    path = resources.files(__package__).joinpath(f"{name}.schema.json")
    return json.loads(path.read_text(encoding="utf-8"))


def validator(name: str):
    """A Draft 2020-12 validator with every shipped schema pre-registered,
    so cross-schema references (urn:factorder:schemas:*) resolve.

    Needs the optional ``jsonschema`` package.
    """
    import jsonschema
    import referencing

    registry = referencing.Registry()
    for other in NAMES:
        registry = registry.with_resource(
            uri=f"urn:factorder:schemas:{other}",
            resource=referencing.Resource.from_contents(load(other)),
        )
    return jsonschema.Draft202012Validator(load(name), registry=registry)
