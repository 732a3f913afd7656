import pytest

from factorder import FactSet, StageExample, build_catalog, encode_stage

# Fifteen database fact types of a museum-exhibit domain, in declaration
# order; the first six (by convention priority) form the natural opening
# of an exhibit description.
MUSEUM_TYPES = [
    "subclass",
    "current-location",
    "original-location",
    "potter-is",
    "exhibit-characteristics",
    "painted-by",
    "creation-time",
    "creation-period",
    "painting-technique-used",
    "exhibit-depicts",
    "opposite-technique",
    "technique-description",
    "person-information",
    "museum-country",
    "period-story",
]

# Expert-style priority: subclass opens, then period/time/creator details,
# then locations, then the remaining background types.
MUSEUM_PRIORITY = [
    "subclass",
    "creation-period",
    "creation-time",
    "painted-by",
    "original-location",
    "current-location",
    "potter-is",
    "exhibit-characteristics",
    "painting-technique-used",
    "exhibit-depicts",
    "opposite-technique",
    "technique-description",
    "person-information",
    "museum-country",
    "period-story",
]

# A content-determination pick of six facts for one exhibit.
MUSEUM_SELECTION = [
    "subclass",
    "current-location",
    "original-location",
    "painted-by",
    "creation-time",
    "creation-period",
]


@pytest.fixture(scope="session")
def museum_catalog():
    return build_catalog(MUSEUM_TYPES)


def make_examples(num_types, rows):
    """StageExamples from (present_ids, prefix, label) triples.

    All rows must be for the same stage (same prefix length).
    """
    catalog = build_catalog([f"t{i}" for i in range(num_types)])
    examples = []
    for present, prefix, label in rows:
        vector = encode_stage(
            catalog, FactSet(frozenset(present)), tuple(prefix), len(prefix) + 1
        )
        examples.append(StageExample(vector, label))
    return examples
