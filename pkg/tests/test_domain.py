import json

import pytest

from factorder import (
    CatalogError,
    ConfigurationError,
    DataFormatError,
    Dataset,
    DuplicateFactError,
    OrderedSequence,
    PlannerConfig,
    UnknownTypeError,
    build_catalog,
    fact_set_from_ids,
    load_dataset,
    load_domain_schema,
    make_fact_set,
    save_dataset,
    save_domain_schema,
    validate_dataset,
)
from conftest import MUSEUM_SELECTION, MUSEUM_TYPES


class TestCatalog:
    def test_declaration_order_gives_dense_ids(self):
        catalog = build_catalog(["subclass", "creation-period"])
        assert catalog.id_of("subclass") == 0
        assert catalog.id_of("creation-period") == 1
        assert catalog.size == 2

    def test_museum_catalog_has_unique_dense_ids(self, museum_catalog):
        assert museum_catalog.size == 15
        ids = [museum_catalog.id_of(name) for name in MUSEUM_TYPES]
        assert ids == list(range(15))
        # bijection: every id maps back to its name
        assert [museum_catalog.name_of(i) for i in ids] == MUSEUM_TYPES

    def test_duplicate_name_rejected(self):
        with pytest.raises(CatalogError, match="'a'"):
            build_catalog(["a", "a"])

    def test_empty_name_rejected(self):
        with pytest.raises(CatalogError):
            build_catalog(["a", ""])

    def test_empty_catalog_rejected(self):
        with pytest.raises(CatalogError):
            build_catalog([])

    def test_unknown_lookups(self, museum_catalog):
        with pytest.raises(UnknownTypeError):
            museum_catalog.id_of("no-such-type")
        with pytest.raises(UnknownTypeError):
            museum_catalog.name_of(15)


class TestFactSet:
    def test_museum_selection(self, museum_catalog):
        facts = make_fact_set(museum_catalog, MUSEUM_SELECTION)
        assert facts.cardinality == 6
        assert facts.names() == set(MUSEUM_SELECTION)

    def test_empty_selection(self, museum_catalog):
        assert make_fact_set(museum_catalog, []).cardinality == 0

    def test_duplicate_rejected(self, museum_catalog):
        with pytest.raises(DuplicateFactError):
            make_fact_set(museum_catalog, ["subclass", "subclass"])

    def test_unknown_rejected(self, museum_catalog):
        with pytest.raises(UnknownTypeError):
            make_fact_set(museum_catalog, ["subclass", "made-of"])

    def test_round_trip_names(self, museum_catalog):
        for names in ([], ["subclass"], MUSEUM_SELECTION, MUSEUM_TYPES):
            assert make_fact_set(museum_catalog, names).names() == set(names)

    def test_from_ids_checks(self, museum_catalog):
        assert fact_set_from_ids(museum_catalog, [0, 3, 7]).cardinality == 3
        with pytest.raises(UnknownTypeError):
            fact_set_from_ids(museum_catalog, [0, 99])
        with pytest.raises(DuplicateFactError):
            fact_set_from_ids(museum_catalog, [1, 1])


class TestValidateDataset:
    def _dataset(self, catalog, orders, n):
        return Dataset(catalog, tuple(OrderedSequence(tuple(o)) for o in orders), n)

    def test_valid_dataset_empty_report(self, museum_catalog):
        orders = [[0, 1, 2, 3, 4, 5], [0, 7, 6, 5, 2, 1]]
        assert validate_dataset(self._dataset(museum_catalog, orders, 6)) == []

    def test_length_violation_carries_index(self, museum_catalog):
        orders = [[0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 4]]
        report = validate_dataset(self._dataset(museum_catalog, orders, 6))
        assert len(report) == 1
        assert report[0].index == 1
        assert report[0].kind == "length"

    def test_permutation_violation(self, museum_catalog):
        orders = [[0, 1, 1, 3, 4, 5]]
        report = validate_dataset(self._dataset(museum_catalog, orders, 6))
        assert [v.kind for v in report] == ["permutation"]

    def test_id_validity_violation(self, museum_catalog):
        orders = [[0, 1, 2, 3, 4, 99]]
        report = validate_dataset(self._dataset(museum_catalog, orders, 6))
        assert [v.kind for v in report] == ["id-validity"]

    def test_membership_preserved_by_reordering(self, museum_catalog):
        # any accepted instance converts to a fact set and back with the
        # same member set regardless of ordering
        order = OrderedSequence((0, 7, 6, 5, 2, 1))
        members = order.to_fact_set(museum_catalog).members
        assert members == frozenset(order.positions)
        assert frozenset(sorted(order.positions)) == members


class TestPlannerConfig:
    def test_round_trip(self):
        config = PlannerConfig(6, "knn", {"k": 3}, rng_seed=5)
        assert PlannerConfig.from_dict(config.to_dict()) == config

    def test_rejects_bad_length(self):
        with pytest.raises(ConfigurationError):
            PlannerConfig(0, "majority")

    def test_rejects_unknown_scheme(self):
        with pytest.raises(ConfigurationError, match="majority"):
            PlannerConfig(6, "boosting")

    def test_degenerate_single_stage_allowed(self):
        assert PlannerConfig(1, "majority").sequence_length == 1


class TestSchemaFile:
    def test_round_trip(self, tmp_path, museum_catalog):
        path = tmp_path / "schema.json"
        save_domain_schema(str(path), museum_catalog, MUSEUM_TYPES[::-1])
        catalog, canonical = load_domain_schema(str(path))
        assert catalog == museum_catalog
        assert canonical == MUSEUM_TYPES[::-1]

    def test_optional_canonical(self, tmp_path, museum_catalog):
        path = tmp_path / "schema.json"
        save_domain_schema(str(path), museum_catalog)
        _, canonical = load_domain_schema(str(path))
        assert canonical is None

    def test_bad_json(self, tmp_path):
        path = tmp_path / "schema.json"
        path.write_text("{not json")
        with pytest.raises(DataFormatError):
            load_domain_schema(str(path))

    def test_missing_fact_types(self, tmp_path):
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"canonical_order": []}))
        with pytest.raises(DataFormatError):
            load_domain_schema(str(path))

    def test_unknown_canonical_name(self, tmp_path):
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"fact_types": ["a", "b"], "canonical_order": ["a", "zzz"]}))
        with pytest.raises(DataFormatError, match="zzz"):
            load_domain_schema(str(path))


class TestDatasetFile:
    def test_round_trip(self, tmp_path, museum_catalog):
        dataset = Dataset(
            museum_catalog,
            (OrderedSequence((0, 7, 6, 5, 2, 1)), OrderedSequence((0, 1, 2, 3, 4, 5))),
            6,
        )
        path = tmp_path / "data.jsonl"
        save_dataset(str(path), dataset)
        loaded = load_dataset(str(path), museum_catalog)
        assert loaded == dataset

    def test_bad_json_line_number(self, tmp_path, museum_catalog):
        path = tmp_path / "data.jsonl"
        path.write_text('{"id": "a", "order": ["subclass", "creation-time"]}\nnot json\n')
        with pytest.raises(DataFormatError, match="line 2") as err:
            load_dataset(str(path), museum_catalog)
        assert err.value.line == 2

    def test_mixed_length_rejected_with_line(self, tmp_path, museum_catalog):
        lines = [
            json.dumps({"id": "a", "order": ["subclass", "creation-time", "painted-by"]}),
            json.dumps({"id": "b", "order": ["subclass", "creation-time"]}),
        ]
        path = tmp_path / "data.jsonl"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match="line 2"):
            load_dataset(str(path), museum_catalog)

    def test_unknown_name_rejected_with_line(self, tmp_path, museum_catalog):
        path = tmp_path / "data.jsonl"
        path.write_text(json.dumps({"id": "a", "order": ["subclass", "made-of"]}) + "\n")
        with pytest.raises(DataFormatError, match="line 1"):
            load_dataset(str(path), museum_catalog)

    def test_repeated_name_rejected(self, tmp_path, museum_catalog):
        path = tmp_path / "data.jsonl"
        path.write_text(json.dumps({"id": "a", "order": ["subclass", "subclass"]}) + "\n")
        with pytest.raises(DataFormatError, match="line 1"):
            load_dataset(str(path), museum_catalog)

    def test_empty_file_rejected(self, tmp_path, museum_catalog):
        path = tmp_path / "data.jsonl"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_dataset(str(path), museum_catalog)
