import os

import pytest

import _core as sqlfit

DATA = os.environ["SQLFIT_DATA_DIR"]


def path(name):
    return os.path.join(DATA, name)


@pytest.fixture(scope="module")
def catalog():
    return sqlfit.load_schema_catalog(path("tables.json"))


@pytest.fixture(scope="module")
def examples(catalog):
    return sqlfit.load_examples(path("train_en.json"), catalog, "en")


def test_corpus_loads_and_validates(catalog, examples):
    assert len(catalog) == 6
    assert "government" in catalog
    assert "nowhere" not in catalog
    assert len(examples) == 70
    assert examples.language_composition() == {"en": 70}

    report = sqlfit.validate_corpus(catalog, examples)
    assert report["clean"]
    assert report["queries_parsed"] == 70
    assert report["defects"] == []


def test_linearize_and_token_counts(catalog):
    government = catalog.at("government")
    text = sqlfit.linearize("How many heads are there?", government)
    assert text.startswith("How many heads are there? | ")
    assert "department :" in text
    assert sqlfit.count_tokens("SELECT name FROM department") == 7

    vocab = sqlfit.count_tokens("department", f"vocabulary:{path('vocab.txt')}")
    assert vocab >= 1


def test_budget_classification(catalog, examples):
    report = sqlfit.classify_examples(examples, catalog, limit=512)
    assert report["total"] == 70
    assert report["fits"] == 64
    assert report["over_budget"] == 6
    assert report["overflow_by_database"] == {"warehouse_wide": 5, "vault_wide": 1}
    assert len(report["entries"]) == 70


def test_fit_corpus_round_trip(catalog, examples, tmp_path):
    fit_catalog, fit_examples, report = sqlfit.emit_fit_corpus(catalog, examples, limit=512)
    assert len(fit_catalog) == 6
    assert len(fit_examples) == 70
    assert fit_catalog.at("warehouse_wide").table_count() == 2
    assert report["examples_remapped"] == 6
    assert {row["db_id"] for row in report["databases"]} == {"warehouse_wide", "vault_wide"}
    assert sqlfit.validate_corpus(fit_catalog, fit_examples)["clean"]

    out = tmp_path / "fit_tables.json"
    sqlfit.persist_catalog(fit_catalog, str(out))
    assert len(sqlfit.load_schema_catalog(str(out))) == 6


def test_multilingual_merge(catalog):
    base = sqlfit.load_examples(path("merge_base_en.json"), catalog, "en")
    variants = [
        (lang, sqlfit.load_examples(path(f"merge_{lang}.json"), catalog, lang))
        for lang in ("pt", "es", "fr")
    ]
    for lang, variant in variants:
        assert sqlfit.align_translations(base, lang, variant)["aligned"]

    merged = sqlfit.merge_multilingual(base, variants)
    assert len(merged) == 40
    assert merged.language_composition() == {"en": 10, "es": 10, "fr": 10, "pt": 10}
    assert len(merged.filter_language("pt")) == 10
    assert merged.example(10)["lang"] == "pt"


def test_evaluation(catalog, examples):
    report = sqlfit.evaluate(examples, examples.queries(), catalog)
    assert report["total"] == 70
    assert report["overall"] == 1.0
    assert all(v["matched"] for v in report["verdicts"])

    buckets = report["by_difficulty"]
    assert sum(buckets[level]["count"] for level in buckets) == 70


def test_matching_and_difficulty(catalog):
    government = catalog.at("government")
    assert sqlfit.exact_set_match(
        "SELECT name FROM department WHERE budget_in_billions > 5",
        "select T1.name from department as T1 where T1.budget_in_billions > 3.14",
        government,
    )
    assert not sqlfit.exact_set_match(
        "SELECT name FROM department",
        "SELECT DISTINCT name FROM department",
        government,
    )
    assert sqlfit.classify_difficulty("SELECT name FROM department", government) == "easy"

    rendered = sqlfit.canonical_sql("select  name  from DEPARTMENT", government)
    assert rendered == sqlfit.canonical_sql(rendered, government)

    refs = sqlfit.extract_refs(
        "SELECT max(budget_in_billions), min(budget_in_billions) FROM department", government
    )
    assert refs["tables"] == {"department"}
    assert refs["columns"] == {("department", "budget_in_billions")}
    assert not refs["uses_star"]


def test_errors_surface_as_python_exceptions(catalog):
    with pytest.raises(sqlfit.IoError):
        sqlfit.load_schema_catalog(path("does_not_exist.json"))
    with pytest.raises(sqlfit.Error):
        catalog.at("no_such_db")
    with pytest.raises(sqlfit.ParseError):
        sqlfit.canonical_sql("SELECT", catalog.at("government"))
    with pytest.raises(sqlfit.ConfigError):
        sqlfit.count_tokens("x", "mystery")
