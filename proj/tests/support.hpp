#pragma once

// Shared fixture access for the test suites. Fixture files live under
// tests/data and are located through the TEST_DATA_DIR compile definition.

#include <filesystem>
#include <random>
#include <string>

#include "sqlfit/corpus.hpp"

inline std::string data_path(const std::string& name) {
    return std::string(TEST_DATA_DIR) + "/" + name;
}

inline const sqlfit::SchemaCatalog& fixture_catalog() {
    static const sqlfit::SchemaCatalog catalog =
        sqlfit::load_schema_catalog(data_path("tables.json"));
    return catalog;
}

inline const sqlfit::ExampleSet& fixture_examples() {
    static const sqlfit::ExampleSet examples =
        sqlfit::load_examples(data_path("train_en.json"), fixture_catalog(), "en");
    return examples;
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::mt19937_64 rng(std::random_device{}());
        path = std::filesystem::temp_directory_path() /
               ("sqlfit_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};
