#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabattr/table.hpp"

namespace tabattr {

enum class SplitFilter { Gold, Silver, All };

SplitFilter split_filter_from_string(const std::string& s);

// Canonical JSON (sorted keys, compact). serialize(parse(serialize(x))) is
// byte-stable.
nlohmann::json instance_to_json(const QAInstance& instance);
std::string serialize_instance(const QAInstance& instance);
QAInstance instance_from_json(const nlohmann::json& j);

struct LoadError {
    std::string instance_id;  // may be empty when the id itself is unreadable
    std::string field;
    std::string message;
    std::size_t line = 0;
};

struct LoadResult {
    std::vector<QAInstance> instances;
    std::vector<LoadError> errors;

    bool complete() const { return errors.empty(); }
};

// Streams a JSON-lines file; every line is either accepted or itemized in
// `errors` (no silent drops). Gold-split loads require gold annotations.
LoadResult load_dataset(const std::string& path, SplitFilter split);

void save_dataset(const std::string& path, const std::vector<QAInstance>& instances);

struct SizeStats {
    int min = 0;
    int max = 0;
    double mean = 0.0;
};

struct DatasetStats {
    std::string name;
    std::size_t total = 0;
    std::size_t gold = 0;
    std::size_t silver = 0;
    SizeStats rows;
    SizeStats cols;
    SizeStats answer_length;  // bytes
};

std::vector<DatasetStats> stats(const std::vector<QAInstance>& instances);

struct ManifestEntry {
    std::string name;
    std::string path;
    std::size_t gold_count = 0;
    std::size_t silver_count = 0;
    std::string note;
};

// Manifest: JSON array of {name, path, gold_count, silver_count, note?}.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Source-dataset converters; each reads the dataset's native JSON-lines
// format and emits the canonical schema. Nested/stacked headers are
// flattened into single strings joined with " | ".
std::vector<QAInstance> import_totto(const std::string& path, Split split);
std::vector<QAInstance> import_fetaqa(const std::string& path, Split split);
std::vector<QAInstance> import_aitqa(const std::string& path);

}  // namespace tabattr
