#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfprox/data/dataset.hpp"

namespace rfprox {

// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> read_csv_records(std::istream& in);

std::string csv_escape(const std::string& field);

// Shortest decimal text that round-trips the double ("%.17g" trimmed).
std::string format_double(double v);

struct LoadOptions {
  // When non-empty, labels must be one of these and class ids follow this
  // order. Otherwise classes are the sorted distinct labels.
  std::vector<std::string> class_names;
};

// Parses `path` against `schema`. Columns are matched by header name; extra
// columns are ignored. Empty cells are missing.
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const LoadOptions& options = {});

// Schema from a header row: every column except `label_column` is a feature,
// categorical if listed in `categorical` or if any non-empty cell fails to
// parse as a number.
FeatureSchema infer_schema(const std::filesystem::path& path, const std::string& label_column,
                           const std::vector<std::string>& categorical = {});

// Writes record_id, the feature columns and the label column.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& d);

}  // namespace rfprox
