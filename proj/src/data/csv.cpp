#include "rfprox/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rfprox/errors.hpp"

namespace rfprox {

std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line is not a record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw FormatError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  // Strip a UTF-8 byte order mark from the first field.
  if (!records.empty() && !records[0].empty() && records[0][0].rfind("\xEF\xBB\xBF", 0) == 0) {
    records[0][0].erase(0, 3);
  }
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

bool parse_number(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::vector<std::string>> read_file_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_csv_records(in);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const LoadOptions& options) {
  schema.validate();
  auto records = read_file_records(path);
  if (records.empty()) throw EmptyFile(path.string());
  const auto& header = records.front();
  auto find_col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumn(name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> source(schema.n_features());
  for (std::size_t f = 0; f < schema.n_features(); ++f) source[f] = find_col(schema.columns[f].name);
  const std::size_t label_src = find_col(schema.label_column);
  const auto id_it = std::find(header.begin(), header.end(), "record_id");
  const bool has_ids = id_it != header.end();
  const auto id_src = static_cast<std::size_t>(id_it - header.begin());
  const std::size_t n = records.size() - 1;
  if (n == 0) throw EmptyFile(path.string());

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw FormatError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
  }

  FeatureSchema out_schema = schema;
  // Categorical vocabularies: fixed when given, otherwise sorted distinct values.
  std::vector<std::map<std::string, int>> codes(schema.n_features());
  for (std::size_t f = 0; f < schema.n_features(); ++f) {
    auto& col = out_schema.columns[f];
    if (col.kind != FeatureKind::categorical) continue;
    if (col.vocabulary.empty()) {
      std::set<std::string> distinct;
      for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& cell = records[r][source[f]];
        if (!cell.empty()) distinct.insert(cell);
      }
      col.vocabulary.assign(distinct.begin(), distinct.end());
    }
    for (std::size_t v = 0; v < col.vocabulary.size(); ++v) codes[f][col.vocabulary[v]] = static_cast<int>(v);
  }

  std::vector<std::string> class_names = options.class_names;
  if (class_names.empty()) {
    std::set<std::string> distinct;
    for (std::size_t r = 1; r < records.size(); ++r) distinct.insert(records[r][label_src]);
    class_names.assign(distinct.begin(), distinct.end());
  }
  std::map<std::string, int> class_codes;
  for (std::size_t c = 0; c < class_names.size(); ++c) class_codes[class_names[c]] = static_cast<int>(c);

  Matrix<double> features(n, schema.n_features());
  std::vector<int> labels(n);
  std::vector<std::size_t> ids;
  if (has_ids) ids.resize(n);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t i = r - 1;
    for (std::size_t f = 0; f < schema.n_features(); ++f) {
      const auto& cell = rec[source[f]];
      if (cell.empty()) {
        features(i, f) = kMissing;
        continue;
      }
      if (out_schema.columns[f].kind == FeatureKind::numeric) {
        double v = 0;
        if (!parse_number(cell, v)) throw UnparsableCell(i, source[f], cell);
        features(i, f) = v;
      } else {
        const auto it = codes[f].find(cell);
        if (it == codes[f].end()) throw UnparsableCell(i, source[f], cell);
        features(i, f) = it->second;
      }
    }
    const auto it = class_codes.find(rec[label_src]);
    if (it == class_codes.end()) throw UnparsableCell(i, label_src, rec[label_src]);
    labels[i] = it->second;
    if (has_ids) {
      const auto& cell = rec[id_src];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), ids[i]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) throw UnparsableCell(i, id_src, cell);
    }
  }
  return Dataset(std::move(out_schema), std::move(features), std::move(labels), std::move(class_names),
                 std::move(ids));
}

FeatureSchema infer_schema(const std::filesystem::path& path, const std::string& label_column,
                           const std::vector<std::string>& categorical) {
  auto records = read_file_records(path);
  if (records.empty()) throw EmptyFile(path.string());
  const auto& header = records.front();
  if (std::find(header.begin(), header.end(), label_column) == header.end()) throw MissingColumn(label_column);
  for (const auto& name : categorical) {
    if (std::find(header.begin(), header.end(), name) == header.end()) throw MissingColumn(name);
  }
  FeatureSchema schema;
  schema.label_column = label_column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column || header[c] == "record_id") continue;
    Column col{header[c], FeatureKind::numeric, {}};
    if (std::find(categorical.begin(), categorical.end(), header[c]) != categorical.end()) {
      col.kind = FeatureKind::categorical;
    } else {
      for (std::size_t r = 1; r < records.size(); ++r) {
        double v;
        if (c < records[r].size() && !records[r][c].empty() && !parse_number(records[r][c], v)) {
          col.kind = FeatureKind::categorical;
          break;
        }
      }
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  const auto& schema = d.schema();
  out << "record_id";
  for (const auto& col : schema.columns) out << ',' << csv_escape(col.name);
  out << ',' << csv_escape(schema.label_column) << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    out << d.id(i);
    for (std::size_t f = 0; f < d.n_features(); ++f) {
      out << ',';
      const double v = d.at(i, f);
      if (is_missing(v)) continue;
      if (schema.columns[f].kind == FeatureKind::categorical) {
        out << csv_escape(schema.columns[f].vocabulary[static_cast<std::size_t>(v)]);
      } else {
        out << format_double(v);
      }
    }
    out << ',' << csv_escape(d.class_name(d.label(i))) << '\n';
  }
}

}  // namespace rfprox
