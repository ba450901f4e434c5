#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rfprox/data/csv.hpp"
#include "rfprox/data/dataset.hpp"
#include "rfprox/rng.hpp"

namespace test {

inline std::filesystem::path data_file(const std::string& name) {
  return std::filesystem::path(RFPROX_TEST_DATA_DIR) / name;
}

inline rfprox::Dataset load_fixture(const std::string& name, const std::string& label = "label") {
  const auto path = data_file(name);
  return rfprox::impute_zero(rfprox::load_csv(path, rfprox::infer_schema(path, label)));
}

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("rfprox_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Numeric dataset with k classes; class c is shifted by `shift` * c along
// every axis. Every class gets at least `min_per_class` rows.
inline rfprox::Dataset random_dataset(rfprox::Rng& rng, std::size_t n, std::size_t p, int k, double shift = 1.0,
                                      std::size_t min_per_class = 2) {
  std::normal_distribution<double> noise(0.0, 1.0);
  rfprox::FeatureSchema schema;
  for (std::size_t f = 0; f < p; ++f) schema.columns.push_back({"x" + std::to_string(f), rfprox::FeatureKind::numeric, {}});
  schema.label_column = "y";
  rfprox::Matrix<double> x(n, p);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = i < static_cast<std::size_t>(k) * min_per_class
                      ? static_cast<int>(i % static_cast<std::size_t>(k))
                      : static_cast<int>(rfprox::uniform_index(rng, static_cast<std::size_t>(k)));
    labels[i] = c;
    for (std::size_t f = 0; f < p; ++f) x(i, f) = noise(rng) + shift * c;
  }
  std::vector<std::string> names;
  for (int c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
  return rfprox::Dataset(schema, std::move(x), std::move(labels), names);
}

}  // namespace test
