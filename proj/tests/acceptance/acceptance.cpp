// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Criterion numbers given as arguments
// restrict the run to those.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "eqchain.hpp"
#include "rfprox/cli/commands.hpp"
#include "rfprox/cli/config.hpp"
#include "rfprox/data/csv.hpp"
#include "rfprox/data/split.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/mds.hpp"
#include "rfprox/metrics.hpp"
#include "rfprox/outlier.hpp"
#include "rfprox/proximity.hpp"
#include "support.hpp"

using namespace rfprox;
using namespace rfprox::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Collects failures for one criterion; details go to stdout as they happen.
struct Check {
  int failures = 0;
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      std::cout << "    fail: " << what << '\n';
    }
  }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto records = read_csv_records(in);
  Table t;
  t.header = records.front();
  t.rows.assign(records.begin() + 1, records.end());
  return t;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bits(const ProximityMatrix& a, const ProximityMatrix& b) {
  const auto& pa = a.packed();
  const auto& pb = b.packed();
  if (a.n() != b.n() || pa.size() != pb.size()) return false;
  if (std::memcmp(pa.data(), pb.data(), pa.size() * sizeof(double)) != 0) return false;
  const auto& qa = a.asymmetric().data();
  const auto& qb = b.asymmetric().data();
  if (qa.size() != qb.size() || (!qa.empty() && std::memcmp(qa.data(), qb.data(), qa.size() * sizeof(double)) != 0))
    return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    if (a.row_undefined(i) != b.row_undefined(i)) return false;
    for (std::size_t j = i; j < a.n(); ++j)
      if (a.undefined(i, j) != b.undefined(i, j)) return false;
  }
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

RunConfig dataset_config(const std::string& file, const fs::path& out) {
  RunConfig c;
  c.dataset = DatasetConfig{test::data_file(file).string(), "label", {}, {}};
  c.output_dir = out.string();
  return c;
}

// ---------------------------------------------------------------------------

bool criterion_classification() {
  struct Target {
    std::string file;
    double min_accuracy;
  };
  const std::vector<Target> targets{
      {"iris.csv", 0.93}, {"wine.csv", 0.97}, {"breast_cancer.csv", 0.91}, {"car.csv", 0.93}, {"digits.csv", 0.95}};
  Check check;
  test::TempDir root("acc_c1");
  for (const auto& t : targets) {
    RunConfig c = dataset_config(t.file, root / t.file);
    c.grid.enabled = true;
    c.grid.grid.n_trees = {100, 300};
    c.grid.grid.max_depth = {10, std::nullopt};
    c.grid.grid.max_features = {MaxFeatures::sqrt, MaxFeatures::log2};
    c.grid.grid.criterion = {Criterion::gini};
    cmd_train(c);
    const json m = read_json(root / t.file / "metrics.json");
    const double acc = m["accuracy"], f1 = m["f1_macro"];
    std::cout << "    " << t.file << ": accuracy " << acc << " (>= " << t.min_accuracy << "), macro-F1 " << f1
              << ", best " << m["params"].dump() << '\n';
    check.expect(acc >= t.min_accuracy, t.file + " accuracy");
    check.expect(std::abs(f1 - acc) <= 0.05, t.file + " macro-F1 gap");
  }
  return check.failures == 0;
}

bool criterion_oracle() {
  Check check;
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + uniform_index(rng, 181);
    const std::size_t p = 2 + uniform_index(rng, 6);
    const int k = 2 + static_cast<int>(uniform_index(rng, 3));
    const Dataset d = test::random_dataset(rng, n, p, k, 0.5 + uniform_unit(rng), 2);
    ForestParams params;
    params.n_trees = 1 + static_cast<int>(uniform_index(rng, 50));
    if (uniform_unit(rng) < 0.3) params.max_depth = 1 + static_cast<int>(uniform_index(rng, 6));
    params.seed = static_cast<std::uint64_t>(trial);
    const Forest f = fit_forest(d, params);
    for (auto kind : {ProximityKind::original, ProximityKind::oob, ProximityKind::gap}) {
      const bool ok = same_bits(compute_proximity(kind, f, d), proximity_oracle(f, d, kind));
      check.expect(ok, "instance " + std::to_string(trial) + " kind " + to_string(kind));
    }
  }
  std::cout << "    20 instances x 3 kinds compared bitwise\n";
  return check.failures == 0;
}

bool criterion_eq_chain() {
  Check check;
  double worst = 0.0;
  const std::vector<std::pair<test::Dense, std::vector<int>>> fixtures{
      {test::five_record_fixture(), test::five_record_labels()},
      {test::seven_record_fixture(), test::seven_record_labels()}};
  for (const auto& [dense, labels] : fixtures) {
    ProximityMatrix p(dense.size(), ProximityKind::original);
    for (std::size_t i = 0; i < dense.size(); ++i)
      for (std::size_t j = i; j < dense.size(); ++j) p.set(i, j, dense[i][j]);
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    for (int J = 0; J < n_classes; ++J) {
      const auto o = outlier_measure(p, labels, J);
      for (std::size_t i = 0; i < dense.size(); ++i) {
        const double expected = test::measure(dense, labels, i, J);
        if (std::isinf(expected) || expected == 0.0) {
          check.expect(o[i] == expected, "exact value at record " + std::to_string(i));
          continue;
        }
        const double rel = std::abs(o[i] - expected) / std::abs(expected);
        worst = std::max(worst, rel);
        check.expect(rel <= 1e-12, "record " + std::to_string(i) + " class " + std::to_string(J));
      }
    }
  }
  std::cout << "    worst relative error " << std::scientific << worst << std::fixed << '\n';
  return check.failures == 0;
}

bool criterion_outlier_counts() {
  struct Target {
    std::string file;
    int lo, hi, paper;
  };
  const std::vector<Target> targets{{"iris.csv", 3, 18, 9},
                                    {"digits.csv", 20, 90, 48},
                                    {"wine.csv", 3, 18, 9},
                                    {"breast_cancer.csv", 4, 25, 11},
                                    {"car.csv", 30, 110, 67}};
  Check check;
  test::TempDir root("acc_c4");
  for (const auto& t : targets) {
    std::cout << "    " << t.file << " (range " << t.lo << "-" << t.hi << ", paper " << t.paper << "): ";
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const fs::path dir = root / (t.file + std::to_string(seed));
      RunConfig c = dataset_config(t.file, dir);
      c.seed = seed;
      c.forest.n_trees = 1000;
      cmd_train(c);
      cmd_outliers(c, default_model_path(c));
      const json o = read_json(dir / "outliers.json");
      const int count = o["outlier_count"];
      check.expect(o.contains("overlap_count") && o.contains("misclassified_count"), "overlap fields in manifest");
      std::cout << count << "/" << o["misclassified_count"].get<int>() << "/" << o["overlap_count"].get<int>() << ' ';
      check.expect(count >= t.lo && count <= t.hi, t.file + " seed " + std::to_string(seed));
      fs::remove_all(dir);
    }
    std::cout << "(outliers/misclassified/overlap per seed)\n";
  }
  return check.failures == 0;
}

// One synthetic run shared by the recall and quartile criteria.
struct SyntheticRun {
  test::TempDir dir{"acc_synth"};
  RunConfig config;
  SyntheticRun() {
    config.synthetic = SyntheticSpec{};
    config.output_dir = dir.path().string();
    config.forest.n_trees = 500;
    cmd_train(config);
    cmd_outliers(config, default_model_path(config));
    cmd_analyze(config, dir / "scores.csv", dir / "synthetic" / "returns.csv", dir / "synthetic" / "benchmarks.csv");
  }
};

bool criterion_injected(const SyntheticRun& run) {
  Check check;
  const Table scores = read_table(run.dir / "scores.csv");
  const Table truth = read_table(run.dir / "synthetic" / "truth.csv");
  std::map<std::string, bool> injected;
  for (const auto& r : truth.rows) injected[r[truth.col("record_id")]] = r[truth.col("is_injected")] == "1";

  std::size_t n_injected = 0, caught = 0;
  std::map<std::string, std::vector<double>> o_injected, o_native;
  for (const auto& r : scores.rows) {
    const bool inj = injected.at(r[scores.col("record_id")]);
    const double o = std::stod(r[scores.col("O_own")]);
    (inj ? o_injected : o_native)[r[scores.col("label")]].push_back(o);
    if (!inj) continue;
    ++n_injected;
    caught += r[scores.col("flag")] == "1" || r[scores.col("quartile")] == "4";
  }
  const double recall = static_cast<double>(caught) / static_cast<double>(n_injected);
  std::cout << "    injected recall (flagged or quartile 4): " << caught << "/" << n_injected << " = " << recall << '\n';
  check.expect(n_injected == 60, "60 injected records");
  check.expect(recall >= 0.70, "recall");
  for (const auto& [cls, natives] : o_native) {
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const double mi = mean(o_injected[cls]), mn = mean(natives);
    std::cout << "    class " << cls << ": mean O injected " << mi << ", natives " << mn << '\n';
    check.expect(mi > mn, "mean O in class " + cls);
  }
  return check.failures == 0;
}

bool criterion_quartile_r2(const SyntheticRun& run) {
  Check check;
  // Recompute every R^2 from the raw panels with the normal equations.
  const Table returns = read_table(run.dir / "synthetic" / "returns.csv");
  const Table bench = read_table(run.dir / "synthetic" / "benchmarks.csv");
  std::map<std::string, std::map<int, double>> r_series, b_series;
  for (const auto& r : returns.rows) r_series[r[0]][std::stoi(r[1])] = std::stod(r[2]);
  for (const auto& r : bench.rows) b_series[r[0]][std::stoi(r[1])] = std::stod(r[2]);

  const Table scores = read_table(run.dir / "scores.csv");
  const Table r2 = read_table(run.dir / "r2.csv");
  std::map<std::string, double> reported;
  for (const auto& r : r2.rows) reported[r[r2.col("record_id")]] = std::stod(r[r2.col("r_squared")]);

  std::map<std::string, std::array<std::vector<double>, 4>> by_class;
  double worst = 0.0;
  for (const auto& r : scores.rows) {
    const std::string id = r[scores.col("record_id")], cls = r[scores.col("label")];
    const auto& ys = r_series.at(id);
    const auto& xs = b_series.at(cls);
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [t, y] : ys) {
      const double x = xs.at(t);
      n += 1;
      sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
    }
    const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    const double rsq = cov * cov / (vx * vy);
    worst = std::max(worst, std::abs(rsq - reported.at(id)));
    by_class[cls][static_cast<std::size_t>(std::stoi(r[scores.col("quartile")]) - 1)].push_back(rsq);
  }
  std::cout << "    max |R^2 - independent OLS| " << std::scientific << worst << std::fixed << '\n';
  check.expect(worst <= 1e-9, "R^2 agrees with independent OLS");
  for (const auto& [cls, qs] : by_class) {
    std::cout << "    class " << cls << " median R^2 by quartile:";
    double prev = INFINITY;
    bool decreasing = true;
    for (const auto& q : qs) {
      const double m = median(q);
      std::cout << ' ' << m;
      decreasing = decreasing && m < prev;
      prev = m;
    }
    std::cout << '\n';
    check.expect(decreasing, "strictly decreasing in class " + cls);
  }
  check.expect(read_json(run.dir / "analysis.json")["all_strictly_decreasing"] == true, "analysis.json summary");
  return check.failures == 0;
}

bool criterion_invariants() {
  Check check;
  Rng rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  const int cases = 100;
  int prox_bad = 0, median_bad = 0, affine_bad = 0, smacof_bad = 0, classical_bad = 0, f1_bad = 0, r2_bad = 0;

  for (int t = 0; t < cases; ++t) {
    const Dataset d = test::random_dataset(rng, 10 + uniform_index(rng, 40), 3, 2 + static_cast<int>(uniform_index(rng, 2)), 0.7, 2);
    ForestParams params;
    params.n_trees = 1 + static_cast<int>(uniform_index(rng, 25));
    params.seed = static_cast<std::uint64_t>(t);
    const Forest f = fit_forest(d, params, 1);
    // Proximity: symmetric by storage, values in [0, 1], unit diagonal for the original kind.
    const auto p = proximity_matrix(f, d);
    for (std::size_t i = 0; i < d.n(); ++i) {
      if (p(i, i) != 1.0) ++prox_bad;
      for (std::size_t j = 0; j < d.n(); ++j)
        if (p(i, j) != p(j, i) || p(i, j) < 0.0 || p(i, j) > 1.0) ++prox_bad;
    }
    // In-class median of O is zero.
    const auto s = compute_outlier_scores(p, d.labels(), d.n_classes());
    for (std::size_t J = 0; J < d.n_classes(); ++J) {
      std::vector<double> own;
      for (std::size_t i = 0; i < d.n(); ++i)
        if (static_cast<std::size_t>(d.label(i)) == J && std::isfinite(s.measure(i, J))) own.push_back(s.measure(i, J));
      if (!own.empty() && std::abs(median(own)) > 1e-9) ++median_bad;
    }
  }

  for (int t = 0; t < cases; ++t) {
    // Standardization is invariant to positive scaling and translation of the raw measures.
    std::vector<double> sample(5 + uniform_index(rng, 30));
    for (double& v : sample) v = std::exp(g(rng));
    const double a = 0.01 + 100 * uniform_unit(rng), b = 50 * g(rng);
    std::vector<double> moved(sample);
    for (double& v : moved) v = a * v + b;
    const auto cs = center_spread(sample, DeviationKind::median_absolute);
    const auto cm = center_spread(moved, DeviationKind::median_absolute);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double z = standardize(sample[i], cs, true), zm = standardize(moved[i], cm, true);
      if (std::abs(z - zm) > 1e-9 * std::max(1.0, std::abs(z))) ++affine_bad;
    }
  }

  for (int t = 0; t < cases; ++t) {
    const std::size_t n = 3 + uniform_index(rng, 20);
    const std::size_t dims = 2 + uniform_index(rng, 3);
    Matrix<double> hi(n, dims);
    for (double& v : hi.data()) v = g(rng);
    Matrix<double> planar(n, 2);
    for (double& v : planar.data()) v = g(rng);
    const auto dist = [n](const Matrix<double>& x) {
      Matrix<double> d(n, n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
          d(i, j) = std::sqrt(s);
        }
      return d;
    };
    MdsOptions o;
    o.seed = static_cast<std::uint64_t>(t);
    const auto e = mds_embed(dist(hi), o);
    for (std::size_t k = 1; k < e.stress_trace.size(); ++k)
      if (e.stress_trace[k] > e.stress_trace[k - 1]) ++smacof_bad;
    o.method = MdsMethod::classical;
    const auto dp = dist(planar);
    const auto c = mds_embed(dp, o);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double de = std::hypot(c.coordinates(i, 0) - c.coordinates(j, 0), c.coordinates(i, 1) - c.coordinates(j, 1));
        if (std::abs(de - dp(i, j)) > 1e-6) ++classical_bad;
      }
  }

  for (int t = 0; t < cases; ++t) {
    const std::size_t k = 2 + uniform_index(rng, 4), n = 5 + uniform_index(rng, 100);
    std::vector<int> y(n), pred(n);
    Matrix<double> proba(n, k, 1.0 / static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(uniform_index(rng, k));
      pred[i] = uniform_unit(rng) < 0.6 ? y[i] : static_cast<int>(uniform_index(rng, k));
    }
    const auto r = classification_report(y, pred, proba);
    if (std::abs(r.f1_micro - r.accuracy) > 1e-12) ++f1_bad;

    const std::size_t m = 3 + uniform_index(rng, 40);
    std::vector<double> x(m), z(m), ys(m);
    const double a = (uniform_unit(rng) < 0.5 ? -1 : 1) * (0.1 + 10 * uniform_unit(rng)), b = 10 * g(rng);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = g(rng);
      z[i] = a * x[i] + b;
      ys[i] = 0.5 * x[i] + g(rng);
    }
    if (std::abs(linear_regression_r2(x, ys).r_squared - linear_regression_r2(z, ys).r_squared) > 1e-9) ++r2_bad;
  }

  std::cout << "    " << cases << " cases each; violations: proximity " << prox_bad << ", in-class median " << median_bad
            << ", standardization " << affine_bad << ", smacof " << smacof_bad << ", classical " << classical_bad
            << ", micro-F1 " << f1_bad << ", R^2 " << r2_bad << '\n';
  check.expect(prox_bad + median_bad + affine_bad + smacof_bad + classical_bad + f1_bad + r2_bad == 0, "invariants");
  return check.failures == 0;
}

int run_cli(const fs::path& root, const std::string& args) {
  const std::string cmd = std::string(kOutputRootEnv) + "=" + root.string() + " " + RFPROX_BINARY + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool criterion_determinism() {
  Check check;
  test::TempDir work("acc_c8");
  test::write_text(work / "synth.json", R"({"synthetic": {"seed": 5}, "seed": 11, "forest": {"n_trees": 80},
    "grid": {"enabled": true, "n_trees": [40, 80], "max_depth": [8, null], "max_features": ["sqrt"],
             "criterion": ["gini"], "k": 3}})");
  const std::string iris = "--data " + test::data_file("iris.csv").string() + " --label label";
  const std::string synth = "-c " + (work / "synth.json").string();
  const std::vector<std::string> steps{
      "train " + iris + " --n-trees 150 -o iris",
      "score " + iris + " --kind gap --scope train -o iris",
      "outliers " + iris + " --kind oob --scope train -o iris",
      "mds " + iris + " -o iris",
      "report -o iris",
      "train " + synth + " -o synth",
      "score " + synth + " -o synth",
      "outliers " + synth + " -o synth",
      "mds " + synth + " --classes cat_0 cat_1 -o synth",
      "analyze " + synth + " -o synth",
      "report " + synth + " -o synth"};
  // Same location both times, so echoed paths match; only the thread count changes.
  const fs::path root = work / "root";
  std::map<std::string, std::string> first;
  std::size_t compared = 0;
  for (unsigned threads : {1u, 4u}) {
    fs::remove_all(root);
    fs::create_directories(root);
    for (const auto& step : steps)
      check.expect(run_cli(root, step + " --threads " + std::to_string(threads)) == 0, "exit code of '" + step + "'");
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), root).string();
      const std::string body = slurp(entry.path());
      if (threads == 1) {
        first[rel] = body;
        continue;
      }
      const auto it = first.find(rel);
      check.expect(it != first.end(), "only in the second run: " + rel);
      if (it == first.end()) continue;
      check.expect(it->second == body, "differs: " + rel);
      ++compared;
    }
  }
  check.expect(compared == first.size(), "same file set");
  std::cout << "    " << compared << " files compared between --threads 1 and --threads 4\n";
  check.expect(compared >= 30, "enough outputs compared");
  return check.failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only(argv + 1, argv + argc);
  std::cout.setf(std::ios::fixed);
  std::cout.precision(4);
  std::unique_ptr<SyntheticRun> synth;
  const auto synthetic = [&]() -> const SyntheticRun& {
    if (!synth) synth = std::make_unique<SyntheticRun>();
    return *synth;
  };
  const std::vector<std::pair<std::string, std::function<bool()>>> criteria{
      {"1 classification parity on tuned forests", criterion_classification},
      {"2 fast proximity equals the oracle bitwise", criterion_oracle},
      {"3 outlier measure matches the scalar chain", criterion_eq_chain},
      {"4 outlier counts within plausible ranges", criterion_outlier_counts},
      {"5 injected-record recall", [&] { return criterion_injected(synthetic()); }},
      {"6 median R^2 falls with outlier quartile", [&] { return criterion_quartile_r2(synthetic()); }},
      {"7 invariant suites", criterion_invariants},
      {"8 outputs independent of thread count", criterion_determinism}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name.substr(0, name.find(' ')))) continue;
    const auto start = std::chrono::steady_clock::now();
    std::cout << "criterion " << name << '\n' << std::flush;
    bool ok = false;
    try {
      ok = run();
    } catch (const std::exception& e) {
      std::cout << "    error: " << e.what() << '\n';
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << name << " (" << secs << " s)\n" << std::flush;
    failed += !ok;
  }
  return failed == 0 ? 0 : 1;
}
