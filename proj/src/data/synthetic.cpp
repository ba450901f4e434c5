#include "rfprox/data/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "rfprox/data/csv.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/rng.hpp"

namespace rfprox {

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw InvalidSpec("n_classes must be at least 2");
  if (records_per_class < 4) throw InvalidSpec("records_per_class must be at least 4");
  if (numeric_dims < n_classes) throw InvalidSpec("numeric_dims must be >= n_classes");
  if (!(class_separation >= 0.0)) throw InvalidSpec("class_separation must be nonnegative");
  if (!(within_spread > 0.0)) throw InvalidSpec("within_spread must be positive");
  if (!(contamination_fraction >= 0.0 && contamination_fraction < 1.0)) {
    throw InvalidSpec("contamination_fraction must lie in [0, 1)");
  }
  if (!(category_fidelity >= 0.0 && category_fidelity <= 1.0)) throw InvalidSpec("category_fidelity must lie in [0, 1]");
  for (int v : categorical_vocab_sizes) {
    if (v < 2) throw InvalidSpec("categorical vocabularies need at least 2 values");
  }
  if (!(beta_min <= beta_max)) throw InvalidSpec("beta_min must not exceed beta_max");
  if (!(noise_base > 0.0) || !(noise_growth >= 0.0) || !(benchmark_vol > 0.0)) {
    throw InvalidSpec("noise and volatility parameters must be positive");
  }
  if (horizon < 3) throw InvalidSpec("horizon must be at least 3 periods");
}

namespace {

// Streams of the generator; each part of the sample draws from its own stream.
enum Stream : std::uint64_t { kLayout = 1, kFeatures = 2, kMarket = 3, kIdiosyncratic = 4 };

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto k = static_cast<std::size_t>(spec.n_classes);
  const auto per_class = static_cast<std::size_t>(spec.records_per_class);
  const auto p_num = static_cast<std::size_t>(spec.numeric_dims);
  const std::size_t p_cat = spec.categorical_vocab_sizes.size();
  const std::size_t n = k * per_class;
  const auto injected_per_class = static_cast<std::size_t>(
      std::llround(spec.contamination_fraction * static_cast<double>(per_class)));

  // Centers on scaled axes: |c_a - c_b| = separation for a != b.
  const double axis = spec.class_separation / std::sqrt(2.0);
  auto center = [&](std::size_t c, std::size_t dim) { return dim == c ? axis : 0.0; };

  Rng layout = make_rng(spec.seed, kLayout);
  std::vector<std::vector<int>> preferred(k, std::vector<int>(p_cat));
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < p_cat; ++f) {
      preferred[c][f] = static_cast<int>(uniform_index(layout, static_cast<std::size_t>(spec.categorical_vocab_sizes[f])));
    }
  }

  FeatureSchema schema;
  schema.label_column = "category";
  for (std::size_t f = 0; f < p_num; ++f) schema.columns.push_back({"alloc_" + std::to_string(f), FeatureKind::numeric, {}});
  for (std::size_t f = 0; f < p_cat; ++f) {
    Column col{"attr_" + std::to_string(f), FeatureKind::categorical, {}};
    for (int v = 0; v < spec.categorical_vocab_sizes[f]; ++v) col.vocabulary.push_back("v" + std::to_string(v));
    schema.columns.push_back(std::move(col));
  }
  std::vector<std::string> class_names;
  for (std::size_t c = 0; c < k; ++c) class_names.push_back("cat_" + std::to_string(c));

  SyntheticData out;
  Matrix<double> features(n, p_num + p_cat);
  std::vector<int> labels(n);
  out.is_injected.assign(n, false);
  out.source_class.assign(n, 0);
  out.center_distance.assign(n, 0.0);

  Rng feat = make_rng(spec.seed, kFeatures);
  std::normal_distribution<double> gauss(0.0, 1.0);  // one per stream: it caches a draw
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < per_class; ++r) {
      const std::size_t i = c * per_class + r;
      labels[i] = static_cast<int>(c);
      // The first injected_per_class slots of each class are contamination.
      std::size_t source = c;
      if (r < injected_per_class) {
        source = (c + 1 + uniform_index(feat, k - 1)) % k;
        out.is_injected[i] = true;
      }
      out.source_class[i] = static_cast<int>(source);
      double dist2 = 0.0;
      for (std::size_t f = 0; f < p_num; ++f) {
        const double v = center(source, f) + spec.within_spread * gauss(feat);
        features(i, f) = v;
        dist2 += (v - center(c, f)) * (v - center(c, f));
      }
      out.center_distance[i] = std::sqrt(dist2);
      for (std::size_t f = 0; f < p_cat; ++f) {
        const auto vocab = static_cast<std::size_t>(spec.categorical_vocab_sizes[f]);
        const bool keep = uniform_unit(feat) < spec.category_fidelity;
        features(i, p_num + f) = keep ? preferred[source][f] : static_cast<double>(uniform_index(feat, vocab));
      }
    }
  }
  out.dataset = Dataset(std::move(schema), std::move(features), std::move(labels), std::move(class_names));

  // Class benchmarks share a market factor.
  const auto horizon = static_cast<std::size_t>(spec.horizon);
  constexpr double kMarketLoading = 0.8;
  Rng market = make_rng(spec.seed, kMarket);
  std::normal_distribution<double> market_gauss(0.0, 1.0);
  out.benchmarks = Matrix<double>(k, horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double common = market_gauss(market);
    for (std::size_t c = 0; c < k; ++c) {
      const double own = market_gauss(market);
      out.benchmarks(c, t) = spec.benchmark_mean +
                             spec.benchmark_vol * (kMarketLoading * common + std::sqrt(1 - kMarketLoading * kMarketLoading) * own);
    }
  }

  // Distance in units of the typical native distance spread * sqrt(dims).
  const double typical = spec.within_spread * std::sqrt(static_cast<double>(p_num));
  Rng idio = make_rng(spec.seed, kIdiosyncratic);
  std::normal_distribution<double> idio_gauss(0.0, 1.0);
  out.returns = Matrix<double>(n, horizon);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = out.center_distance[i] / typical;
    const double beta = spec.beta_min + (spec.beta_max - spec.beta_min) * std::exp(-0.5 * z * z);
    const double noise = spec.noise_base * (1.0 + spec.noise_growth * z * z);
    const auto c = static_cast<std::size_t>(out.dataset.label(i));
    for (std::size_t t = 0; t < horizon; ++t) {
      out.returns(i, t) = beta * out.benchmarks(c, t) + noise * idio_gauss(idio);
    }
  }
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_dataset_csv(dir / "dataset.csv", data.dataset);
  const auto& d = data.dataset;
  {
    std::ofstream out(dir / "returns.csv", std::ios::binary);
    out << "record_id,period,return\n";
    for (std::size_t i = 0; i < d.n(); ++i) {
      for (std::size_t t = 0; t < data.returns.cols(); ++t) {
        out << d.id(i) << ',' << t << ',' << format_double(data.returns(i, t)) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "benchmarks.csv", std::ios::binary);
    out << "label,period,return\n";
    for (std::size_t c = 0; c < data.benchmarks.rows(); ++c) {
      for (std::size_t t = 0; t < data.benchmarks.cols(); ++t) {
        out << csv_escape(d.class_name(static_cast<int>(c))) << ',' << t << ','
            << format_double(data.benchmarks(c, t)) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "truth.csv", std::ios::binary);
    out << "record_id,is_injected\n";
    for (std::size_t i = 0; i < d.n(); ++i) out << d.id(i) << ',' << (data.is_injected[i] ? 1 : 0) << '\n';
  }
}

}  // namespace rfprox
