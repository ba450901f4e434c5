#include "rfprox/forest/serialize.hpp"

#include <array>
#include <fstream>

#include "rfprox/errors.hpp"
#include "rfprox/io/binary.hpp"

namespace rfprox {

namespace {

constexpr std::array<char, 8> kMagic{'R', 'F', 'P', 'X', 'F', 'R', 'S', 'T'};
constexpr std::uint32_t kSaneCount = 1u << 28;

std::uint32_t read_count(std::istream& in) {
  const auto n = io::read<std::uint32_t>(in);
  if (n > kSaneCount) throw FormatError("count out of range");
  return n;
}

}  // namespace

void save_forest(std::ostream& out, const Forest& forest) {
  out.write(kMagic.data(), kMagic.size());
  io::write<std::uint32_t>(out, kForestFormatVersion);

  const auto& p = forest.params();
  io::write<std::int32_t>(out, p.n_trees);
  io::write<std::int32_t>(out, p.max_depth ? *p.max_depth : -1);
  io::write<std::uint8_t>(out, static_cast<std::uint8_t>(p.max_features));
  io::write<std::uint8_t>(out, static_cast<std::uint8_t>(p.criterion));
  io::write<std::int32_t>(out, p.min_samples_leaf);
  io::write<std::uint64_t>(out, p.seed);
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(p.class_weights.size()));
  for (double w : p.class_weights) io::write<double>(out, w);

  const auto& schema = forest.schema();
  io::write_string(out, schema.label_column);
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(schema.columns.size()));
  for (const auto& col : schema.columns) {
    io::write_string(out, col.name);
    io::write<std::uint8_t>(out, static_cast<std::uint8_t>(col.kind));
    io::write<std::uint32_t>(out, static_cast<std::uint32_t>(col.vocabulary.size()));
    for (const auto& v : col.vocabulary) io::write_string(out, v);
  }

  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(forest.n_classes()));
  for (const auto& name : forest.class_names()) io::write_string(out, name);
  for (double w : forest.class_weights()) io::write<double>(out, w);

  io::write<std::uint64_t>(out, forest.n_train());
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(forest.n_trees()));
  for (std::size_t t = 0; t < forest.n_trees(); ++t) {
    const auto& tree = forest.trees()[t];
    io::write<std::int32_t>(out, tree.depth());
    io::write<std::uint32_t>(out, static_cast<std::uint32_t>(tree.nodes().size()));
    for (const auto& node : tree.nodes()) {
      io::write<std::int32_t>(out, node.feature);
      io::write<double>(out, node.threshold);
      io::write<std::int32_t>(out, node.left);
      io::write<std::int32_t>(out, node.right);
      io::write<std::int32_t>(out, node.leaf);
    }
    io::write<std::uint32_t>(out, static_cast<std::uint32_t>(tree.n_leaves()));
    for (double v : tree.leaf_distributions().data()) io::write<double>(out, v);
    for (std::uint32_t c : forest.bootstrap_counts(t)) io::write<std::uint32_t>(out, c);
  }
  if (!out) throw Error("failed writing model");
}

Forest load_forest(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not a forest model file");
  const auto version = io::read<std::uint32_t>(in);
  if (version != kForestFormatVersion) throw FormatError("unsupported model version " + std::to_string(version));

  ForestParams p;
  p.n_trees = io::read<std::int32_t>(in);
  const auto depth = io::read<std::int32_t>(in);
  if (depth >= 0) p.max_depth = depth;
  const auto mf = io::read<std::uint8_t>(in);
  const auto crit = io::read<std::uint8_t>(in);
  if (mf > 2 || crit > 2) throw FormatError("bad enum value");
  p.max_features = static_cast<MaxFeatures>(mf);
  p.criterion = static_cast<Criterion>(crit);
  p.min_samples_leaf = io::read<std::int32_t>(in);
  p.seed = io::read<std::uint64_t>(in);
  p.class_weights.resize(read_count(in));
  for (double& w : p.class_weights) w = io::read<double>(in);

  FeatureSchema schema;
  schema.label_column = io::read_string(in);
  schema.columns.resize(read_count(in));
  for (auto& col : schema.columns) {
    col.name = io::read_string(in);
    const auto kind = io::read<std::uint8_t>(in);
    if (kind > 1) throw FormatError("bad column kind");
    col.kind = static_cast<FeatureKind>(kind);
    col.vocabulary.resize(read_count(in));
    for (auto& v : col.vocabulary) v = io::read_string(in);
  }

  std::vector<std::string> class_names(read_count(in));
  for (auto& name : class_names) name = io::read_string(in);
  std::vector<double> weights(class_names.size());
  for (double& w : weights) w = io::read<double>(in);

  const auto n_train = io::read<std::uint64_t>(in);
  if (n_train > kSaneCount) throw FormatError("n_train out of range");
  const auto n_trees = read_count(in);
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::uint32_t>> bootstrap;
  trees.reserve(n_trees);
  bootstrap.reserve(n_trees);
  const std::size_t k = class_names.size();
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const auto tree_depth = io::read<std::int32_t>(in);
    std::vector<TreeNode> nodes(read_count(in));
    for (auto& node : nodes) {
      node.feature = io::read<std::int32_t>(in);
      node.threshold = io::read<double>(in);
      node.left = io::read<std::int32_t>(in);
      node.right = io::read<std::int32_t>(in);
      node.leaf = io::read<std::int32_t>(in);
    }
    const auto n_leaves = read_count(in);
    std::vector<double> dist(static_cast<std::size_t>(n_leaves) * k);
    for (double& v : dist) v = io::read<double>(in);
    // Structural checks so a corrupt file cannot send routing out of bounds.
    for (const auto& node : nodes) {
      if (node.is_leaf()) {
        if (static_cast<std::uint32_t>(node.leaf) >= n_leaves) throw FormatError("leaf id out of range");
      } else if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= schema.columns.size() ||
                 node.left <= 0 || node.right <= 0 || static_cast<std::size_t>(node.left) >= nodes.size() ||
                 static_cast<std::size_t>(node.right) >= nodes.size()) {
        throw FormatError("malformed tree node");
      }
    }
    std::vector<std::uint32_t> counts(n_train);
    for (auto& c : counts) c = io::read<std::uint32_t>(in);
    trees.emplace_back(std::move(nodes), Matrix<double>(n_leaves, k, std::move(dist)), tree_depth);
    bootstrap.push_back(std::move(counts));
  }
  return Forest(std::move(p), std::move(schema), std::move(class_names), std::move(weights), std::move(trees),
                std::move(bootstrap));
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  save_forest(out, forest);
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return load_forest(in);
}

}  // namespace rfprox
