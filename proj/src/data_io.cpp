// SPDX-License-Identifier: Apache-2.0
#include "bigcn/data_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace bigcn {

namespace fs = std::filesystem;

std::vector<Index> Dataset::nodes_in(Split s) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < masks.size(); ++i)
    if (masks[i] == s) out.push_back(static_cast<Index>(i));
  return out;
}

void Dataset::validate() const {
  const Index n = graph.num_nodes();
  if (features.rows() != n) throw FormatError("Dataset: feature rows differ from node count");
  if (static_cast<Index>(labels.size()) != n) throw FormatError("Dataset: label count differs from node count");
  if (static_cast<Index>(masks.size()) != n) throw FormatError("Dataset: mask count differs from node count");
  if (num_classes < 0) throw FormatError("Dataset: negative class count");
  if (!features.allFinite()) throw FormatError("Dataset: non-finite feature");
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < -1 || y >= num_classes)
      throw FormatError("Dataset: label " + std::to_string(y) + " out of range at node " + std::to_string(i));
    if (masks[static_cast<std::size_t>(i)] != Split::none && y < 0)
      throw FormatError("Dataset: node " + std::to_string(i) + " is in a split but unlabeled");
  }
}

namespace {

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw FormatError("missing file " + path.string());
  }
  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.filename().string() + ":" + std::to_string(line_no_) + ": " + what);
  }
  std::size_t line_no() const { return line_no_; }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

// Splits on single spaces/tabs, skipping empty fields.
std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Index read_meta_value(LineReader& r, const std::string& key) {
  std::string line;
  if (!r.next(line)) r.fail("expected '" + key + "=<int>'");
  const std::string prefix = key + "=";
  if (line.rfind(prefix, 0) != 0) r.fail("expected '" + key + "=<int>'");
  Index v = 0;
  if (!parse_number(std::string_view(line).substr(prefix.size()), v) || v < 0) r.fail("bad integer");
  return v;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  LineReader meta(dir / "meta.txt");
  const Index n = read_meta_value(meta, "n");
  const Index d = read_meta_value(meta, "d");
  const Index classes = read_meta_value(meta, "classes");

  Dataset ds;
  ds.num_classes = static_cast<int>(classes);

  std::vector<Edge> edges;
  {
    LineReader r(dir / "edges.txt");
    std::string line;
    while (r.next(line)) {
      const auto f = fields(line);
      if (f.empty()) continue;
      Index u = 0;
      Index v = 0;
      if (f.size() != 2 || !parse_number(f[0], u) || !parse_number(f[1], v)) r.fail("expected 'u v'");
      if (u < 0 || v < 0 || u >= n || v >= n) r.fail("node index out of range [0, " + std::to_string(n) + ")");
      if (u == v) r.fail("self-loop");
      if (u > v) r.fail("edge must be written with u < v");
      edges.emplace_back(u, v);
    }
    std::vector<Edge> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw FormatError("edges.txt: duplicate edge");
  }
  ds.graph = Graph::from_edges(n, edges);

  ds.features.resize(n, d);
  {
    LineReader r(dir / "features.txt");
    std::string line;
    Index i = 0;
    while (r.next(line)) {
      if (i >= n) {
        if (fields(line).empty()) continue;
        r.fail("more than n feature rows");
      }
      const auto f = fields(line);
      if (static_cast<Index>(f.size()) != d)
        r.fail("expected " + std::to_string(d) + " values, found " + std::to_string(f.size()));
      for (Index j = 0; j < d; ++j) {
        double v = 0.0;
        if (!parse_number(f[static_cast<std::size_t>(j)], v) || !std::isfinite(v)) r.fail("bad real");
        ds.features(i, j) = v;
      }
      ++i;
    }
    if (i != n) throw FormatError("features.txt: expected " + std::to_string(n) + " rows, found " + std::to_string(i));
  }

  ds.labels.reserve(static_cast<std::size_t>(n));
  {
    LineReader r(dir / "labels.txt");
    std::string line;
    while (r.next(line)) {
      const auto f = fields(line);
      if (f.empty() && static_cast<Index>(ds.labels.size()) == n) continue;
      int y = 0;
      if (f.size() != 1 || !parse_number(f[0], y)) r.fail("expected an integer label");
      if (y < -1 || y >= classes) r.fail("label out of range");
      ds.labels.push_back(y);
    }
    if (static_cast<Index>(ds.labels.size()) != n)
      throw FormatError("labels.txt: expected " + std::to_string(n) + " lines, found " + std::to_string(ds.labels.size()));
  }

  ds.masks.reserve(static_cast<std::size_t>(n));
  {
    LineReader r(dir / "masks.txt");
    std::string line;
    while (r.next(line)) {
      const auto f = fields(line);
      if (f.empty() && static_cast<Index>(ds.masks.size()) == n) continue;
      if (f.size() != 1) r.fail("expected one of train|val|test|none");
      if (f[0] == "train") ds.masks.push_back(Split::train);
      else if (f[0] == "val") ds.masks.push_back(Split::val);
      else if (f[0] == "test") ds.masks.push_back(Split::test);
      else if (f[0] == "none") ds.masks.push_back(Split::none);
      else r.fail("expected one of train|val|test|none");
    }
    if (static_cast<Index>(ds.masks.size()) != n)
      throw FormatError("masks.txt: expected " + std::to_string(n) + " lines, found " + std::to_string(ds.masks.size()));
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("meta.txt");
    out << "n=" << ds.num_nodes() << "\n" << "d=" << ds.features.cols() << "\n" << "classes=" << ds.num_classes << "\n";
  }
  {
    auto out = open("edges.txt");
    for (const auto& [u, v] : ds.graph.edges()) out << u << ' ' << v << '\n';
  }
  {
    auto out = open("features.txt");
    for (Index i = 0; i < ds.features.rows(); ++i) {
      for (Index j = 0; j < ds.features.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(ds.features(i, j));
      }
      out << '\n';
    }
  }
  {
    auto out = open("labels.txt");
    for (int y : ds.labels) out << y << '\n';
  }
  {
    auto out = open("masks.txt");
    for (Split s : ds.masks) {
      switch (s) {
        case Split::train: out << "train\n"; break;
        case Split::val: out << "val\n"; break;
        case Split::test: out << "test\n"; break;
        case Split::none: out << "none\n"; break;
      }
    }
  }
}

void SbmParams::validate() const {
  if (communities < 1 || nodes_per_community < 1) throw Error("sbm: need at least one community and node");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_in) || !prob(p_out)) throw Error("sbm: probabilities must lie in [0, 1]");
  if (!(p_in > p_out)) throw Error("sbm: p_in must exceed p_out");
  if (feature_dim < 1 || feature_blocks < 1 || feature_blocks > feature_dim)
    throw Error("sbm: need 1 <= feature_blocks <= feature_dim");
  if (signal_scale < 0.0 || latent_scale < 0.0 || noise_sigma < 0.0) throw Error("sbm: scales must be >= 0");
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0)
    throw Error("sbm: split fractions must be non-negative and sum to at most 1");
}

Dataset sbm_generate(const SbmParams& params) {
  params.validate();
  const Index n = params.communities * params.nodes_per_community;
  const Index d = params.feature_dim;
  Dataset ds;
  ds.num_classes = params.communities;
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(i / params.nodes_per_community);

  CounterRng graph_rng(params.seed, Stream::sbm_graph);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same = ds.labels[static_cast<std::size_t>(i)] == ds.labels[static_cast<std::size_t>(j)];
      if (graph_rng.uniform() < (same ? params.p_in : params.p_out)) edges.emplace_back(i, j);
    }
  }
  ds.graph = Graph::from_edges(n, edges);

  // Column j belongs to block j * blocks / d, so blocks are contiguous and
  // differ in size by at most one.
  std::vector<Index> block_of(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) block_of[static_cast<std::size_t>(j)] = j * params.feature_blocks / d;

  CounterRng feat_rng(params.seed, Stream::sbm_features);
  DenseMatrix class_mean(params.communities, params.feature_blocks);
  for (Index c = 0; c < class_mean.rows(); ++c)
    for (Index b = 0; b < class_mean.cols(); ++b) class_mean(c, b) = params.signal_scale * feat_rng.normal();
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    Vector latent(params.feature_blocks);
    for (Index b = 0; b < latent.size(); ++b) latent(b) = params.latent_scale * feat_rng.normal();
    const int c = ds.labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < d; ++j) {
      const Index b = block_of[static_cast<std::size_t>(j)];
      ds.features(i, j) = class_mean(c, b) + latent(b) + params.noise_sigma * feat_rng.normal();
    }
  }

  CounterRng mask_rng(params.seed, Stream::sbm_masks);
  ds.masks.assign(static_cast<std::size_t>(n), Split::none);
  for (int c = 0; c < params.communities; ++c) {
    const Index m = params.nodes_per_community;
    const auto perm = random_permutation(static_cast<std::size_t>(m), mask_rng);
    const auto n_train = static_cast<std::size_t>(std::llround(params.train_fraction * static_cast<double>(m)));
    const auto n_val = static_cast<std::size_t>(std::llround(params.val_fraction * static_cast<double>(m)));
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const auto node = static_cast<std::size_t>(c * m) + perm[k];
      ds.masks[node] = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    }
  }
  ds.validate();
  return ds;
}

namespace {

std::uint64_t pair_key(Index u, Index v) {
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

}  // namespace

std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, CounterRng& rng, const std::vector<Edge>& exclude) {
  const Index n = g.num_nodes();
  const auto total_pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  std::unordered_set<std::uint64_t> taken;
  for (const auto& [u, v] : exclude) taken.insert(pair_key(std::min(u, v), std::max(u, v)));
  std::uint64_t blocked = static_cast<std::uint64_t>(g.num_edges());
  for (const auto& [u, v] : exclude)
    if (!g.has_edge(u, v)) ++blocked;  // exclude may overlap the graph
  if (n < 2 || total_pairs < blocked + count) throw Error("sample_non_edges: not enough non-edges");

  std::vector<Edge> out;
  out.reserve(count);
  while (out.size() < count) {
    auto u = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    auto v = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (g.has_edge(u, v)) continue;
    if (!taken.insert(pair_key(u, v)).second) continue;
    out.emplace_back(u, v);
  }
  return out;
}

EdgeSplit split_edges(const Graph& g, const EdgeRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw Error("split_edges: ratios must be non-negative and sum to 1");
  std::vector<Edge> edges = g.edges();
  const std::size_t m = edges.size();
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(m)));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(m)));
  if ((ratios.val > 0.0 && n_val == 0) || (ratios.test > 0.0 && n_test == 0) ||
      (ratios.train > 0.0 && n_val + n_test >= m))
    throw Error("split_edges: graph too small for the requested split");

  CounterRng rng(seed, Stream::edge_split);
  const auto perm = random_permutation(m, rng);
  EdgeSplit out;
  for (std::size_t k = 0; k < m; ++k) {
    const Edge& e = edges[perm[k]];
    if (k < n_val) out.val_pos.push_back(e);
    else if (k < n_val + n_test) out.test_pos.push_back(e);
    else out.train_pos.push_back(e);
  }
  std::sort(out.train_pos.begin(), out.train_pos.end());
  std::sort(out.val_pos.begin(), out.val_pos.end());
  std::sort(out.test_pos.begin(), out.test_pos.end());
  out.message = Graph::from_edges(g.num_nodes(), out.train_pos);

  CounterRng neg_rng = rng.split(1);
  std::vector<Edge> negatives = sample_non_edges(g, n_val + n_test, neg_rng);
  out.val_neg.assign(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.test_neg.assign(negatives.begin() + static_cast<std::ptrdiff_t>(n_val), negatives.end());
  return out;
}

namespace {

constexpr char kMagic[4] = {'B', 'G', 'C', 'N'};

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const fs::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("checkpoint truncated: " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::vector<NamedMatrix>& params, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& p : params) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    for (Index i = 0; i < p.value.rows(); ++i)
      for (Index j = 0; j < p.value.cols(); ++j) write_le<double>(out, p.value(i, j));
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

std::vector<NamedMatrix> load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("missing checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("checkpoint version error: bad magic in " + path.string());
  const auto version = read_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint version error: file has v" + std::to_string(version) + ", expected v" +
                      std::to_string(kCheckpointVersion));
  std::vector<NamedMatrix> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto len = read_le<std::uint32_t>(in, path);
    if (len > (1u << 20)) throw FormatError("checkpoint corrupt: implausible name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError("checkpoint truncated: " + path.string());
    const auto rows = read_le<std::uint64_t>(in, path);
    const auto cols = read_le<std::uint64_t>(in, path);
    if (rows > (1ull << 32) || cols > (1ull << 32)) throw FormatError("checkpoint corrupt: implausible shape");
    DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = read_le<double>(in, path);
    out.push_back({std::move(name), std::move(m)});
  }
  return out;
}

}  // namespace bigcn
