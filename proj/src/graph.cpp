#include "ngcn/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ngcn/errors.hpp"
#include "ngcn/rng.hpp"
#include "ngcn/text.hpp"

namespace ngcn {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw DataError("matrix market parse error at line " + std::to_string(line_no) + ": " + msg);
}

struct Line {
  std::string text;
  std::size_t number = 0;
};

// Pulls the next line that is not blank and not a '%' comment.
bool next_content_line(std::istream& in, std::size_t& line_no, Line& out) {
  std::string text;
  while (std::getline(in, text)) {
    ++line_no;
    std::size_t pos = text.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (text[pos] == '%') continue;
    out = {text, line_no};
    return true;
  }
  return false;
}

std::uint64_t pair_key(std::size_t i, std::size_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

}  // namespace

std::vector<NormalizedAdjacency::Entry> NormalizedAdjacency::entries() const {
  std::vector<Entry> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) out.push_back({i, col[k], coeff[k]});
  return out;
}

ParseResult parse_matrix_market(std::istream& in) {
  std::size_t line_no = 0;
  bool symmetric = true;  // bannerless input: one line per undirected pair

  std::string first;
  if (!std::getline(in, first)) throw DataError("matrix market parse error: empty input");
  ++line_no;

  std::size_t rows = 0, cols = 0, declared = 0;
  bool have_size_line = false;
  Line size_line;
  if (lower(first).rfind("%%matrixmarket", 0) == 0) {
    std::istringstream hs(first);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (lower(object) != "matrix") parse_fail(1, "unsupported object '" + object + "'");
    if (lower(format) != "coordinate") parse_fail(1, "only coordinate format is supported");
    const std::string f = lower(field);
    if (f != "real" && f != "integer")
      parse_fail(1, "unsupported field '" + field + "' (weights require real or integer)");
    const std::string s = lower(symmetry);
    if (s == "symmetric")
      symmetric = true;
    else if (s == "general")
      symmetric = false;
    else
      parse_fail(1, "unsupported symmetry '" + symmetry + "'");
  } else {
    const std::size_t pos = first.find_first_not_of(" \t\r");
    if (pos != std::string::npos && first[pos] != '%') {
      size_line = {first, 1};
      have_size_line = true;
    }
  }
  if (!have_size_line && !next_content_line(in, line_no, size_line))
    throw DataError("matrix market parse error: missing size line");

  {
    std::istringstream ss(size_line.text);
    long long r = 0, c = 0, m = 0;
    if (!(ss >> r >> c >> m) || r <= 0 || c <= 0 || m < 0)
      parse_fail(size_line.number, "malformed size header '" + size_line.text + "'");
    std::string rest;
    if (ss >> rest) parse_fail(size_line.number, "trailing tokens after size header");
    if (r != c) parse_fail(size_line.number, "adjacency matrix must be square");
    rows = static_cast<std::size_t>(r);
    cols = static_cast<std::size_t>(c);
    declared = static_cast<std::size_t>(m);
  }
  (void)cols;

  // key = (min,max) for symmetric input, (i,j) as written for general input
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  std::size_t dropped = 0;

  for (std::size_t e = 0; e < declared; ++e) {
    Line entry;
    if (!next_content_line(in, line_no, entry))
      throw DataError("matrix market parse error: expected " + std::to_string(declared) +
                      " entries, got " + std::to_string(e));
    std::istringstream ss(entry.text);
    long long i1 = 0, j1 = 0;
    double w = 0.0;
    if (!(ss >> i1 >> j1 >> w)) parse_fail(entry.number, "non-numeric entry '" + entry.text + "'");
    std::string rest;
    if (ss >> rest) parse_fail(entry.number, "trailing tokens in entry");
    if (i1 < 1 || j1 < 1 || static_cast<std::size_t>(i1) > rows || static_cast<std::size_t>(j1) > rows)
      parse_fail(entry.number, "index out of range");
    if (!std::isfinite(w)) parse_fail(entry.number, "non-finite weight");
    if (!(w > 0.0)) parse_fail(entry.number, "non-positive weight");
    std::size_t i = static_cast<std::size_t>(i1) - 1;
    std::size_t j = static_cast<std::size_t>(j1) - 1;
    if (i == j) {
      ++dropped;
      continue;
    }
    std::pair<std::size_t, std::size_t> key =
        symmetric ? std::make_pair(std::min(i, j), std::max(i, j)) : std::make_pair(i, j);
    auto [it, inserted] = seen.emplace(key, w);
    if (!inserted)
      parse_fail(entry.number, "duplicate entry for (" + std::to_string(i1) + ", " + std::to_string(j1) + ")");
    (void)it;
  }
  {
    Line extra;
    if (next_content_line(in, line_no, extra)) parse_fail(extra.number, "more entries than declared");
  }

  UndirectedWeightedGraph g;
  g.n_nodes = rows;
  if (symmetric) {
    for (const auto& [key, w] : seen) g.edges.push_back({key.first, key.second, w});
  } else {
    for (const auto& [key, w] : seen) {
      auto [i, j] = key;
      auto mirror = seen.find({j, i});
      if (mirror == seen.end() || mirror->second != w)
        throw DataError("matrix market parse error: asymmetric general matrix at (" +
                        std::to_string(std::min(i, j) + 1) + ", " +
                        std::to_string(std::max(i, j) + 1) + ")");
      if (i < j) g.edges.push_back({i, j, w});
    }
  }
  // std::map iteration is already (i, j)-sorted
  return {std::move(g), dropped};
}

ParseResult parse_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_matrix_market(in);
}

UndirectedWeightedGraph normalize_weights(const UndirectedWeightedGraph& g) {
  if (g.edges.empty()) throw DataError("normalize_weights: graph has no edges");
  if (g.weight_scale.has_value()) return g;
  double lo = g.edges.front().w, hi = g.edges.front().w;
  for (const Edge& e : g.edges) {
    lo = std::min(lo, e.w);
    hi = std::max(hi, e.w);
  }
  if (lo == hi) throw DataError("normalize_weights: degenerate scale (all weights equal)");
  UndirectedWeightedGraph out = g;
  for (Edge& e : out.edges) e.w = e.w / hi;
  out.weight_scale = WeightScale{0.0, hi};
  return out;
}

EdgeSplit split_edges(const UndirectedWeightedGraph& g, std::uint64_t seed) {
  const std::size_t m = g.edges.size();
  if (m < 10) throw DataError("split_edges: need at least 10 edges");
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = k;
  Rng rng(seed);
  rng.shuffle(order);

  EdgeSplit split;
  split.seed = seed;
  auto shard_begin = [m](std::size_t s) { return s * m / 10; };
  for (std::size_t s = 0; s < 10; ++s) {
    std::vector<Edge>& dst = s < 7 ? split.train : (s == 7 ? split.validation : split.test);
    for (std::size_t k = shard_begin(s); k < shard_begin(s + 1); ++k) dst.push_back(g.edges[order[k]]);
  }
  return split;
}

void check_train_edges(const UndirectedWeightedGraph& g, const std::vector<Edge>& train) {
  std::unordered_map<std::uint64_t, double> known;
  known.reserve(g.edges.size());
  for (const Edge& e : g.edges) known.emplace(pair_key(e.i, e.j), e.w);
  for (const Edge& e : train) {
    if (!(e.i < e.j) || e.j >= g.n_nodes) throw DataError("training edge is not canonical");
    auto it = known.find(pair_key(e.i, e.j));
    if (it == known.end() || it->second != e.w)
      throw DataError("training edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                      ") is not an edge of the graph");
  }
}

NormalizedAdjacency build_normalized_adjacency(const UndirectedWeightedGraph& g,
                                               const std::vector<Edge>& train) {
  check_train_edges(g, train);
  const std::size_t n = g.n_nodes;

  NormalizedAdjacency adj;
  adj.n_nodes = n;
  adj.degree.assign(n, 0.0);
  for (const Edge& e : train) {
    adj.degree[e.i] += e.w;
    adj.degree[e.j] += e.w;
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (const Edge& e : train) {
    const double c = e.w / std::sqrt(adj.degree[e.i] * adj.degree[e.j]);
    rows[e.i].emplace_back(e.j, c);
    rows[e.j].emplace_back(e.i, c);
  }
  adj.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    adj.row_ptr[i + 1] = adj.row_ptr[i] + rows[i].size();
  }
  adj.col.reserve(adj.row_ptr[n]);
  adj.coeff.reserve(adj.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i)
    for (auto [j, c] : rows[i]) {
      adj.col.push_back(j);
      adj.coeff.push_back(c);
    }
  return adj;
}

void write_edge_list(std::ostream& out, const std::vector<Edge>& edges) {
  for (const Edge& e : edges)
    out << e.i << ' ' << e.j << ' ' << fmt_double(e.w) << '\n';
}

std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    std::size_t pos = text.find_first_not_of(" \t\r");
    if (pos == std::string::npos || text[pos] == '#' || text[pos] == '%') continue;
    std::istringstream ss(text);
    long long i = 0, j = 0;
    double w = 0.0;
    if (!(ss >> i >> j >> w) || i < 0 || j < 0)
      throw DataError("edge list parse error at line " + std::to_string(line_no));
    if (!(static_cast<std::size_t>(i) < static_cast<std::size_t>(j)))
      throw DataError("edge list parse error at line " + std::to_string(line_no) +
                      ": expected i < j");
    if (!std::isfinite(w) || !(w > 0.0))
      throw DataError("edge list parse error at line " + std::to_string(line_no) +
                      ": weight must be finite and positive");
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
  }
  return edges;
}

UndirectedWeightedGraph read_edge_list_graph(std::istream& in) {
  UndirectedWeightedGraph g;
  g.edges = read_edge_list(in);
  for (const Edge& e : g.edges) g.n_nodes = std::max(g.n_nodes, e.j + 1);
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return g;
}

std::string split_manifest_json(const EdgeSplit& split) {
  nlohmann::json j;
  j["seed"] = split.seed;
  j["n_edges"] = split.train.size() + split.validation.size() + split.test.size();
  j["counts"] = {{"train", split.train.size()},
                 {"validation", split.validation.size()},
                 {"test", split.test.size()}};
  j["shards"] = {{"train", {0, 1, 2, 3, 4, 5, 6}}, {"validation", {7}}, {"test", {8, 9}}};
  return j.dump(2) + "\n";
}

}  // namespace ngcn
