#include "stitchlab/lattice.hpp"

#include "stitchlab/common.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stitchlab {

Region::Region(std::vector<int> sites, int graph_size) : mask_(graph_size, 0) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  for (int s : sites) {
    if (s < 0 || s >= graph_size) throw std::invalid_argument("site not in graph");
    mask_[s] = 1;
  }
  sites_ = std::move(sites);
}

Region Region::all(int graph_size) {
  std::vector<int> v(graph_size);
  for (int i = 0; i < graph_size; ++i) v[i] = i;
  return Region(std::move(v), graph_size);
}

Region Region::complement() const {
  std::vector<int> v;
  v.reserve(mask_.size() - sites_.size());
  for (int i = 0; i < graph_size(); ++i)
    if (!mask_[i]) v.push_back(i);
  return Region(std::move(v), graph_size());
}

Region Region::unite(const Region& other) const {
  std::vector<int> v = sites_;
  v.insert(v.end(), other.sites_.begin(), other.sites_.end());
  return Region(std::move(v), graph_size());
}

Region Region::intersect(const Region& other) const {
  std::vector<int> v;
  for (int s : sites_)
    if (other.contains(s)) v.push_back(s);
  return Region(std::move(v), graph_size());
}

Region Region::minus(const Region& other) const {
  std::vector<int> v;
  for (int s : sites_)
    if (!other.contains(s)) v.push_back(s);
  return Region(std::move(v), graph_size());
}

bool Region::subset_of(const Region& other) const {
  for (int s : sites_)
    if (!other.contains(s)) return false;
  return true;
}

bool Region::intersects(const Region& other) const {
  for (int s : sites_)
    if (other.contains(s)) return true;
  return false;
}

std::string Region::to_string() const {
  std::string out = "{";
  for (size_t i = 0; i < sites_.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(sites_[i]);
  }
  return out + "}";
}

LatticeGraph::LatticeGraph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), edges_(std::move(edges)) {
  if (n_ <= 0) throw std::invalid_argument("graph must have at least one site");
  std::vector<std::vector<int>> adj(n_);
  for (auto& [u, v] : edges_) {
    if (u < 0 || u >= n_ || v < 0 || v >= n_) throw std::invalid_argument("site not in graph");
    if (u == v) throw std::invalid_argument("self-loop edge");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  const int inf = std::numeric_limits<int>::max();
  dist_.assign(n_, std::vector<int>(n_, inf));
  for (int s = 0; s < n_; ++s) {
    dist_[s][s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : adj[u]) {
        if (dist_[s][v] > dist_[s][u] + 1) {
          dist_[s][v] = dist_[s][u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  for (int s = 0; s < n_; ++s)
    for (int t = 0; t < n_; ++t) {
      if (dist_[s][t] == inf) throw std::invalid_argument("graph is not connected");
      diameter_ = std::max(diameter_, dist_[s][t]);
    }
}

LatticeGraph LatticeGraph::chain(int length) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < length; ++i) e.emplace_back(i, i + 1);
  return LatticeGraph(length, std::move(e));
}

LatticeGraph LatticeGraph::ring(int length) {
  if (length < 3) throw std::invalid_argument("ring needs at least 3 sites");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < length; ++i) e.emplace_back(i, (i + 1) % length);
  return LatticeGraph(length, std::move(e));
}

LatticeGraph LatticeGraph::grid(int width, int height) {
  std::vector<std::pair<int, int>> e;
  auto id = [width](int x, int y) { return y * width + x; };
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width) e.emplace_back(id(x, y), id(x + 1, y));
      if (y + 1 < height) e.emplace_back(id(x, y), id(x, y + 1));
    }
  return LatticeGraph(width * height, std::move(e));
}

LatticeGraph LatticeGraph::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return LatticeGraph(n, std::move(e));
}

LatticeGraph LatticeGraph::explicit_edges(int n_sites,
                                          const std::vector<std::pair<int, int>>& edges) {
  return LatticeGraph(n_sites, edges);
}

LatticeGraph LatticeGraph::from_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list file: " + path);
  std::vector<std::pair<int, int>> edges;
  int max_site = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    int u, v;
    if (!(ss >> u)) continue;  // blank line
    if (!(ss >> v)) throw ConfigError("edge list line needs two site indices", lineno, 1);
    if (u < 0 || v < 0) throw ConfigError("edge list indices must be 0-based nonnegative", lineno, 1);
    edges.emplace_back(u, v);
    max_site = std::max({max_site, u, v});
  }
  if (edges.empty()) throw ConfigError("edge list file is empty: " + path);
  return LatticeGraph(max_site + 1, std::move(edges));
}

int LatticeGraph::distance(int a, int b) const {
  if (a < 0 || a >= n_ || b < 0 || b >= n_) throw std::invalid_argument("site not in graph");
  return dist_[a][b];
}

int LatticeGraph::dist_to_region(int x, const Region& z) const {
  if (z.is_empty()) throw std::invalid_argument("empty region");
  int best = std::numeric_limits<int>::max();
  for (int s : z.sites()) best = std::min(best, distance(x, s));
  return best;
}

int LatticeGraph::region_distance(const Region& a, const Region& b) const {
  if (a.is_empty() || b.is_empty()) throw std::invalid_argument("empty region");
  int best = std::numeric_limits<int>::max();
  for (int s : a.sites()) best = std::min(best, dist_to_region(s, b));
  return best;
}

int LatticeGraph::region_diameter(const Region& x) const {
  int d = 0;
  for (int a : x.sites())
    for (int b : x.sites()) d = std::max(d, dist_[a][b]);
  return d;
}

Region LatticeGraph::ball(int x, int r) const {
  if (x < 0 || x >= n_) throw std::invalid_argument("site not in graph");
  std::vector<int> v;
  for (int y = 0; y < n_; ++y)
    if (dist_[x][y] <= r) v.push_back(y);
  return Region(std::move(v), n_);
}

Region LatticeGraph::fatten(const Region& z, int r) const {
  if (z.is_empty()) throw std::invalid_argument("empty region");
  std::vector<int> v;
  for (int y = 0; y < n_; ++y)
    if (dist_to_region(y, z) <= r) v.push_back(y);
  return Region(std::move(v), n_);
}

Region LatticeGraph::boundary(const Region& z) const {
  if (z.is_empty() || z.size() == n_) return Region::empty(n_);
  return fatten(z, 1).intersect(fatten(z.complement(), 1));
}

DimensionFit fit_dimension(const LatticeGraph& graph, const std::vector<double>& d_candidates,
                           double cap) {
  if (d_candidates.empty()) throw std::invalid_argument("no dimension candidates supplied");
  double best_c = std::numeric_limits<double>::infinity();
  double best_d = d_candidates.front();
  std::string diag;
  for (double d : d_candidates) {
    if (d <= 0) throw std::invalid_argument("dimension candidate must be positive");
    double c = 0.0;
    for (int x = 0; x < graph.size(); ++x)
      for (int r = 1; r <= std::max(1, graph.diameter()); ++r) {
        int ball_size = graph.ball(x, r).size();
        c = std::max(c, (ball_size - 1) / std::pow(static_cast<double>(r), d));
      }
    diag += "d=" + std::to_string(d) + " -> C_Gamma=" + std::to_string(c) + "; ";
    if (c <= cap && c < best_c) {
      best_c = c;
      best_d = d;
    }
  }
  if (!(best_c <= cap))
    throw std::runtime_error("no dimension candidate satisfies the cap: " + diag);
  return DimensionFit{best_d, best_c};
}

}  // namespace stitchlab
