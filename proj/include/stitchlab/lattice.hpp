#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace stitchlab {

class LatticeGraph;

// Subset of the vertices of a lattice graph. Sites are dense 0-based indices.
class Region {
 public:
  Region() = default;
  Region(std::vector<int> sites, int graph_size);
  static Region empty(int graph_size) { return Region({}, graph_size); }
  static Region all(int graph_size);
  static Region single(int site, int graph_size) { return Region({site}, graph_size); }

  bool contains(int site) const { return site >= 0 && site < graph_size() && mask_[site] != 0; }
  const std::vector<int>& sites() const { return sites_; }
  int size() const { return static_cast<int>(sites_.size()); }
  bool is_empty() const { return sites_.empty(); }
  int graph_size() const { return static_cast<int>(mask_.size()); }

  Region complement() const;
  Region unite(const Region& other) const;
  Region intersect(const Region& other) const;
  Region minus(const Region& other) const;
  bool subset_of(const Region& other) const;
  bool intersects(const Region& other) const;

  bool operator==(const Region& other) const { return sites_ == other.sites_; }
  bool operator!=(const Region& other) const { return sites_ != other.sites_; }
  bool operator<(const Region& other) const { return sites_ < other.sites_; }

  std::string to_string() const;

 private:
  std::vector<int> sites_;  // sorted, unique
  std::vector<char> mask_;
};

// Finite connected graph with the graph distance, precomputed by BFS from
// every vertex at construction.
class LatticeGraph {
 public:
  static LatticeGraph chain(int length);
  static LatticeGraph ring(int length);
  static LatticeGraph grid(int width, int height);
  static LatticeGraph complete(int n);
  static LatticeGraph explicit_edges(int n_sites, const std::vector<std::pair<int, int>>& edges);
  // One "u v" pair per line, whitespace separated, 0-based.
  static LatticeGraph from_edge_list_file(const std::string& path);

  int size() const { return n_; }
  int distance(int a, int b) const;
  int diameter() const { return diameter_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  int dist_to_region(int x, const Region& z) const;
  int region_distance(const Region& a, const Region& b) const;
  int region_diameter(const Region& x) const;

  Region ball(int x, int r) const;
  Region fatten(const Region& z, int r) const;
  Region boundary(const Region& z) const;

 private:
  LatticeGraph(int n, std::vector<std::pair<int, int>> edges);
  int n_ = 0;
  int diameter_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> dist_;
};

// Ball-growth constants: |B_r(x)| <= 1 + c_gamma_cap * r^d for all x, r >= 1.
struct DimensionFit {
  double d = 1.0;
  double c_gamma_cap = 0.0;
};

// For each candidate exponent returns the smallest constant making the bound
// hold exhaustively; picks the candidate minimizing the constant subject to
// the cap.
DimensionFit fit_dimension(const LatticeGraph& graph, const std::vector<double>& d_candidates,
                           double cap = 64.0);

}  // namespace stitchlab
