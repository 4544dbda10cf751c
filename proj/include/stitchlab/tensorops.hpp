#pragma once

#include "stitchlab/common.hpp"
#include "stitchlab/lattice.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace stitchlab {

// Ordered list of sites carrying local Hilbert spaces. A space may cover a
// subset of the graph (OBC ball restrictions); tensor indexing always follows
// the listed site order, first site slowest.
class SiteSpace {
 public:
  SiteSpace() = default;
  SiteSpace(std::shared_ptr<const LatticeGraph> graph, std::vector<int> sites,
            std::vector<int> local_dims, std::size_t dim_cap = std::size_t{1} << 14);
  static SiteSpace qubits(std::shared_ptr<const LatticeGraph> graph,
                          std::size_t dim_cap = std::size_t{1} << 14);

  const LatticeGraph& graph() const { return *graph_; }
  std::shared_ptr<const LatticeGraph> graph_ptr() const { return graph_; }
  int n_sites() const { return static_cast<int>(sites_.size()); }
  const std::vector<int>& sites() const { return sites_; }
  int local_dim(int position) const { return dims_[position]; }
  std::size_t dim() const { return dim_; }
  std::size_t dim_cap() const { return cap_; }

  // Position of a site id within this space, -1 if absent.
  int position_of(int site) const;
  bool covers(const Region& region) const;
  Region site_region() const { return Region(sites_, graph_->size()); }

  std::size_t dim_of(const Region& region) const;
  SiteSpace restrict_to(const Region& region) const;

  // Offset tables splitting full indices across (region, complement).
  struct Split {
    std::vector<std::size_t> keep_offsets;
    std::vector<std::size_t> rest_offsets;
    std::size_t keep_dim() const { return keep_offsets.size(); }
    std::size_t rest_dim() const { return rest_offsets.size(); }
  };
  Split split(const Region& keep) const;

  bool same_layout(const SiteSpace& other) const {
    return sites_ == other.sites_ && dims_ == other.dims_;
  }

 private:
  std::shared_ptr<const LatticeGraph> graph_;
  std::vector<int> sites_;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 0;
  std::size_t cap_ = 0;
};

// Operator supported on a subset of sites, stored as its local matrix.
struct LocalOperator {
  Region support;
  cxmat matrix;
  bool hermitian_flag = false;

  LocalOperator() = default;
  LocalOperator(Region s, cxmat m, bool check_hermitian = true);
  double norm() const { return operator_norm(matrix); }
};

class StateVector {
 public:
  StateVector(SiteSpace space, cxvec amplitudes);
  const SiteSpace& space() const { return space_; }
  const cxvec& amplitudes() const { return amps_; }
  cxvec& amplitudes() { return amps_; }

 private:
  SiteSpace space_;
  cxvec amps_;
};

// Density matrix in either pure compact form (state vector) or dense form.
class DensityMatrix {
 public:
  static DensityMatrix pure(StateVector psi);
  static DensityMatrix dense(SiteSpace space, cxmat rho);

  const SiteSpace& space() const { return space_; }
  bool is_pure() const { return pure_.has_value(); }
  const cxvec& pure_vector() const { return *pure_; }
  cxmat matrix() const;  // materializes for pure states
  DensityMatrix reduced(const Region& keep) const;
  double expectation(const LocalOperator& op) const;
  // Min-eigenvalue / trace validation; cheap for pure states.
  void validate(double tol = 1e-10) const;

 private:
  DensityMatrix(SiteSpace s) : space_(std::move(s)) {}
  SiteSpace space_;
  std::optional<cxvec> pure_;
  std::optional<cxmat> dense_;
};

cxmat embed(const LocalOperator& op, const SiteSpace& space);
// out (+)= embedded op applied to in.
void apply_local(const LocalOperator& op, const SiteSpace& space, const cxvec& in, cxvec& out,
                 bool accumulate = false);
// Unnormalized partial trace of a full matrix onto the kept region.
cxmat partial_trace_matrix(const cxmat& m, const SiteSpace& space, const Region& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const Region& keep);
// Product operator A_R (x) B_{R^c} assembled in site order.
cxmat kron_regions(const SiteSpace& space, const Region& r, const cxmat& a, const cxmat& b);

double local_trace_distance(const DensityMatrix& rho, const DensityMatrix& omega,
                            const Region& x_region);

struct EigenSolveResult {
  realvec eigenvalues;  // ascending
  cxmat eigenvectors;   // columns
};

// Dense Hermitian solve with residual/orthonormality guarantees.
EigenSolveResult hermitian_eigensolve(const cxmat& m);

struct LinearOp {
  std::size_t dim = 0;
  std::function<void(const cxvec&, cxvec&)> apply;  // out = A in
};

// Deflated Lanczos with full reorthogonalization; finds the k lowest
// eigenpairs of a Hermitian operator, handling degeneracies by restarting in
// the orthogonal complement of converged vectors.
EigenSolveResult lowest_eigenpairs(const LinearOp& op, int k, double residual_tol = 1e-9,
                                   int max_iter = 600, std::uint64_t seed = 12345);

// Projector onto the span of eigenvectors with eigenvalue <= tol. Errors if
// any eigenvalue falls in (tol, 10 tol) (spectral ambiguity) or min < -tol.
cxmat kernel_projector(const cxmat& m, double tol);
// Orthonormal kernel basis (columns), same tolerance policy.
cxmat kernel_basis(const cxmat& m, double tol);
cxmat kernel_basis(const LinearOp& op, double tol, int max_dim_hint = 8);

enum class MapDirection { schrodinger, heisenberg };

struct KrausOp {
  Region support;
  cxmat matrix;  // square on the support's local space
};

// CP map in Kraus form, X -> sum_k K X K^dagger with embedded local Kraus ops.
class CPMap {
 public:
  CPMap(MapDirection direction, SiteSpace space, std::vector<KrausOp> kraus);
  MapDirection direction() const { return direction_; }
  const SiteSpace& space() const { return space_; }
  const std::vector<KrausOp>& kraus() const { return kraus_; }
  cxmat apply(const cxmat& in) const;
  CPMap adjoint() const;
  // ||sum K^dag K - 1|| (schrodinger) or ||sum K K^dag - 1|| (heisenberg).
  double preservation_residual() const;

 private:
  MapDirection direction_;
  SiteSpace space_;
  std::vector<KrausOp> kraus_;
};

// Heisenberg-direction conditional expectation E_{sigma_b} onto the
// complement of region b, with adjoint S -> tr_b(S) (x) sigma_b.
CPMap conditional_expectation(const DensityMatrix& sigma_b, const Region& b,
                              const SiteSpace& space);
// Fast structured application, tracial state when sigma_b is null.
cxmat cond_exp_apply(const cxmat& op, const Region& b, const SiteSpace& space,
                     const cxmat* sigma_b_local = nullptr);
cxmat adjoint_cond_exp_apply(const cxmat& s, const Region& b, const SiteSpace& space,
                             const cxmat* sigma_b_local = nullptr);

// Telescoping locality decomposition of a full operator around region x.
std::vector<LocalOperator> delta_decomposition(const cxmat& op_full, const Region& x,
                                               const SiteSpace& space);

struct ChoiReport {
  bool cp = false;
  bool tp_or_ip = false;
  double min_choi_eig = 0.0;
  double unital_residual = 0.0;
  double contraction_excess = 0.0;  // worst violation over random probes
};

ChoiReport choi_check(const CPMap& map, int n_contraction_trials = 10,
                      std::uint64_t seed = 777);
// Same report for an arbitrary linear map given as a function (CP is a
// property, not a structural guarantee, for this overload).
ChoiReport choi_check(const std::function<cxmat(const cxmat&)>& map, const SiteSpace& space,
                      MapDirection direction, int n_contraction_trials = 10,
                      std::uint64_t seed = 777);

}  // namespace stitchlab
