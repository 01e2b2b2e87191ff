#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "swocp/ocp.hpp"

namespace swocp {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Scheme { kTrapezoidal, kHermiteSimpson };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// Fixed collocation grid. No refinement happens between solves.
struct Mesh {
  std::vector<double> grid;
  Scheme scheme = Scheme::kTrapezoidal;

  static Mesh uniform(double t0, double tf, int num_intervals,
                      Scheme scheme = Scheme::kTrapezoidal);

  int num_intervals() const { return static_cast<int>(grid.size()) - 1; }
  double step(int k) const { return grid[k + 1] - grid[k]; }
};

/// Index map for the flat decision vector. Layout, in order:
///   states      (N+1) x n, node-major
///   u0          (N+1) x m, node-major
///   u1          (N+1) x m, node-major
///   mode signal (N+1)
class DecisionLayout {
 public:
  DecisionLayout(int num_nodes, int state_dim, int control_dim);

  int num_nodes() const { return nodes_; }
  int state_dim() const { return n_; }
  int control_dim() const { return m_; }
  int size() const { return nodes_ * (n_ + 2 * m_ + 1); }

  int state(int node, int i) const { return node * n_ + i; }
  int u0(int node, int j) const { return nodes_ * n_ + node * m_ + j; }
  int u1(int node, int j) const { return nodes_ * (n_ + m_) + node * m_ + j; }
  int mode(int node) const { return nodes_ * (n_ + 2 * m_) + node; }

  /// Index of entry `c` of the stacked node block q = [x, u0, u1, vbar].
  int node_entry(int node, int c) const;

  Vector pack(const Trajectory& trajectory) const;
  Trajectory unpack(const Vector& z, const std::vector<double>& times) const;

 private:
  int nodes_;
  int n_;
  int m_;
};

/// Finite-dimensional program: minimize objective(z) s.t. constraints(z) = 0,
/// lower <= z <= upper. Derivative callbacks are optional.
struct NlpProblem {
  int num_variables = 0;
  int num_constraints = 0;
  Vector lower;
  Vector upper;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> constraints;
  std::function<Vector(const Vector&)> gradient;
  std::function<SparseMatrix(const Vector&)> jacobian;
  /// Hessian of f(z) + y . c(z) in z. Optional; dense finite differences of
  /// the gradient are used when absent.
  std::function<SparseMatrix(const Vector& z, const Vector& y)> lagrangian_hessian;
};

/// Objective gradient: analytic when the program supplies one, otherwise
/// central differences with step 1e-6 * max(1, |z_i|).
Vector objective_gradient(const NlpProblem& nlp, const Vector& z);
SparseMatrix constraint_jacobian(const NlpProblem& nlp, const Vector& z);

/// Pure finite-difference versions, regardless of analytic callbacks.
Vector finite_difference_gradient(const NlpProblem& nlp, const Vector& z);
Matrix finite_difference_jacobian(const NlpProblem& nlp, const Vector& z);

/// Hessian of f + y . c: the callback when present, otherwise dense central
/// differences of the analytic (or finite-difference) gradient.
SparseMatrix lagrangian_hessian(const NlpProblem& nlp, const Vector& z, const Vector& y);

/// Direct collocation of an embedded problem on a fixed mesh.
///
/// Defects are written in rate form, one n-vector per interval:
///   trapezoidal:     (x_{k+1} - x_k)/h_k - (f_k + f_{k+1})/2
///   Hermite-Simpson: (x_{k+1} - x_k)/h_k - (f_k + 4 f_c + f_{k+1})/6
/// where f_c is evaluated at the Hermite midpoint state with the node
/// controls and mode signal averaged. The running cost uses the same weights.
/// The initial state is pinned and the final box imposed through variable
/// bounds, so the constraint vector holds only the defects.
class Transcription {
 public:
  Transcription(EmbeddedProblem problem, Mesh mesh);

  const EmbeddedProblem& problem() const { return problem_; }
  const Mesh& mesh() const { return mesh_; }
  const DecisionLayout& layout() const { return layout_; }

  int num_defects() const { return mesh_.num_intervals() * problem_.state_dim(); }
  int defect_row(int interval, int i) const { return interval * problem_.state_dim() + i; }

  double objective(const Vector& z) const;
  Vector objective_gradient(const Vector& z) const;
  Vector defects(const Vector& z) const;
  SparseMatrix defect_jacobian(const Vector& z) const;
  /// Hessian of objective + y . defects by differencing the analytic
  /// gradient, perturbing every third node at once (the Hessian only couples
  /// neighbouring nodes).
  SparseMatrix lagrangian_hessian(const Vector& z, const Vector& y) const;
  Vector lower_bounds() const;
  Vector upper_bounds() const;

  /// Quadrature of the auxiliary cost alone along z, using the scheme's
  /// nodes and weights (midpoints interpolated for Hermite-Simpson).
  double aux_cost_quadrature(const Vector& z) const;

  Trajectory to_trajectory(const Vector& z) const { return layout_.unpack(z, mesh_.grid); }

  NlpProblem to_nlp() const;

 private:
  struct NodeEval;
  std::vector<NodeEval> evaluate_nodes(const Vector& z, bool with_derivatives) const;
  Vector running_cost_gradient(const Vector& z) const;
  double terminal_cost(const Vector& z) const;

  EmbeddedProblem problem_;
  Mesh mesh_;
  DecisionLayout layout_;
};

NlpProblem transcribe(const EmbeddedProblem& problem, const Mesh& mesh);

/// States linear from x0 to the final-box midpoint, controls at the middle of
/// the control set, mode signal 0.5.
Vector default_initializer(const EmbeddedProblem& problem, const Mesh& mesh);

}  // namespace swocp
