#include "swocp/transcription.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "swocp/numdiff.hpp"

namespace swocp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(Scheme scheme) {
  return scheme == Scheme::kTrapezoidal ? "trapezoidal" : "hermite-simpson";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "trapezoidal") return Scheme::kTrapezoidal;
  if (name == "hermite-simpson") return Scheme::kHermiteSimpson;
  throw std::invalid_argument("unknown collocation scheme: " + name);
}

Mesh Mesh::uniform(double t0, double tf, int num_intervals, Scheme scheme) {
  if (num_intervals < 1) throw std::invalid_argument("mesh needs at least one interval");
  if (!(tf > t0)) throw std::invalid_argument("mesh horizon must be positive");
  Mesh mesh;
  mesh.scheme = scheme;
  mesh.grid.resize(static_cast<std::size_t>(num_intervals) + 1);
  for (int k = 0; k <= num_intervals; ++k) {
    mesh.grid[k] = t0 + (tf - t0) * static_cast<double>(k) / num_intervals;
  }
  mesh.grid.back() = tf;
  return mesh;
}

DecisionLayout::DecisionLayout(int num_nodes, int state_dim, int control_dim)
    : nodes_(num_nodes), n_(state_dim), m_(control_dim) {
  if (nodes_ < 2 || n_ < 1 || m_ < 0) throw std::invalid_argument("invalid decision layout");
}

int DecisionLayout::node_entry(int node, int c) const {
  if (c < n_) return state(node, c);
  c -= n_;
  if (c < m_) return u0(node, c);
  c -= m_;
  if (c < m_) return u1(node, c);
  return mode(node);
}

Vector DecisionLayout::pack(const Trajectory& trajectory) const {
  if (trajectory.num_nodes() != nodes_ || trajectory.states.cols() != n_ ||
      trajectory.controls_u0.cols() != m_ || trajectory.controls_u1.cols() != m_) {
    throw std::invalid_argument("trajectory does not match decision layout");
  }
  Vector z(size());
  for (int k = 0; k < nodes_; ++k) {
    for (int i = 0; i < n_; ++i) z[state(k, i)] = trajectory.states(k, i);
    for (int j = 0; j < m_; ++j) {
      z[u0(k, j)] = trajectory.controls_u0(k, j);
      z[u1(k, j)] = trajectory.controls_u1(k, j);
    }
    z[mode(k)] = trajectory.mode_signal[k];
  }
  return z;
}

Trajectory DecisionLayout::unpack(const Vector& z, const std::vector<double>& times) const {
  if (z.size() != size() || static_cast<int>(times.size()) != nodes_) {
    throw std::invalid_argument("decision vector does not match layout");
  }
  Trajectory traj;
  traj.times = times;
  traj.states.resize(nodes_, n_);
  traj.controls_u0.resize(nodes_, m_);
  traj.controls_u1.resize(nodes_, m_);
  traj.mode_signal.resize(nodes_);
  for (int k = 0; k < nodes_; ++k) {
    for (int i = 0; i < n_; ++i) traj.states(k, i) = z[state(k, i)];
    for (int j = 0; j < m_; ++j) {
      traj.controls_u0(k, j) = z[u0(k, j)];
      traj.controls_u1(k, j) = z[u1(k, j)];
    }
    traj.mode_signal[k] = z[mode(k)];
  }
  return traj;
}

Vector objective_gradient(const NlpProblem& nlp, const Vector& z) {
  if (z.size() != nlp.num_variables) throw std::invalid_argument("gradient: wrong length");
  if (!std::isfinite(nlp.objective(z))) {
    throw std::domain_error("gradient: objective is not finite");
  }
  return nlp.gradient ? nlp.gradient(z) : finite_difference_gradient(nlp, z);
}

SparseMatrix constraint_jacobian(const NlpProblem& nlp, const Vector& z) {
  if (z.size() != nlp.num_variables) throw std::invalid_argument("jacobian: wrong length");
  if (!nlp.constraints(z).allFinite()) {
    throw std::domain_error("jacobian: constraints are not finite");
  }
  if (nlp.jacobian) return nlp.jacobian(z);
  return finite_difference_jacobian(nlp, z).sparseView();
}

Vector finite_difference_gradient(const NlpProblem& nlp, const Vector& z) {
  return numdiff::gradient(nlp.objective, z);
}

Matrix finite_difference_jacobian(const NlpProblem& nlp, const Vector& z) {
  return numdiff::jacobian(nlp.constraints, z, nlp.num_constraints);
}

SparseMatrix lagrangian_hessian(const NlpProblem& nlp, const Vector& z, const Vector& y) {
  if (nlp.lagrangian_hessian) return nlp.lagrangian_hessian(z, y);
  auto grad = [&](const Vector& zz) -> Vector {
    Vector g = nlp.gradient ? nlp.gradient(zz) : finite_difference_gradient(nlp, zz);
    if (nlp.num_constraints > 0) {
      const Matrix jac = nlp.jacobian ? Matrix(nlp.jacobian(zz))
                                      : finite_difference_jacobian(nlp, zz);
      g += jac.transpose() * y;
    }
    return g;
  };
  const Matrix h = numdiff::jacobian(grad, z, z.size());
  return Matrix(0.5 * (h + h.transpose())).sparseView();
}

struct Transcription::NodeEval {
  double t = 0.0;
  Vector x, u0, u1;
  double vbar = 0.0;
  Vector f;
  double cost = 0.0;
  Matrix f_q;  // n x p
  Vector cost_q;  // p
};

Transcription::Transcription(EmbeddedProblem problem, Mesh mesh)
    : problem_(std::move(problem)),
      mesh_(std::move(mesh)),
      layout_(static_cast<int>(mesh_.grid.size()), problem_.state_dim(),
              problem_.control_dim()) {
  const BoundarySpec& b = problem_.base().boundary();
  const double span = b.tf - b.t0;
  const double tol = 1e-12 * std::max(1.0, std::abs(span));
  if (std::abs(mesh_.grid.front() - b.t0) > tol || std::abs(mesh_.grid.back() - b.tf) > tol) {
    throw std::invalid_argument("mesh does not span the problem horizon");
  }
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    if (!(mesh_.step(k) > 0.0)) throw std::invalid_argument("mesh grid must be increasing");
  }
}

std::vector<Transcription::NodeEval> Transcription::evaluate_nodes(const Vector& z,
                                                                   bool with_derivatives) const {
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  std::vector<NodeEval> nodes(static_cast<std::size_t>(layout_.num_nodes()));
  for (int k = 0; k < layout_.num_nodes(); ++k) {
    NodeEval& e = nodes[k];
    e.t = mesh_.grid[k];
    e.x = z.segment(layout_.state(k, 0), n);
    e.u0 = z.segment(layout_.u0(k, 0), m);
    e.u1 = z.segment(layout_.u1(k, 0), m);
    e.vbar = z[layout_.mode(k)];
    e.f = problem_.dynamics(e.t, e.x, e.u0, e.u1, e.vbar);
    e.cost = problem_.running_cost(e.t, e.x, e.u0, e.u1, e.vbar);
    if (with_derivatives) {
      EmbeddedDerivatives d = problem_.derivatives(e.t, e.x, e.u0, e.u1, e.vbar);
      e.f_q = std::move(d.dynamics);
      e.cost_q = std::move(d.cost);
    }
  }
  return nodes;
}

namespace {

// Hermite-Simpson midpoint of one interval, with the sensitivities of the
// stacked midpoint block with respect to the left/right node blocks.
struct Midpoint {
  double t;
  Vector x, u0, u1;
  double vbar;
  Matrix d_left;   // p x p
  Matrix d_right;  // p x p
};

template <typename Node>
Midpoint hermite_midpoint(const Node& a, const Node& b, double h, int n, int m,
                          bool with_derivatives) {
  Midpoint mid;
  mid.t = a.t + 0.5 * h;
  mid.x = 0.5 * (a.x + b.x) + (h / 8.0) * (a.f - b.f);
  mid.u0 = 0.5 * (a.u0 + b.u0);
  mid.u1 = 0.5 * (a.u1 + b.u1);
  mid.vbar = 0.5 * (a.vbar + b.vbar);
  if (with_derivatives) {
    const int p = n + 2 * m + 1;
    mid.d_left = 0.5 * Matrix::Identity(p, p);
    mid.d_right = 0.5 * Matrix::Identity(p, p);
    mid.d_left.topRows(n) += (h / 8.0) * a.f_q;
    mid.d_right.topRows(n) -= (h / 8.0) * b.f_q;
  }
  return mid;
}

}  // namespace

double Transcription::objective(const Vector& z) const {
  const auto nodes = evaluate_nodes(z, false);
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  double total = 0.0;
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    const double h = mesh_.step(k);
    const NodeEval& a = nodes[k];
    const NodeEval& b = nodes[k + 1];
    if (mesh_.scheme == Scheme::kTrapezoidal) {
      total += 0.5 * h * (a.cost + b.cost);
    } else {
      const Midpoint c = hermite_midpoint(a, b, h, n, m, false);
      const double cost_c = problem_.running_cost(c.t, c.x, c.u0, c.u1, c.vbar);
      total += (h / 6.0) * (a.cost + 4.0 * cost_c + b.cost);
    }
  }
  return total + terminal_cost(z);
}

Vector Transcription::running_cost_gradient(const Vector& z) const {
  const auto nodes = evaluate_nodes(z, true);
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  const int p = problem_.node_width();
  Vector grad = Vector::Zero(layout_.size());
  auto scatter = [&](int node, const Vector& block) {
    for (int c = 0; c < p; ++c) grad[layout_.node_entry(node, c)] += block[c];
  };
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    const double h = mesh_.step(k);
    const NodeEval& a = nodes[k];
    const NodeEval& b = nodes[k + 1];
    if (mesh_.scheme == Scheme::kTrapezoidal) {
      scatter(k, 0.5 * h * a.cost_q);
      scatter(k + 1, 0.5 * h * b.cost_q);
    } else {
      const Midpoint c = hermite_midpoint(a, b, h, n, m, true);
      const Vector cost_c = problem_.derivatives(c.t, c.x, c.u0, c.u1, c.vbar).cost;
      scatter(k, (h / 6.0) * (a.cost_q + 4.0 * c.d_left.transpose() * cost_c));
      scatter(k + 1, (h / 6.0) * (b.cost_q + 4.0 * c.d_right.transpose() * cost_c));
    }
  }
  return grad;
}

double Transcription::terminal_cost(const Vector& z) const {
  const BoundarySpec& bnd = problem_.base().boundary();
  const int n = problem_.state_dim();
  const int last = layout_.num_nodes() - 1;
  return problem_.base().terminal_cost(bnd.t0, z.segment(layout_.state(0, 0), n), bnd.tf,
                                       z.segment(layout_.state(last, 0), n));
}

Vector Transcription::objective_gradient(const Vector& z) const {
  Vector grad = running_cost_gradient(z);
  if (problem_.base().has_terminal_cost()) {
    const int n = problem_.state_dim();
    const int last = layout_.num_nodes() - 1;
    Vector zz = z;
    for (int node : {0, last}) {
      for (int i = 0; i < n; ++i) {
        const int idx = layout_.state(node, i);
        const double h = numdiff::step_for(z[idx]);
        zz[idx] = z[idx] + h;
        const double fp = terminal_cost(zz);
        zz[idx] = z[idx] - h;
        const double fm = terminal_cost(zz);
        zz[idx] = z[idx];
        grad[idx] += (fp - fm) / (2.0 * h);
      }
    }
  }
  return grad;
}

Vector Transcription::defects(const Vector& z) const {
  const auto nodes = evaluate_nodes(z, false);
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  Vector c(num_defects());
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    const double h = mesh_.step(k);
    const NodeEval& a = nodes[k];
    const NodeEval& b = nodes[k + 1];
    Vector rate;
    if (mesh_.scheme == Scheme::kTrapezoidal) {
      rate = 0.5 * (a.f + b.f);
    } else {
      const Midpoint mid = hermite_midpoint(a, b, h, n, m, false);
      rate = (a.f + 4.0 * problem_.dynamics(mid.t, mid.x, mid.u0, mid.u1, mid.vbar) + b.f) / 6.0;
    }
    c.segment(defect_row(k, 0), n) = (b.x - a.x) / h - rate;
  }
  return c;
}

SparseMatrix Transcription::defect_jacobian(const Vector& z) const {
  const auto nodes = evaluate_nodes(z, true);
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  const int p = problem_.node_width();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh_.num_intervals()) * 2 * n * p);
  auto emit = [&](int interval, int node, const Matrix& block) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < p; ++c) {
        if (block(i, c) != 0.0) {
          triplets.emplace_back(defect_row(interval, i), layout_.node_entry(node, c), block(i, c));
        }
      }
    }
  };
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    const double h = mesh_.step(k);
    const NodeEval& a = nodes[k];
    const NodeEval& b = nodes[k + 1];
    Matrix left = Matrix::Zero(n, p);
    Matrix right = Matrix::Zero(n, p);
    left.leftCols(n) = -Matrix::Identity(n, n) / h;
    right.leftCols(n) = Matrix::Identity(n, n) / h;
    if (mesh_.scheme == Scheme::kTrapezoidal) {
      left -= 0.5 * a.f_q;
      right -= 0.5 * b.f_q;
    } else {
      const Midpoint mid = hermite_midpoint(a, b, h, n, m, true);
      const Matrix f_mid = problem_.derivatives(mid.t, mid.x, mid.u0, mid.u1, mid.vbar).dynamics;
      left -= (a.f_q + 4.0 * f_mid * mid.d_left) / 6.0;
      right -= (b.f_q + 4.0 * f_mid * mid.d_right) / 6.0;
    }
    emit(k, k, left);
    emit(k, k + 1, right);
  }
  SparseMatrix jac(num_defects(), layout_.size());
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

SparseMatrix Transcription::lagrangian_hessian(const Vector& z, const Vector& y) const {
  const int p = problem_.node_width();
  const int nodes = layout_.num_nodes();
  auto grad = [&](const Vector& zz) -> Vector {
    return running_cost_gradient(zz) + defect_jacobian(zz).transpose() * y;
  };
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> steps(static_cast<std::size_t>(nodes));
  for (int color = 0; color < 3; ++color) {
    for (int c = 0; c < p; ++c) {
      Vector zp = z;
      Vector zm = z;
      bool any = false;
      for (int k = color; k < nodes; k += 3) {
        const int idx = layout_.node_entry(k, c);
        steps[k] = numdiff::step_for(z[idx]);
        zp[idx] += steps[k];
        zm[idx] -= steps[k];
        any = true;
      }
      if (!any) continue;
      const Vector diff = grad(zp) - grad(zm);
      for (int j = 0; j < nodes; ++j) {
        // The unique perturbed node adjacent to (or equal to) node j.
        int k = j - 1;
        while (k <= j + 1 && (k < 0 || k >= nodes || ((k - color) % 3 + 3) % 3 != 0)) ++k;
        if (k > j + 1) continue;
        const int col = layout_.node_entry(k, c);
        for (int r = 0; r < p; ++r) {
          const int row = layout_.node_entry(j, r);
          const double v = diff[row] / (2.0 * steps[k]);
          if (v != 0.0) triplets.emplace_back(row, col, v);
        }
      }
    }
  }
  if (problem_.base().has_terminal_cost()) {
    // Terminal cost may couple the first and last node; second differences
    // with a coarser step.
    const int n = problem_.state_dim();
    const int last = nodes - 1;
    std::vector<int> idx;
    for (int node : {0, last}) {
      for (int i = 0; i < n; ++i) idx.push_back(layout_.state(node, i));
    }
    Vector zz = z;
    auto K = [&]() { return terminal_cost(zz); };
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const double ha = 1e-4 * std::max(1.0, std::abs(z[idx[a]]));
        const double hb = 1e-4 * std::max(1.0, std::abs(z[idx[b]]));
        double acc = 0.0;
        for (int sa : {1, -1}) {
          for (int sb : {1, -1}) {
            zz = z;
            zz[idx[a]] += sa * ha;
            zz[idx[b]] += sb * hb;
            acc += sa * sb * K();
          }
        }
        triplets.emplace_back(idx[a], idx[b], acc / (4.0 * ha * hb));
      }
    }
  }
  SparseMatrix hess(layout_.size(), layout_.size());
  hess.setFromTriplets(triplets.begin(), triplets.end());
  SparseMatrix sym = 0.5 * (hess + SparseMatrix(hess.transpose()));
  return sym;
}

Vector Transcription::lower_bounds() const {
  const SwitchedProblem& base = problem_.base();
  const BoundarySpec& b = base.boundary();
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  const int last = layout_.num_nodes() - 1;
  Vector lo(layout_.size());
  for (int k = 0; k <= last; ++k) {
    for (int i = 0; i < n; ++i) {
      double v = base.state_box() ? base.state_box()->lower[i] : -kInf;
      if (k == 0) v = b.x0[i];
      if (k == last) v = std::max(v, b.xf_lower[i]);
      lo[layout_.state(k, i)] = v;
    }
    for (int j = 0; j < m; ++j) {
      lo[layout_.u0(k, j)] = base.control_set().lower[j];
      lo[layout_.u1(k, j)] = base.control_set().lower[j];
    }
    lo[layout_.mode(k)] = 0.0;
  }
  return lo;
}

Vector Transcription::upper_bounds() const {
  const SwitchedProblem& base = problem_.base();
  const BoundarySpec& b = base.boundary();
  const int n = problem_.state_dim();
  const int m = problem_.control_dim();
  const int last = layout_.num_nodes() - 1;
  Vector hi(layout_.size());
  for (int k = 0; k <= last; ++k) {
    for (int i = 0; i < n; ++i) {
      double v = base.state_box() ? base.state_box()->upper[i] : kInf;
      if (k == 0) v = b.x0[i];
      if (k == last) v = std::min(v, b.xf_upper[i]);
      hi[layout_.state(k, i)] = v;
    }
    for (int j = 0; j < m; ++j) {
      hi[layout_.u0(k, j)] = base.control_set().upper[j];
      hi[layout_.u1(k, j)] = base.control_set().upper[j];
    }
    hi[layout_.mode(k)] = 1.0;
  }
  return hi;
}

double Transcription::aux_cost_quadrature(const Vector& z) const {
  const double beta = problem_.beta();
  auto aux = [beta](double v) { return 4.0 * beta * (v - v * v); };
  double total = 0.0;
  for (int k = 0; k < mesh_.num_intervals(); ++k) {
    const double h = mesh_.step(k);
    const double va = z[layout_.mode(k)];
    const double vb = z[layout_.mode(k + 1)];
    if (mesh_.scheme == Scheme::kTrapezoidal) {
      total += 0.5 * h * (aux(va) + aux(vb));
    } else {
      total += (h / 6.0) * (aux(va) + 4.0 * aux(0.5 * (va + vb)) + aux(vb));
    }
  }
  return total;
}

NlpProblem Transcription::to_nlp() const {
  auto self = std::make_shared<const Transcription>(*this);
  NlpProblem nlp;
  nlp.num_variables = layout_.size();
  nlp.num_constraints = num_defects();
  nlp.lower = lower_bounds();
  nlp.upper = upper_bounds();
  nlp.objective = [self](const Vector& z) { return self->objective(z); };
  nlp.constraints = [self](const Vector& z) { return self->defects(z); };
  nlp.gradient = [self](const Vector& z) { return self->objective_gradient(z); };
  nlp.jacobian = [self](const Vector& z) { return self->defect_jacobian(z); };
  nlp.lagrangian_hessian = [self](const Vector& z, const Vector& y) {
    return self->lagrangian_hessian(z, y);
  };
  return nlp;
}

NlpProblem transcribe(const EmbeddedProblem& problem, const Mesh& mesh) {
  return Transcription(problem, mesh).to_nlp();
}

Vector default_initializer(const EmbeddedProblem& problem, const Mesh& mesh) {
  const SwitchedProblem& base = problem.base();
  const BoundarySpec& b = base.boundary();
  const DecisionLayout layout(static_cast<int>(mesh.grid.size()), base.state_dim(),
                              base.control_dim());
  const Vector x_target = 0.5 * (b.xf_lower + b.xf_upper);
  const Vector u_mid = base.control_set().midpoint();
  const double span = mesh.grid.back() - mesh.grid.front();
  Vector z(layout.size());
  for (int k = 0; k < layout.num_nodes(); ++k) {
    const double s = (mesh.grid[k] - mesh.grid.front()) / span;
    const Vector x = (1.0 - s) * b.x0 + s * x_target;
    for (int i = 0; i < base.state_dim(); ++i) z[layout.state(k, i)] = x[i];
    for (int j = 0; j < base.control_dim(); ++j) {
      z[layout.u0(k, j)] = u_mid[j];
      z[layout.u1(k, j)] = u_mid[j];
    }
    z[layout.mode(k)] = 0.5;
  }
  return z;
}

}  // namespace swocp
