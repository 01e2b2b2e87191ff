#include "swocp/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace swocp {
namespace {

constexpr int kMemory = 10;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 50;
constexpr double kMaxPenalty = 1e12;
// Outer iterations without a 1% drop in violation before giving up.
constexpr int kStallLimit = 5;
constexpr double kStallRatio = 0.99;

Vector project(const Vector& z, const Vector& lo, const Vector& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const NlpProblem& nlp, int& evals) : nlp_(nlp), evals_(evals) {}

  void set(const Vector& multipliers, double penalty) {
    multipliers_ = multipliers;
    penalty_ = penalty;
  }

  double value(const Vector& z) const {
    ++evals_;
    const Vector c = nlp_.constraints(z);
    return nlp_.objective(z) + multipliers_.dot(c) + 0.5 * penalty_ * c.squaredNorm();
  }

  const NlpProblem& nlp() const { return nlp_; }
  const Vector& multipliers() const { return multipliers_; }
  double penalty() const { return penalty_; }

  // Hessian of f + lambda . c + rho/2 |c|^2, with the exact rho J^T J term.
  SparseMatrix hessian(const Vector& z) const {
    if (nlp_.num_constraints == 0) {
      return lagrangian_hessian(nlp_, z, Vector::Zero(0));
    }
    const Vector c = nlp_.constraints(z);
    const SparseMatrix jac = constraint_jacobian(nlp_, z);
    SparseMatrix h = lagrangian_hessian(nlp_, z, multipliers_ + penalty_ * c);
    h += penalty_ * SparseMatrix(jac.transpose() * jac);
    return h;
  }

  Vector gradient(const Vector& z) const {
    const Vector c = nlp_.constraints(z);
    Vector g = objective_gradient(nlp_, z);
    if (nlp_.num_constraints > 0) {
      g += constraint_jacobian(nlp_, z).transpose() * (multipliers_ + penalty_ * c);
    }
    return g;
  }

 private:
  const NlpProblem& nlp_;
  int& evals_;
  Vector multipliers_;
  double penalty_ = 0.0;
};

struct InnerResult {
  Vector z;
  double value = 0.0;
  Vector gradient;
  double projected_gradient = 0.0;
  int iterations = 0;
};

Vector free_mask(const Vector& z, const Vector& g, const Vector& lo, const Vector& hi) {
  Vector mask = Vector::Ones(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if ((z[i] <= lo[i] && g[i] >= 0.0) || (z[i] >= hi[i] && g[i] <= 0.0)) mask[i] = 0.0;
  }
  return mask;
}

// Limited-memory inverse-Hessian product restricted to the free variables.
Vector two_loop(const Vector& g, const Vector& mask, const std::deque<Vector>& s_hist,
                const std::deque<Vector>& y_hist) {
  Vector q = g.cwiseProduct(mask);
  const std::size_t k = s_hist.size();
  std::vector<double> alpha(k), rho(k);
  for (std::size_t i = k; i-- > 0;) {
    const Vector s = s_hist[i].cwiseProduct(mask);
    const Vector y = y_hist[i].cwiseProduct(mask);
    const double sy = s.dot(y);
    rho[i] = sy > 0.0 ? 1.0 / sy : 0.0;
    alpha[i] = rho[i] * s.dot(q);
    q -= alpha[i] * y;
  }
  if (k > 0) {
    const Vector s = s_hist.back().cwiseProduct(mask);
    const Vector y = y_hist.back().cwiseProduct(mask);
    const double yy = y.squaredNorm();
    if (yy > 0.0 && s.dot(y) > 0.0) q *= s.dot(y) / yy;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Vector s = s_hist[i].cwiseProduct(mask);
    const Vector y = y_hist[i].cwiseProduct(mask);
    const double b = rho[i] * y.dot(q);
    q += (alpha[i] - b) * s;
  }
  return -q.cwiseProduct(mask);
}

InnerResult minimize_in_box(const AugmentedLagrangian& merit, const Vector& lo, const Vector& hi,
                            Vector z, double tol, int max_iters) {
  InnerResult r;
  double value = merit.value(z);
  Vector g = merit.gradient(z);
  std::deque<Vector> s_hist, y_hist;
  auto pg_norm = [&](const Vector& zz, const Vector& gg) {
    return (project(zz - gg, lo, hi) - zz).lpNorm<Eigen::Infinity>();
  };

  int it = 0;
  for (; it < max_iters; ++it) {
    if (pg_norm(z, g) <= tol) break;
    const Vector mask = free_mask(z, g, lo, hi);
    Vector d = two_loop(g, mask, s_hist, y_hist);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      d = -g.cwiseProduct(mask);
      slope = g.dot(d);
    }
    double step = 1.0;
    if (s_hist.empty()) {
      const double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax > 1.0) step = 1.0 / dmax;
    }

    bool accepted = false;
    Vector z_new;
    double value_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      z_new = project(z + step * d, lo, hi);
      value_new = merit.value(z_new);
      if (std::isfinite(value_new) && value_new <= value + kArmijo * g.dot(z_new - z)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;  // steepest descent stalled
      s_hist.clear();
      y_hist.clear();
      continue;
    }
    const Vector g_new = merit.gradient(z_new);
    const Vector s = z_new - z;
    const Vector y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    z = z_new;
    g = g_new;
    value = value_new;
  }
  r.z = std::move(z);
  r.value = value;
  r.gradient = std::move(g);
  r.projected_gradient = pg_norm(r.z, r.gradient);
  r.iterations = it;
  return r;
}

// Quadratic model of the merit around z, evaluated on displacements d.
class QuadraticModel {
 public:
  QuadraticModel(const Vector& g, const SparseMatrix& h) : g_(g), h_(h) {}
  double value(const Vector& d) const { return g_.dot(d) + 0.5 * d.dot(h_ * d); }
  Vector gradient(const Vector& d) const { return g_ + h_ * d; }
  const Vector& slope() const { return g_; }
  const SparseMatrix& hessian() const { return h_; }

 private:
  const Vector& g_;
  const SparseMatrix& h_;
};

SparseMatrix selection(const std::vector<int>& index, Eigen::Index dim) {
  SparseMatrix select(static_cast<Eigen::Index>(index.size()), dim);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) trips.emplace_back(static_cast<int>(r), index[r], 1.0);
  select.setFromTriplets(trips.begin(), trips.end());
  return select;
}

// Solves (h + shift I) w = rhs with the smallest shift that makes the
// factorization positive definite.
Vector solve_regularized(Eigen::SimplicialLDLT<SparseMatrix>& ldlt, const SparseMatrix& h,
                         const Vector& rhs) {
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  SparseMatrix identity(h.rows(), h.cols());
  identity.setIdentity();
  double shift = 0.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    ldlt.factorize(shift == 0.0 ? h : SparseMatrix(h + shift * identity));
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
      Vector w = ldlt.solve(rhs);
      if (w.allFinite()) return w;
    }
    shift = shift == 0.0 ? 1e-12 * scale : 10.0 * shift;
  }
  return rhs / scale;
}

// Exact minimizer of the model on the face where `state` pins variables to
// a (-1) or b (+1); free variables that leave the box are pinned in turn.
Vector face_minimizer(const QuadraticModel& q, const Vector& a, const Vector& b,
                      std::vector<signed char> state) {
  const Eigen::Index dim = a.size();
  Vector d = Vector::Zero(dim);
  for (int pass = 0; pass < 20; ++pass) {
    std::vector<int> free_index;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (state[i] < 0) d[i] = a[i];
      else if (state[i] > 0) d[i] = b[i];
      else {
        d[i] = 0.0;
        free_index.push_back(static_cast<int>(i));
      }
    }
    if (free_index.empty()) break;
    const SparseMatrix select = selection(free_index, dim);
    const SparseMatrix h_free = select * q.hessian() * select.transpose();
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    ldlt.analyzePattern(h_free);
    const Vector w = solve_regularized(ldlt, h_free, -(select * q.gradient(d)));
    bool clamped = false;
    for (std::size_t r = 0; r < free_index.size(); ++r) {
      const int i = free_index[r];
      d[i] = w[static_cast<Eigen::Index>(r)];
      if (d[i] < a[i]) {
        state[i] = -1;
        clamped = true;
      } else if (d[i] > b[i]) {
        state[i] = 1;
        clamped = true;
      }
    }
    if (!clamped) return d;
  }
  return d.cwiseMax(a).cwiseMin(b);
}

// Minimizes the model over the finite box a <= d <= b with a Mehrotra
// predictor-corrector interior-point method, then moves to the face its
// multipliers identify. Entries with a == b are held at zero.
Vector box_qp(const QuadraticModel& q, const Vector& a, const Vector& b) {
  constexpr double kFractionToBoundary = 0.995;
  const Eigen::Index dim = a.size();
  std::vector<char> fixed(static_cast<std::size_t>(dim), 0);
  Vector d = Vector::Zero(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double w = b[i] - a[i];
    if (w <= 0.0) {
      fixed[i] = 1;
    } else {
      d[i] = std::clamp(0.0, a[i] + 0.05 * w, b[i] - 0.05 * w);
    }
  }

  // Fixed entries get an identity row and column.
  const SparseMatrix& h = q.hessian();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(h.nonZeros() + dim));
  for (int col = 0; col < h.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(h, col); it; ++it) {
      if (!fixed[it.row()] && !fixed[it.col()]) trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) trips.emplace_back(i, i, fixed[i] ? 1.0 : 0.0);
  SparseMatrix base(dim, dim);
  base.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  ldlt.analyzePattern(base);

  const double g_scale = std::max(1.0, q.slope().lpNorm<Eigen::Infinity>());
  Vector zl = Vector::Zero(dim);
  Vector zu = Vector::Zero(dim);
  int bounded = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (fixed[i]) continue;
    zl[i] = zu[i] = g_scale;
    bounded += 2;
  }
  if (bounded == 0) return d;

  auto slacks = [&](const Vector& dd, Vector& sl, Vector& su) {
    sl = dd - a;
    su = b - dd;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (fixed[i]) sl[i] = su[i] = 1.0;
    }
  };
  auto max_step = [&](const Vector& v, const Vector& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!fixed[i] && dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    return alpha;
  };

  Vector sl, su;
  for (int iter = 0; iter < 100; ++iter) {
    slacks(d, sl, su);
    const double mu = (zl.dot(sl) + zu.dot(su)) / bounded;
    Vector residual = q.gradient(d) - zl + zu;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (fixed[i]) residual[i] = 0.0;
    }
    if (mu <= 1e-14 * g_scale && residual.lpNorm<Eigen::Infinity>() <= 1e-11 * g_scale) break;

    SparseMatrix kkt = base;
    Vector sigma = zl.cwiseQuotient(sl) + zu.cwiseQuotient(su);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!fixed[i]) kkt.coeffRef(i, i) += sigma[i];
    }
    // Direction for complementarity targets t_l, t_u (componentwise).
    auto direction = [&](const Vector& tl, const Vector& tu, Vector& dd, Vector& dzl,
                         Vector& dzu) {
      Vector rhs = -residual + (tl.cwiseQuotient(sl) - zl) - (tu.cwiseQuotient(su) - zu);
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (fixed[i]) rhs[i] = 0.0;
      }
      dd = solve_regularized(ldlt, kkt, rhs);
      dzl = (tl - zl.cwiseProduct(sl) - zl.cwiseProduct(dd)).cwiseQuotient(sl);
      dzu = (tu - zu.cwiseProduct(su) + zu.cwiseProduct(dd)).cwiseQuotient(su);
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (fixed[i]) dd[i] = dzl[i] = dzu[i] = 0.0;
      }
    };

    Vector dd, dzl, dzu;
    direction(Vector::Zero(dim), Vector::Zero(dim), dd, dzl, dzu);
    const double ap = std::min(max_step(sl, dd), max_step(su, -dd));
    const double ad = std::min(max_step(zl, dzl), max_step(zu, dzu));
    const double mu_aff = ((zl + ad * dzl).dot(sl + ap * dd) + (zu + ad * dzu).dot(su - ap * dd)) /
                          bounded;
    const double centering = std::pow(std::max(0.0, mu_aff) / mu, 3);
    const Vector tl = Vector::Constant(dim, centering * mu) - (ap * dd).cwiseProduct(ad * dzl);
    const Vector tu = Vector::Constant(dim, centering * mu) + (ap * dd).cwiseProduct(ad * dzu);
    direction(tl, tu, dd, dzl, dzu);

    const double step_p =
        std::min(1.0, kFractionToBoundary * std::min(max_step(sl, dd), max_step(su, -dd)));
    const double step_d =
        std::min(1.0, kFractionToBoundary * std::min(max_step(zl, dzl), max_step(zu, dzu)));
    d += step_p * dd;
    zl += step_d * dzl;
    zu += step_d * dzu;
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (fixed[i]) d[i] = 0.0;
  }
  d = d.cwiseMax(a).cwiseMin(b);

  slacks(d, sl, su);
  std::vector<signed char> state(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (fixed[i]) {
      state[i] = -1;
    } else if (zl[i] > sl[i]) {
      state[i] = -1;
    } else if (zu[i] > su[i]) {
      state[i] = 1;
    }
  }
  const Vector face = face_minimizer(q, a, b, std::move(state));
  return q.value(face) <= q.value(d) ? face : d;
}

std::vector<signed char> face_of(const Vector& d, const Vector& a, const Vector& b) {
  std::vector<signed char> state(static_cast<std::size_t>(d.size()), 0);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] <= a[i]) state[i] = -1;
    else if (d[i] >= b[i]) state[i] = 1;
  }
  return state;
}

// Projected steepest-descent point of the model inside a <= d <= b, with
// the usual sufficient-decrease test along the projected path.
Vector cauchy_point(const QuadraticModel& q, const Vector& a, const Vector& b) {
  const Vector& g = q.slope();
  const double g_max = g.lpNorm<Eigen::Infinity>();
  if (g_max == 0.0) return Vector::Zero(g.size());
  double alpha = std::max(b.lpNorm<Eigen::Infinity>(), a.lpNorm<Eigen::Infinity>()) / g_max;
  Vector d;
  for (int bt = 0; bt < 60; ++bt) {
    d = (-alpha * g).cwiseMax(a).cwiseMin(b);
    if (q.value(d) <= 0.01 * g.dot(d)) return d;
    alpha *= 0.5;
  }
  return d;
}

InnerResult newton_in_box(const AugmentedLagrangian& merit, const Vector& lo, const Vector& hi,
                          Vector z, double tol, int max_iters) {
  constexpr double kShrink = 0.25;
  constexpr double kExpand = 0.75;
  double value = merit.value(z);
  Vector g = merit.gradient(z);
  auto pg_norm = [&](const Vector& zz, const Vector& gg) {
    return (project(zz - gg, lo, hi) - zz).lpNorm<Eigen::Infinity>();
  };

  // Trust region in the max-norm, so the model subproblem is a box QP.
  double radius = 1.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (pg_norm(z, g) <= tol) break;
    const SparseMatrix hess = merit.hessian(z);
    const QuadraticModel model(g, hess);
    const Vector a = (lo - z).cwiseMax(Vector::Constant(z.size(), -radius));
    const Vector b = (hi - z).cwiseMin(Vector::Constant(z.size(), radius));
    const Vector box_lo = a.cwiseMin(0.0);
    const Vector box_hi = b.cwiseMax(0.0);
    const Vector d_cauchy = cauchy_point(model, box_lo, box_hi);
    Vector d = box_qp(model, box_lo, box_hi);
    for (const Vector& candidate :
         {d_cauchy, face_minimizer(model, box_lo, box_hi, face_of(d_cauchy, box_lo, box_hi))}) {
      if (!(model.value(d) <= model.value(candidate))) d = candidate;
    }
    const double predicted = model.value(d);
    if (!(predicted < 0.0)) break;
    const Vector z_new = project(z + d, lo, hi);
    const double value_new = merit.value(z_new);
    const double ratio = std::isfinite(value_new) ? (value_new - value) / predicted : -1.0;
    const double d_norm = d.lpNorm<Eigen::Infinity>();
    if (ratio < kShrink) {
      radius = kShrink * d_norm;
    } else if (ratio > kExpand && d_norm >= 0.99 * radius) {
      radius *= 2.0;
    }
    if (ratio > kArmijo) {
      z = z_new;
      value = value_new;
      g = merit.gradient(z);
    } else if (radius < 1e-14 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
      break;
    }
  }
  InnerResult r;
  r.projected_gradient = pg_norm(z, g);
  r.z = std::move(z);
  r.value = value;
  r.gradient = std::move(g);
  r.iterations = it;
  return r;
}

}  // namespace

void SolveOptions::validate() const {
  if (max_outer_iters < 1 || max_inner_iters < 1) {
    throw std::invalid_argument("solver iteration limits must be positive");
  }
  if (!(constraint_tol > 0.0) || !(optimality_tol > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (!(initial_penalty > 0.0)) throw std::invalid_argument("initial penalty must be positive");
  if (!(penalty_growth > 1.0)) throw std::invalid_argument("penalty growth must exceed 1");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIters:
      return "max-iters";
    case SolveStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

double projected_gradient_norm(const NlpProblem& nlp, const Vector& z, const Vector& g) {
  return (project(z - g, nlp.lower, nlp.upper) - z).lpNorm<Eigen::Infinity>();
}

SolveResult solve(const NlpProblem& nlp, const Vector& z0, const SolveOptions& options) {
  options.validate();
  if (z0.size() != nlp.num_variables) throw std::invalid_argument("solve: z0 has wrong length");

  SolveResult result;
  result.multipliers = Vector::Zero(nlp.num_constraints);
  Vector z = project(z0, nlp.lower, nlp.upper);
  result.z_opt = z;

  const double f0 = nlp.objective(z);
  const Vector c0 = nlp.constraints(z);
  result.function_evals = 1;
  if (!std::isfinite(f0) || !c0.allFinite()) {
    result.status = SolveStatus::kFailed;
    result.objective_value = f0;
    result.constraint_violation = std::numeric_limits<double>::infinity();
    result.message = "objective or constraints not finite at the initial point";
    return result;
  }

  int evals = 1;
  AugmentedLagrangian merit(nlp, evals);
  Vector multipliers = Vector::Zero(nlp.num_constraints);
  double penalty = options.initial_penalty;
  double previous_violation = std::numeric_limits<double>::infinity();
  int stalled = 0;

  // Best iterate: feasible points ranked by objective, others by violation.
  bool have_best = false;
  bool best_feasible = false;
  double best_key = 0.0;
  auto consider = [&](const Vector& zc, double f, double viol, double pg, const Vector& mult) {
    const bool feasible = viol <= options.constraint_tol;
    const double key = feasible ? f : viol;
    const bool better = !have_best || (feasible && !best_feasible) ||
                        (feasible == best_feasible && key <= best_key);
    if (!better) return;
    have_best = true;
    best_feasible = feasible;
    best_key = key;
    result.z_opt = zc;
    result.objective_value = f;
    result.constraint_violation = viol;
    result.projected_gradient_norm = pg;
    result.multipliers = mult;
  };

  result.status = SolveStatus::kMaxIters;
  for (int outer = 0; outer < options.max_outer_iters; ++outer) {
    merit.set(multipliers, penalty);
    const InnerResult inner =
        options.inner_method == InnerMethod::kProjectedNewton
            ? newton_in_box(merit, nlp.lower, nlp.upper, z, options.optimality_tol,
                            options.max_inner_iters)
            : minimize_in_box(merit, nlp.lower, nlp.upper, z, options.optimality_tol,
                              options.max_inner_iters);
    z = inner.z;
    result.iterations += inner.iterations;
    result.outer_iterations = outer + 1;

    const Vector c = nlp.constraints(z);
    const double f = nlp.objective(z);
    ++evals;
    if (!std::isfinite(f) || !c.allFinite()) {
      result.status = SolveStatus::kFailed;
      result.message = "objective or constraints became non-finite";
      break;
    }
    const double violation = c.size() > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
    multipliers += penalty * c;
    result.violation_history.push_back(violation);
    result.penalty_history.push_back(penalty);

    // The inner gradient already equals grad f + J^T (lambda_old + rho c),
    // i.e. the Lagrangian gradient at the updated multipliers.
    const double pg = inner.projected_gradient;
    consider(z, f, violation, pg, multipliers);

    if (violation <= options.constraint_tol && pg <= options.optimality_tol) {
      result.status = SolveStatus::kConverged;
      result.z_opt = z;
      result.objective_value = f;
      result.constraint_violation = violation;
      result.projected_gradient_norm = pg;
      result.multipliers = multipliers;
      break;
    }
    if (violation > 0.25 * previous_violation) {
      penalty = std::min(kMaxPenalty, penalty * options.penalty_growth);
    }
    stalled = violation >= kStallRatio * previous_violation ? stalled + 1 : 0;
    previous_violation = violation;
    if (stalled >= kStallLimit) {
      result.message = "constraint violation stagnated; returning best iterate";
      break;
    }
  }
  result.function_evals = evals;
  if (result.status == SolveStatus::kMaxIters && result.message.empty()) {
    result.message = "iteration budget exhausted; returning best iterate";
  }
  return result;
}

}  // namespace swocp
