#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swocp/ocp.hpp"
#include "swocp/problems.hpp"

namespace swocp {
namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Two modes with a continuous control each, so the per-mode controls matter.
SwitchedProblem controlled_pair() {
  Mode m0;
  m0.dynamics = [](double t, const Vector& x, const Vector& u) {
    return Vector(vec({x[1] + t * u[0], -x[0] * x[0]}));
  };
  m0.running_cost = [](double, const Vector& x, const Vector& u) { return x.squaredNorm() + u[0]; };
  Mode m1;
  m1.dynamics = [](double, const Vector& x, const Vector& u) {
    return Vector(vec({std::sin(x[0]) * u[0], x[1] - 2.0}));
  };
  m1.running_cost = [](double t, const Vector& x, const Vector& u) {
    return t * x[0] + u[0] * u[0];
  };
  BoundarySpec b{0.0, 1.0, vec({0.0, 0.0}), vec({-1.0, -1.0}), vec({1.0, 1.0})};
  ControlSet omega{vec({-2.0}), vec({2.0})};
  return SwitchedProblem("pair", 2, 1, {m0, m1}, b, omega);
}

TEST(AuxCost, StatedValues) {
  EXPECT_DOUBLE_EQ(aux_cost(0.5, 0.2), 0.2);
  EXPECT_DOUBLE_EQ(aux_cost(0.25, 1.0), 0.75);
  for (double beta : {0.0, 0.01, 0.2, 5.0}) {
    EXPECT_EQ(aux_cost(0.0, beta), 0.0);
    EXPECT_EQ(aux_cost(1.0, beta), 0.0);
  }
}

TEST(AuxCost, SymmetricPositiveInsideAndPeaksAtHalf) {
  const double beta = 0.3;
  for (int i = 1; i < 1000; ++i) {
    const double v = i / 1000.0;
    EXPECT_NEAR(aux_cost(v, beta), aux_cost(1.0 - v, beta), 1e-15);
    EXPECT_GT(aux_cost(v, beta), 0.0);
    EXPECT_LE(aux_cost(v, beta), beta + 1e-15);
  }
}

TEST(AuxCost, RejectsSignalOutsideUnitInterval) {
  EXPECT_THROW(aux_cost(-1e-6, 1.0), std::domain_error);
  EXPECT_THROW(aux_cost(1.0 + 1e-6, 1.0), std::domain_error);
  EXPECT_NO_THROW(aux_cost(1.0 + 1e-10, 1.0));
}

TEST(AuxCost, DerivativeMatchesCentralDifference) {
  for (double v : {0.1, 0.3, 0.5, 0.77}) {
    const double h = 1e-6;
    const double fd = (aux_cost(v + h, 0.4) - aux_cost(v - h, 0.4)) / (2 * h);
    EXPECT_NEAR(aux_cost_derivative(v, 0.4), fd, 1e-8);
  }
}

TEST(Embedding, RejectsNegativeBeta) {
  EXPECT_THROW(embed(problems::two_tank(), -0.1), std::invalid_argument);
}

TEST(Embedding, ConvexCombinationExactAtEndpoints) {
  const SwitchedProblem base = controlled_pair();
  const EmbeddedProblem e = embed(base, 0.7);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = 0.5 * (d(rng) + 2.0) / 2.0;
    const Vector x = vec({d(rng), d(rng)});
    const Vector u0 = vec({d(rng)});
    const Vector u1 = vec({d(rng)});
    const Vector at0 = e.dynamics(t, x, u0, u1, 0.0);
    const Vector at1 = e.dynamics(t, x, u0, u1, 1.0);
    const Vector f0 = base.dynamics(0, t, x, u0);
    const Vector f1 = base.dynamics(1, t, x, u1);
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(at0[i], f0[i]);
      EXPECT_EQ(at1[i], f1[i]);
    }
    EXPECT_EQ(e.running_cost(t, x, u0, u1, 0.0), base.running_cost(0, t, x, u0));
    EXPECT_EQ(e.running_cost(t, x, u0, u1, 1.0), base.running_cost(1, t, x, u1));
  }
}

TEST(Embedding, TwoTankEmbeddedFlow) {
  const EmbeddedProblem e = embed(problems::two_tank(), 0.2);
  const Vector none(0);
  for (double v : {0.0, 0.3, 0.9}) {
    const Vector x = vec({2.5, 1.7});
    const Vector f = e.dynamics(0.0, x, none, none, v);
    EXPECT_NEAR(f[0], 1.0 + v - std::sqrt(2.5), 1e-15);
    EXPECT_NEAR(f[1], std::sqrt(2.5) - std::sqrt(1.7), 1e-15);
  }
}

TEST(Embedding, DerivativesMatchFiniteDifferences) {
  const EmbeddedProblem e = embed(controlled_pair(), 0.4);
  const double t = 0.3;
  Vector q = vec({0.4, -0.7, 1.1, -0.6, 0.35});
  auto split = [](const Vector& q) {
    return std::make_tuple(Vector(q.head(2)), Vector(q.segment(2, 1)), Vector(q.segment(3, 1)),
                           q[4]);
  };
  auto [x, u0, u1, v] = split(q);
  const EmbeddedDerivatives d = e.derivatives(t, x, u0, u1, v);
  for (int c = 0; c < 5; ++c) {
    const double h = 1e-6;
    Vector qp = q;
    Vector qm = q;
    qp[c] += h;
    qm[c] -= h;
    auto [xp, u0p, u1p, vp] = split(qp);
    auto [xm, u0m, u1m, vm] = split(qm);
    const Vector fd =
        (e.dynamics(t, xp, u0p, u1p, vp) - e.dynamics(t, xm, u0m, u1m, vm)) / (2 * h);
    const double fc =
        (e.running_cost(t, xp, u0p, u1p, vp) - e.running_cost(t, xm, u0m, u1m, vm)) / (2 * h);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(d.dynamics(i, c), fd[i], 1e-7);
    EXPECT_NEAR(d.cost[c], fc, 1e-7);
  }
}

TEST(Hamiltonian, ReducesToCostCombinationWithZeroCostate) {
  const SwitchedProblem base = controlled_pair();
  const EmbeddedProblem e = embed(base, 0.0);
  const Vector x = vec({0.2, 0.4});
  const Vector u0 = vec({0.5});
  const Vector u1 = vec({-1.5});
  for (double v : {0.0, 0.25, 0.8}) {
    const double expected =
        (1 - v) * base.running_cost(0, 0.1, x, u0) + v * base.running_cost(1, 0.1, x, u1);
    EXPECT_NEAR(hamiltonian(e, 0.1, x, Vector::Zero(2), u0, u1, v), expected, 1e-14);
  }
}

TEST(Hamiltonian, TwoTankHandValue) {
  const EmbeddedProblem e = embed(problems::two_tank(), 0.0);
  const Vector none(0);
  const double h = hamiltonian(e, 0.0, vec({3.0, 3.0}), vec({1.0, 0.0}), none, none, 0.5);
  EXPECT_NEAR(h, 1.5 - std::sqrt(3.0), 1e-14);
}

TEST(Hamiltonian, SecondDifferenceInModeSignalIsMinusEightBeta) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double beta : {0.01, 0.2, 1.0, 3.0}) {
    const EmbeddedProblem e = embed(controlled_pair(), beta);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = vec({d(rng), d(rng)});
      const Vector lambda = vec({3 * d(rng), 3 * d(rng)});
      const Vector u0 = vec({2 * d(rng)});
      const Vector u1 = vec({2 * d(rng)});
      const double step = 0.1;
      const double v = 0.1 + 0.8 * (d(rng) + 1.0) / 2.0;
      auto H = [&](double s) { return hamiltonian(e, 0.2, x, lambda, u0, u1, s); };
      const double second = (H(v + step) - 2 * H(v) + H(v - step)) / (step * step);
      EXPECT_LT(std::abs(second + 8 * beta) / (8 * beta), 1e-6);
    }
  }
}

TEST(Hamiltonian, GridMinimizerOnBoundaryWhenConcave) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const EmbeddedProblem e = embed(controlled_pair(), 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = vec({d(rng), d(rng)});
    const Vector lambda = vec({3 * d(rng), 3 * d(rng)});
    const Vector u0 = vec({2 * d(rng)});
    const Vector u1 = vec({2 * d(rng)});
    int best = 0;
    double best_value = 1e300;
    for (int i = 0; i <= 1000; ++i) {
      const double value = hamiltonian(e, 0.5, x, lambda, u0, u1, i / 1000.0);
      if (value < best_value) {
        best_value = value;
        best = i;
      }
    }
    EXPECT_TRUE(best == 0 || best == 1000) << "interior minimizer at " << best;
  }
}

TEST(Hamiltonian, RejectsDimensionMismatch) {
  const EmbeddedProblem e = embed(problems::two_tank(), 0.0);
  const Vector none(0);
  EXPECT_THROW(hamiltonian(e, 0.0, vec({3.0, 3.0}), vec({1.0}), none, none, 0.5),
               std::invalid_argument);
}

TEST(SwitchedProblem, ValidatesConstruction) {
  Mode m;
  m.dynamics = [](double, const Vector& x, const Vector&) { return x; };
  m.running_cost = [](double, const Vector&, const Vector&) { return 0.0; };
  const Vector one = vec({1.0});
  EXPECT_THROW(SwitchedProblem("bad", 1, 0, {m, m}, BoundarySpec{1.0, 0.0, one, one, one},
                               ControlSet{Vector(0), Vector(0)}),
               std::invalid_argument);
  EXPECT_THROW(SwitchedProblem("bad", 1, 0, {m, m}, BoundarySpec{0.0, 1.0, one, 2 * one, one},
                               ControlSet{Vector(0), Vector(0)}),
               std::invalid_argument);
  EXPECT_THROW(SwitchedProblem("bad", 1, 1, {m, m}, BoundarySpec{0.0, 1.0, one, one, one},
                               ControlSet{one, Vector::Zero(1)}),
               std::invalid_argument);
}

TEST(SwitchedProblem, FinalBoxViolation) {
  const SwitchedProblem p = problems::two_tank();
  EXPECT_EQ(p.final_box_violation(vec({2.0, 3.0})), 0.0);
  EXPECT_NEAR(p.final_box_violation(vec({4.5, 3.0})), 0.5, 1e-15);
  EXPECT_NEAR(p.final_box_violation(vec({1.0, 2.75})), 0.25, 1e-15);
}

TEST(Trajectory, InterpolatesLinearlyAndClamps) {
  Trajectory tr;
  tr.times = {0.0, 1.0, 3.0};
  tr.states = Matrix(3, 1);
  tr.states << 0.0, 2.0, 6.0;
  tr.controls_u0 = Matrix(3, 0);
  tr.controls_u1 = Matrix(3, 0);
  tr.mode_signal = vec({0.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(tr.interpolate(0.5).x[0], 1.0);
  EXPECT_DOUBLE_EQ(tr.interpolate(2.0).vbar, 0.5);
  EXPECT_DOUBLE_EQ(tr.interpolate(-1.0).x[0], 0.0);
  EXPECT_DOUBLE_EQ(tr.interpolate(9.0).x[0], 6.0);
}

}  // namespace
}  // namespace swocp
