#include "omtk/mpp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "omtk/error.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

double trapezoid_weight(Eigen::Index n, Eigen::Index k) { return (n == 0 || n == k) ? 0.5 : 1.0; }

// Stencils on O(1) samples lose about log2(1/dt^2) bits in double; the
// extended accumulator keeps the differences of the stored doubles exact.
double centered(const Matrix& p, Eigen::Index e, int i, double dt) {
  const long double diff = static_cast<long double>(p(e + 1, i)) - p(e - 1, i);
  return static_cast<double>(diff / (2.0L * dt));
}

double second(const Matrix& p, Eigen::Index e, int i, double dt) {
  const long double diff =
      static_cast<long double>(p(e + 1, i)) - 2.0L * p(e, i) + p(e - 1, i);
  return static_cast<double>(diff / (static_cast<long double>(dt) * dt));
}

class HamiltonianAction final : public DiscreteAction {
 public:
  HamiltonianAction(const DegenerateSystem& system, const BoundaryConditions& bc,
                    const Grid& grid)
      : DiscreteAction(grid), system_(system), bc_(bc), d_(system.d),
        k_(static_cast<Eigen::Index>(grid.steps)) {
    if (!system.is_hamiltonian()) {
      throw UnsupportedError("second-order boundary data need p_i = x_{d+i}");
    }
    if (bc.left.size() != 2 * d_ || bc.right.size() != 2 * d_) {
      throw InputError("second-order boundary data need (phi1, phi1') at both ends");
    }
    if (k_ < 4) throw InputError("grid too coarse for the second-order form");
    for (int j = 0; j < d_; ++j) {
      const Field& f = system.q[j];
      f_.emplace_back(f, d_ + j, 2 * d_, system.moment_order);
      div_.emplace_back(f.partial(dsl::Variable::x(d_ + j + 1)), d_ + j, 2 * d_,
                        system.moment_order);
    }
  }

  Eigen::Index size() const override { return (k_ - 1) * d_; }
  int sample_dim() const override { return d_; }

  double value(const Vector& z) const override { return evaluate(z, nullptr, nullptr); }

  double gradient(const Vector& z, Vector& g) const override {
    return evaluate(z, &g, nullptr);
  }

  Vector pack(const Matrix& samples) const override {
    check_samples(samples);
    Vector z(size());
    for (Eigen::Index n = 1; n < k_; ++n) {
      for (int i = 0; i < d_; ++i) z((n - 1) * d_ + i) = samples(n, i);
    }
    return z;
  }

  ReferencePath path(const Vector& z) const override { return hamiltonian(z).lift(); }

  ActionValue action(const Vector& z) const override {
    return om_action_hamiltonian(system_, hamiltonian(z));
  }

  Eigen::SparseMatrix<double> hessian(const Vector& z) const override {
    const Matrix p = extended(z);
    const double dt = grid_.dt();
    const int dim = 2 * d_;
    const int local = 3 * d_;
    // y = (position, velocity, acceleration) = stencil * (P_{e-1}, P_e, P_{e+1}).
    Matrix stencil = Matrix::Zero(local, local);
    for (int i = 0; i < d_; ++i) {
      stencil(i, d_ + i) = 1.0;
      stencil(d_ + i, i) = -1.0 / (2.0 * dt);
      stencil(d_ + i, 2 * d_ + i) = 1.0 / (2.0 * dt);
      stencil(2 * d_ + i, i) = 1.0 / (dt * dt);
      stencil(2 * d_ + i, d_ + i) = -2.0 / (dt * dt);
      stencil(2 * d_ + i, 2 * d_ + i) = 1.0 / (dt * dt);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> x(dim), xs(dim), gp(dim), gm(dim), grad_f(dim);
    Matrix hy(local, local);
    for (Eigen::Index n = 0; n <= k_; ++n) {
      const Eigen::Index e = n + 1;
      const double t = grid_.time(static_cast<std::size_t>(n));
      const double scale = trapezoid_weight(n, k_) * dt;
      for (int i = 0; i < d_; ++i) {
        x[i] = p(e, i);
        x[d_ + i] = centered(p, e, i, dt);
      }
      hy.setZero();
      for (int j = 0; j < d_; ++j) {
        const double r = second(p, e, j, dt) - f_[j].gradient(t, x, grad_f);
        // Gauss-Newton part from r_j = a_j - f_j(x).
        Vector gr = Vector::Zero(local);
        for (int c = 0; c < dim; ++c) gr(c) = -grad_f[c];
        gr(dim + j) = 1.0;
        hy.noalias() += scale * gr * gr.transpose();
        // Curvature of -r f_j + div_j / 2 in x.
        for (int c = 0; c < dim; ++c) {
          const double h = 1e-5 * (1.0 + std::abs(x[c]));
          xs = x;
          xs[c] = x[c] + h;
          f_[j].gradient(t, xs, gp);
          xs[c] = x[c] - h;
          f_[j].gradient(t, xs, gm);
          for (int b = 0; b < dim; ++b) hy(b, c) -= scale * r * (gp[b] - gm[b]) / (2.0 * h);
          xs[c] = x[c] + h;
          div_[j].gradient(t, xs, gp);
          xs[c] = x[c] - h;
          div_[j].gradient(t, xs, gm);
          for (int b = 0; b < dim; ++b) hy(b, c) += 0.5 * scale * (gp[b] - gm[b]) / (2.0 * h);
        }
      }
      hy = 0.5 * (hy + hy.transpose()).eval();
      const Matrix hu = stencil.transpose() * hy * stencil;
      for (int s = 0; s < 3; ++s) {
        const Eigen::Index row_node = unknown_node(e - 1 + s);
        if (row_node < 0) continue;
        for (int s2 = 0; s2 < 3; ++s2) {
          const Eigen::Index col_node = unknown_node(e - 1 + s2);
          if (col_node < 0) continue;
          for (int i = 0; i < d_; ++i) {
            for (int i2 = 0; i2 < d_; ++i2) {
              triplets.emplace_back(row_node * d_ + i, col_node * d_ + i2,
                                    hu(s * d_ + i, s2 * d_ + i2));
            }
          }
        }
      }
    }
    Eigen::SparseMatrix<double> out(size(), size());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
  }

 private:
  /// Unknown block of an extended row; ghosts fold onto their mirror node,
  /// boundary rows have none.
  Eigen::Index unknown_node(Eigen::Index ext) const {
    if (ext == 0) ext = 2;
    if (ext == k_ + 2) ext = k_;
    if (ext == 1 || ext == k_ + 1) return -1;
    return ext - 2;
  }

  void check_samples(const Matrix& samples) const {
    if (samples.rows() != k_ + 1 || samples.cols() != d_) {
      throw InputError("initial path must be nodes x d");
    }
  }

  /// Rows -1..K+1 stored at offsets 0..K+2.
  Matrix extended(const Vector& z) const {
    const double dt = grid_.dt();
    Matrix p(k_ + 3, d_);
    for (int i = 0; i < d_; ++i) {
      p(1, i) = bc_.left(i);
      p(k_ + 1, i) = bc_.right(i);
    }
    for (Eigen::Index n = 1; n < k_; ++n) {
      for (int i = 0; i < d_; ++i) p(n + 1, i) = z((n - 1) * d_ + i);
    }
    for (int i = 0; i < d_; ++i) {
      p(0, i) = p(2, i) - 2.0 * dt * bc_.left(d_ + i);
      p(k_ + 2, i) = p(k_, i) + 2.0 * dt * bc_.right(d_ + i);
    }
    return p;
  }

  HamiltonianPath hamiltonian(const Vector& z) const {
    const Matrix p = extended(z);
    const double dt = grid_.dt();
    HamiltonianPath out{grid_, Matrix(k_ + 1, d_), Matrix(k_ + 1, d_), Matrix(k_ + 1, d_)};
    for (Eigen::Index n = 0; n <= k_; ++n) {
      const Eigen::Index e = n + 1;
      out.position.row(n) = p.row(e);
      for (int i = 0; i < d_; ++i) {
        out.velocity(n, i) = centered(p, e, i, dt);
        out.acceleration(n, i) = second(p, e, i, dt);
      }
    }
    return out;
  }

  double evaluate(const Vector& z, Vector* grad, ActionValue* parts) const {
    const Matrix p = extended(z);
    const double dt = grid_.dt();
    const int dim = 2 * d_;
    Matrix g_ext;
    if (grad != nullptr) g_ext = Matrix::Zero(k_ + 3, d_);
    std::vector<double> x(dim), r(d_), grad_f(dim), grad_div(dim), gx(dim);
    double kinetic = 0.0;
    double divergence = 0.0;
    for (Eigen::Index n = 0; n <= k_; ++n) {
      const Eigen::Index e = n + 1;
      const double t = grid_.time(static_cast<std::size_t>(n));
      const double w = trapezoid_weight(n, k_);
      for (int i = 0; i < d_; ++i) {
        x[i] = p(e, i);
        x[d_ + i] = centered(p, e, i, dt);
      }
      double r2 = 0.0;
      double div = 0.0;
      std::fill(gx.begin(), gx.end(), 0.0);
      for (int j = 0; j < d_; ++j) {
        const double a = second(p, e, j, dt);
        if (grad != nullptr) {
          r[j] = a - f_[j].gradient(t, x, grad_f);
          const double dv = div_[j].gradient(t, x, grad_div);
          div += dv;
          for (int c = 0; c < dim; ++c) gx[c] += -r[j] * grad_f[c] + 0.5 * grad_div[c];
        } else {
          r[j] = a - f_[j].value(t, x);
          div += div_[j].value(t, x);
        }
        r2 += r[j] * r[j];
      }
      kinetic += w * r2;
      divergence += w * div;
      if (grad == nullptr) continue;
      const double scale = w * dt;
      for (int i = 0; i < d_; ++i) {
        const double gpos = scale * gx[i];
        const double gvel = scale * gx[d_ + i];
        const double gacc = scale * r[i];
        g_ext(e, i) += gpos - 2.0 * gacc / (dt * dt);
        g_ext(e + 1, i) += gvel / (2.0 * dt) + gacc / (dt * dt);
        g_ext(e - 1, i) += -gvel / (2.0 * dt) + gacc / (dt * dt);
      }
    }
    if (grad != nullptr) {
      g_ext.row(2) += g_ext.row(0);
      g_ext.row(k_) += g_ext.row(k_ + 2);
      grad->resize(size());
      for (Eigen::Index n = 1; n < k_; ++n) {
        for (int i = 0; i < d_; ++i) (*grad)((n - 1) * d_ + i) = g_ext(n + 1, i);
      }
    }
    if (parts != nullptr) {
      parts->kinetic = -0.5 * dt * kinetic;
      parts->divergence = -0.5 * dt * divergence;
      parts->total = parts->kinetic + parts->divergence;
    }
    return 0.5 * dt * (kinetic + divergence);
  }

  DegenerateSystem system_;
  BoundaryConditions bc_;
  int d_;
  Eigen::Index k_;
  std::vector<DiracField> f_;
  std::vector<DiracField> div_;
};

class GeneralAction final : public DiscreteAction {
 public:
  GeneralAction(const DegenerateSystem& system, const BoundaryConditions& bc, const Grid& grid)
      : DiscreteAction(grid), system_(system), bc_(bc), d_(system.d), m_(system.m),
        k_(static_cast<Eigen::Index>(grid.steps)) {
    if (bc.left.size() != m_ || bc.right.size() != m_) {
      throw InputError("general boundary data need phi2 at both ends");
    }
    if ((bc.left - system.x0.tail(m_)).cwiseAbs().maxCoeff() > 1e-12) {
      throw InputError("left boundary phi2(0) must equal the initial point");
    }
    if (k_ < 2) throw InputError("grid too coarse for the general form");
    const int dim = d_ + m_;
    for (int j = 0; j < m_; ++j) {
      const Field& q = system.q[j];
      q_.emplace_back(q, d_ + j, dim, system.moment_order);
      div_.emplace_back(q.partial(dsl::Variable::x(d_ + j + 1)), d_ + j, dim,
                        system.moment_order);
    }
    for (int i = 0; i < d_; ++i) p_.emplace_back(system.p[i], dim);
  }

  Eigen::Index size() const override { return (k_ - 1) * m_; }
  int sample_dim() const override { return m_; }

  double value(const Vector& z) const override { return evaluate(z, nullptr); }
  double gradient(const Vector& z, Vector& g) const override { return evaluate(z, &g); }

  Vector pack(const Matrix& samples) const override {
    if (samples.rows() != k_ + 1 || samples.cols() != m_) {
      throw InputError("initial path must be nodes x m");
    }
    Vector z(size());
    for (Eigen::Index n = 1; n < k_; ++n) {
      for (int j = 0; j < m_; ++j) z((n - 1) * m_ + j) = samples(n, j);
    }
    return z;
  }

  ReferencePath path(const Vector& z) const override {
    Matrix state, velocity2;
    build(z, state, velocity2);
    Matrix dphi(k_ + 1, d_ + m_);
    std::vector<double> x(d_ + m_), p(d_);
    for (Eigen::Index n = 0; n <= k_; ++n) {
      for (int c = 0; c < d_ + m_; ++c) x[c] = state(n, c);
      system_.drift_p(grid_.time(static_cast<std::size_t>(n)), x, p);
      for (int i = 0; i < d_; ++i) dphi(n, i) = p[i];
      dphi.row(n).tail(m_) = velocity2.row(n);
    }
    return ReferencePath::from_samples(grid_, d_, m_, std::move(state), std::move(dphi));
  }

  ActionValue action(const Vector& z) const override { return om_action(system_, path(z)); }

 private:
  void build(const Vector& z, Matrix& state, Matrix& velocity2) const {
    const double dt = grid_.dt();
    const int dim = d_ + m_;
    state.resize(k_ + 1, dim);
    Matrix second(k_ + 1, m_);
    second.row(0) = bc_.left.transpose();
    second.row(k_) = bc_.right.transpose();
    for (Eigen::Index n = 1; n < k_; ++n) {
      for (int j = 0; j < m_; ++j) second(n, j) = z((n - 1) * m_ + j);
    }
    state.rightCols(m_) = second;
    std::vector<double> x(dim), p(d_);
    for (int i = 0; i < d_; ++i) state(0, i) = system_.x0(i);
    for (Eigen::Index n = 0; n < k_; ++n) {
      for (int c = 0; c < dim; ++c) x[c] = state(n, c);
      system_.drift_p(grid_.time(static_cast<std::size_t>(n)), x, p);
      for (int i = 0; i < d_; ++i) state(n + 1, i) = x[i] + dt * p[i];
    }
    velocity2 = finite_difference(second, dt);
  }

  double evaluate(const Vector& z, Vector* grad) const {
    Matrix state, velocity2;
    build(z, state, velocity2);
    const double dt = grid_.dt();
    const int dim = d_ + m_;
    std::vector<double> x(dim), grad_q(dim), grad_div(dim), gx(dim);
    Matrix g_state;   // d J / d state_n, direct dependence
    Matrix g_vel;     // d J / d phi2'_n
    if (grad != nullptr) {
      g_state = Matrix::Zero(k_ + 1, dim);
      g_vel = Matrix::Zero(k_ + 1, m_);
    }
    double total = 0.0;
    for (Eigen::Index n = 0; n <= k_; ++n) {
      const double t = grid_.time(static_cast<std::size_t>(n));
      const double w = trapezoid_weight(n, k_);
      for (int c = 0; c < dim; ++c) x[c] = state(n, c);
      double r2 = 0.0;
      double div = 0.0;
      std::fill(gx.begin(), gx.end(), 0.0);
      for (int j = 0; j < m_; ++j) {
        double r;
        if (grad != nullptr) {
          r = velocity2(n, j) - q_[j].gradient(t, x, grad_q);
          div += div_[j].gradient(t, x, grad_div);
          for (int c = 0; c < dim; ++c) gx[c] += -r * grad_q[c] + 0.5 * grad_div[c];
          g_vel(n, j) = w * dt * r;
        } else {
          r = velocity2(n, j) - q_[j].value(t, x);
          div += div_[j].value(t, x);
        }
        r2 += r * r;
      }
      total += w * (r2 + div);
      if (grad != nullptr) {
        for (int c = 0; c < dim; ++c) g_state(n, c) = w * dt * gx[c];
      }
    }
    if (grad != nullptr) {
      // Transpose of the difference operator.
      Matrix g2 = g_state.rightCols(m_);
      const double h = 2.0 * dt;
      g2.row(0) += -3.0 / h * g_vel.row(0);
      g2.row(1) += 4.0 / h * g_vel.row(0);
      g2.row(2) += -1.0 / h * g_vel.row(0);
      for (Eigen::Index n = 1; n < k_; ++n) {
        g2.row(n + 1) += g_vel.row(n) / h;
        g2.row(n - 1) -= g_vel.row(n) / h;
      }
      g2.row(k_) += 3.0 / h * g_vel.row(k_);
      g2.row(k_ - 1) += -4.0 / h * g_vel.row(k_);
      g2.row(k_ - 2) += 1.0 / h * g_vel.row(k_);
      // Adjoint of the explicit Euler recursion for phi1.
      if (d_ > 0) {
        Vector lambda = g_state.row(k_).head(d_).transpose();
        std::vector<double> gp(dim);
        for (Eigen::Index n = k_ - 1; n >= 0; --n) {
          for (int c = 0; c < dim; ++c) x[c] = state(n, c);
          const double t = grid_.time(static_cast<std::size_t>(n));
          Vector next = g_state.row(n).head(d_).transpose() + lambda;
          for (int i = 0; i < d_; ++i) {
            p_[i].gradient(t, x, gp);
            for (int a = 0; a < d_; ++a) next(a) += dt * gp[a] * lambda(i);
            for (int j = 0; j < m_; ++j) g2(n, j) += dt * gp[d_ + j] * lambda(i);
          }
          lambda = std::move(next);
        }
      }
      grad->resize(size());
      for (Eigen::Index n = 1; n < k_; ++n) {
        for (int j = 0; j < m_; ++j) (*grad)((n - 1) * m_ + j) = g2(n, j);
      }
    }
    return 0.5 * dt * total;
  }

  DegenerateSystem system_;
  BoundaryConditions bc_;
  int d_;
  int m_;
  Eigen::Index k_;
  std::vector<DiracField> q_;
  std::vector<DiracField> div_;
  std::vector<StateField> p_;
};

std::string iterate_summary(const Vector& z, std::size_t iteration) {
  std::ostringstream os;
  os << "objective is NaN at iteration " << iteration << " (|z|_inf = "
     << (z.size() ? z.cwiseAbs().maxCoeff() : 0.0) << ", first entries:";
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(z.size(), 6); ++i) os << ' ' << z(i);
  os << ")";
  return os.str();
}

/// J(z + alpha s) or +inf when the drift cannot be evaluated there.
double trial_value(const DiscreteAction& f, const Vector& z) {
  try {
    const double v = f.value(z);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  } catch (const EvalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct LineSearch {
  double alpha = 0.0;
  double value = 0.0;
  bool ok = false;
};

LineSearch armijo(const DiscreteAction& f, const Vector& z, double value, const Vector& g,
                  const Vector& step) {
  constexpr double kSufficient = 1e-4;
  const double slope = g.dot(step);
  double alpha = 1.0;
  for (int tries = 0; tries < 60; ++tries, alpha *= 0.5) {
    const double v = trial_value(f, z + alpha * step);
    if (v <= value + kSufficient * alpha * slope) return {alpha, v, true};
  }
  return {0.0, value, false};
}

/// No decrease beyond rounding over the last kWindow accepted steps: the
/// gradient has reached the floor set by the Hessian times one ulp of z.
bool stalled(const std::vector<double>& history) {
  constexpr std::size_t kWindow = 10;
  if (history.size() <= kWindow) return false;
  const double now = history.back();
  const double before = history[history.size() - 1 - kWindow];
  return before - now <= 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(now));
}

bool stationary(const Vector& g, double value, double tol) {
  return g.size() == 0 || g.lpNorm<Eigen::Infinity>() <= tol * (1.0 + std::abs(value));
}

void newton(const DiscreteAction& f, Vector& z, const MppOptions& opts, MppSolution& out) {
  Vector g;
  double value = f.gradient(z, g);
  if (std::isnan(value)) throw EvalError(iterate_summary(z, 0));
  out.objective_history.push_back(value);
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (stationary(g, value, opts.gradient_tolerance)) {
      out.converged = true;
      break;
    }
    if (stalled(out.objective_history)) {
      out.message = "objective stalled at rounding level";
      break;
    }
    const Eigen::SparseMatrix<double> hess = f.hessian(z);
    double diag = 0.0;
    for (Eigen::Index i = 0; i < hess.rows(); ++i) diag += std::abs(hess.coeff(i, i));
    diag /= static_cast<double>(std::max<Eigen::Index>(1, hess.rows()));
    Vector step;
    double shift = 0.0;
    Eigen::SparseMatrix<double> eye(hess.rows(), hess.cols());
    eye.setIdentity();
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
      llt.compute(shift > 0.0 ? Eigen::SparseMatrix<double>(hess + shift * eye) : hess);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        if (step.allFinite() && g.dot(step) < 0.0) break;
      }
      step.resize(0);
      shift = shift == 0.0 ? 1e-8 * std::max(diag, 1.0) : 10.0 * shift;
    }
    if (step.size() == 0) step = -g;
    LineSearch ls = armijo(f, z, value, g, step);
    if (!ls.ok) {
      out.message = "line search failed";
      break;
    }
    z += ls.alpha * step;
    value = f.gradient(z, g);
    if (std::isnan(value)) throw EvalError(iterate_summary(z, it + 1));
    out.objective_history.push_back(value);
  }
  if (!out.converged && stationary(g, value, opts.gradient_tolerance)) out.converged = true;
  out.iterations = it;
  out.objective = value;
  out.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
}

void lbfgs(const DiscreteAction& f, Vector& z, const MppOptions& opts, MppSolution& out) {
  Vector g;
  double value = f.gradient(z, g);
  if (std::isnan(value)) throw EvalError(iterate_summary(z, 0));
  out.objective_history.push_back(value);
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (stationary(g, value, opts.gradient_tolerance)) {
      out.converged = true;
      break;
    }
    if (stalled(out.objective_history)) {
      out.message = "objective stalled at rounding level";
      break;
    }
    // Two-loop recursion.
    Vector q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector step = -q;
    if (!(g.dot(step) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      step = -g / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    }
    LineSearch ls = armijo(f, z, value, g, step);
    if (!ls.ok) {
      if (s_hist.empty()) {
        out.message = "line search failed";
        break;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    Vector s = ls.alpha * step;
    z += s;
    Vector g_new;
    value = f.gradient(z, g_new);
    if (std::isnan(value)) throw EvalError(iterate_summary(z, it + 1));
    out.objective_history.push_back(value);
    Vector y = g_new - g;
    g = std::move(g_new);
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  if (!out.converged && stationary(g, value, opts.gradient_tolerance)) out.converged = true;
  out.iterations = it;
  out.objective = value;
  out.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace

Eigen::SparseMatrix<double> DiscreteAction::hessian(const Vector&) const {
  throw UnsupportedError("assembled Hessian is only available for the second-order form");
}

std::unique_ptr<DiscreteAction> DiscreteAction::make(const DegenerateSystem& system,
                                                     const BoundaryConditions& bc,
                                                     const Grid& grid) {
  system.validate();
  if (bc.kind == BoundaryConditions::Kind::hamiltonian) {
    return std::make_unique<HamiltonianAction>(system, bc, grid);
  }
  return std::make_unique<GeneralAction>(system, bc, grid);
}

MppSolution minimize_action(const DegenerateSystem& system, const BoundaryConditions& bc,
                            const Grid& grid, const Matrix& init, const MppOptions& opts) {
  const auto f = DiscreteAction::make(system, bc, grid);
  Vector z = f->pack(init);
  MppSolution out;
  const bool use_newton = bc.kind == BoundaryConditions::Kind::hamiltonian &&
                          opts.method == MppOptions::Method::newton;
  if (use_newton) {
    newton(*f, z, opts, out);
  } else {
    lbfgs(*f, z, opts, out);
  }
  if (out.converged) {
    out.message = "converged";
  } else if (out.message.empty()) {
    out.message = "iteration limit reached";
  }
  out.path = f->path(z);
  out.action = f->action(z);
  out.unknowns = std::move(z);
  return out;
}

std::vector<MppSolution> minimize_action_multistart(const DegenerateSystem& system,
                                                    const BoundaryConditions& bc,
                                                    const Grid& grid,
                                                    const std::vector<Matrix>& inits,
                                                    const MppOptions& opts) {
  std::vector<MppSolution> out(inits.size());
  FirstError error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < inits.size(); ++i) {
    try {
      out[i] = minimize_action(system, bc, grid, inits[i], opts);
    } catch (const std::exception& e) {
      error.record(i, e);
    }
  }
  error.rethrow("start");
  std::stable_sort(out.begin(), out.end(), [](const MppSolution& a, const MppSolution& b) {
    return a.objective < b.objective;
  });
  return out;
}

Matrix linear_initial_guess(const DegenerateSystem& system, const BoundaryConditions& bc,
                            const Grid& grid) {
  const int cols = bc.kind == BoundaryConditions::Kind::hamiltonian ? system.d : system.m;
  Matrix out(static_cast<Eigen::Index>(grid.nodes()), cols);
  for (std::size_t n = 0; n < grid.nodes(); ++n) {
    const double s = grid.time(n) / grid.horizon;
    for (int c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(n), c) = (1.0 - s) * bc.left(c) + s * bc.right(c);
    }
  }
  return out;
}

Matrix tanh_initial_guess(const DegenerateSystem& system, const BoundaryConditions& bc,
                          const Grid& grid, double width) {
  if (!(width > 0.0)) throw InputError("tanh width must be positive");
  const int cols = bc.kind == BoundaryConditions::Kind::hamiltonian ? system.d : system.m;
  Matrix out(static_cast<Eigen::Index>(grid.nodes()), cols);
  const double mid = 0.5 * grid.horizon;
  const double lo = std::tanh(-mid / width);
  const double hi = std::tanh(mid / width);
  for (std::size_t n = 0; n < grid.nodes(); ++n) {
    const double s = (std::tanh((grid.time(n) - mid) / width) - lo) / (hi - lo);
    for (int c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(n), c) = (1.0 - s) * bc.left(c) + s * bc.right(c);
    }
  }
  return out;
}

std::vector<LandscapeRow> action_landscape(const DegenerateSystem& system,
                                           const BoundaryConditions& bc, const Grid& grid,
                                           const std::vector<Matrix>& samples) {
  const auto f = DiscreteAction::make(system, bc, grid);
  std::vector<LandscapeRow> rows(samples.size());
  FirstError error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      rows[i] = {i, f->action(f->pack(samples[i]))};
    } catch (const std::exception& e) {
      error.record(i, e);
    }
  }
  error.rethrow("sample");
  std::stable_sort(rows.begin(), rows.end(), [](const LandscapeRow& a, const LandscapeRow& b) {
    return a.action.total > b.action.total;
  });
  return rows;
}

ElResidual el_residual_example(const Grid& grid, const Matrix& position) {
  const auto k = static_cast<Eigen::Index>(grid.steps);
  if (k < 9) throw InputError("fourth differences need K >= 9");
  if (position.rows() != k + 1 || position.cols() != 1) {
    throw InputError("residual needs a scalar path sampled on the grid");
  }
  const double h = grid.dt();
  ElResidual out;
  for (Eigen::Index n = 2; n <= k - 2; ++n) {
    const double fm2 = position(n - 2, 0), fm1 = position(n - 1, 0), f0 = position(n, 0);
    const double fp1 = position(n + 1, 0), fp2 = position(n + 2, 0);
    const double v = (fp1 - fm1) / (2.0 * h);
    const double a = (fp1 - 2.0 * f0 + fm1) / (h * h);
    const double d4 = (fp2 - 4.0 * fp1 + 6.0 * f0 - 4.0 * fm1 + fm2) / (h * h * h * h);
    const double well = f0 * f0 - 1.0;
    // Dirac reductions: integrals against the law of phi' give phi', against
    // the law of phi give phi.
    const double m_vel = v;
    const double m_pos = f0;
    const double verbatim = d4 + a * 2.0 * f0 * m_vel - 2.0 * f0 * v -
                            (2.0 * v * v + a) * m_vel - 2.0 * f0 * m_pos * well * m_vel;
    const double derived = d4 - 6.0 * f0 * v * a - 2.0 * v * v * v - a * well * well -
                           2.0 * f0 * v * v * well;
    out.times.push_back(grid.time(static_cast<std::size_t>(n)));
    out.verbatim.push_back(verbatim);
    out.derived.push_back(derived);
    out.l2_verbatim += verbatim * verbatim;
    out.l2_derived += derived * derived;
  }
  out.l2_verbatim = std::sqrt(h * out.l2_verbatim);
  out.l2_derived = std::sqrt(h * out.l2_derived);
  return out;
}

}  // namespace omtk
