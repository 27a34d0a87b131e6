#include "omtk/system.hpp"

#include <array>
#include <sstream>

#include "omtk/dsl.hpp"
#include "omtk/error.hpp"

namespace omtk {

DegenerateSystem DegenerateSystem::parse(int d, int m, const std::vector<std::string>& p,
                                         const std::vector<std::string>& q,
                                         int moment_order, std::vector<double> x0) {
  if (d < 0 || m < 1) throw SchemaError("dims", "need d >= 0 and m >= 1");
  DegenerateSystem s;
  s.d = d;
  s.m = m;
  s.moment_order = moment_order;
  for (const auto& src : p) s.p.push_back(Field::parse(src, s.dims()));
  for (const auto& src : q) s.q.push_back(Field::parse(src, s.dims()));
  s.x0 = Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  s.validate();
  return s;
}

void DegenerateSystem::validate() const {
  if (d < 0 || m < 1) throw SchemaError("dims", "need d >= 0 and m >= 1");
  if (static_cast<int>(p.size()) != d) {
    throw SchemaError("p", "expected " + std::to_string(d) + " components");
  }
  if (static_cast<int>(q.size()) != m) {
    throw SchemaError("q", "expected " + std::to_string(m) + " components");
  }
  if (moment_order < 1 || moment_order > kMaxMomentOrder) {
    throw SchemaError("moments", "order must lie in 1.." + std::to_string(kMaxMomentOrder));
  }
  if (x0.size() != state_dim()) {
    throw SchemaError("x0", "expected " + std::to_string(state_dim()) + " entries");
  }
  if (!x0.allFinite()) throw SchemaError("x0", "entries must be finite");
  for (int i = 0; i < d; ++i) {
    const auto& u = p[i].usage();
    const std::string key = "p[" + std::to_string(i + 1) + "]";
    if (u.max_moment > 0) throw SchemaError(key, "p may not reference moments");
    if (u.max_state > state_dim()) throw SchemaError(key, "state index out of range");
  }
  for (int j = 0; j < m; ++j) {
    const auto& u = q[j].usage();
    const std::string key = "q[" + std::to_string(j + 1) + "]";
    if (u.max_moment > moment_order) {
      throw SchemaError(key, "references M" + std::to_string(u.max_moment) +
                                 " but moments = " + std::to_string(moment_order));
    }
    if (u.max_state > state_dim()) throw SchemaError(key, "state index out of range");
  }
}

bool DegenerateSystem::uses_moments() const {
  for (const auto& f : q) {
    if (f.uses_moments()) return true;
  }
  return false;
}

bool DegenerateSystem::is_hamiltonian() const {
  if (d != m) return false;
  for (int i = 0; i < d; ++i) {
    const dsl::Expr* e = p[i].expr();
    if (e == nullptr) return false;
    if (!(*e == dsl::Expr::state(d + i + 1))) return false;
  }
  return true;
}

bool DegenerateSystem::first_block_autonomous() const {
  for (const auto& f : p) {
    for (int idx : f.usage().states) {
      if (idx > d) return false;
    }
  }
  return true;
}

bool DegenerateSystem::symbolic() const {
  for (const auto& f : p) {
    if (!f.is_symbolic()) return false;
  }
  for (const auto& f : q) {
    if (!f.is_symbolic()) return false;
  }
  return true;
}

void DegenerateSystem::drift_p(double t, std::span<const double> x,
                               std::span<double> out) const {
  for (int i = 0; i < d; ++i) out[i] = p[i](t, x);
}

void DegenerateSystem::drift_q(double t, std::span<const double> x,
                               std::span<const double> moments,
                               std::span<double> out) const {
  for (int j = 0; j < m; ++j) {
    std::span<const double> mj;
    if (!moments.empty()) {
      mj = moments.subspan(static_cast<std::size_t>(j) * moment_order, moment_order);
    }
    out[j] = q[j](t, x, mj);
  }
}

void DegenerateSystem::drift(double t, std::span<const double> x,
                             std::span<const double> moments, std::span<double> out) const {
  drift_p(t, x, out.first(d));
  drift_q(t, x, moments, out.subspan(d, m));
}

std::string DegenerateSystem::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "d=" << d << ";m=" << m << ";k=" << moment_order;
  for (const auto& f : p) os << ";p=" << f.label();
  for (const auto& f : q) os << ";q=" << f.label();
  os << ";x0=";
  for (Eigen::Index i = 0; i < x0.size(); ++i) os << (i ? "," : "") << x0(i);
  return os.str();
}

DiracField::DiracField(Field g, int coordinate, int state_dim, int order)
    : g_(std::move(g)), coordinate_(coordinate), order_(order) {
  for (int i = 1; i <= state_dim; ++i) dx_.push_back(g_.partial(dsl::Variable::x(i)));
  for (int k = 1; k <= order; ++k) dm_.push_back(g_.partial(dsl::Variable::m(k)));
}

void DiracField::fill_moments(std::span<const double> x, double* m) const {
  const double y = x[coordinate_];
  double power = 1.0;
  for (int k = 0; k < order_; ++k) {
    power *= y;
    m[k] = power;
  }
}

double DiracField::value(double t, std::span<const double> x) const {
  std::array<double, kMaxMomentOrder> m{};
  fill_moments(x, m.data());
  return g_(t, x, std::span<const double>(m.data(), order_));
}

double DiracField::gradient(double t, std::span<const double> x,
                            std::span<double> out) const {
  std::array<double, kMaxMomentOrder> m{};
  fill_moments(x, m.data());
  const std::span<const double> ms(m.data(), order_);
  for (std::size_t i = 0; i < dx_.size(); ++i) out[i] = dx_[i](t, x, ms);
  const double y = x[coordinate_];
  double chain = 0.0;
  double power = 1.0;  // y^(k-1)
  for (int k = 1; k <= order_; ++k) {
    chain += dm_[k - 1](t, x, ms) * k * power;
    power *= y;
  }
  out[coordinate_] += chain;
  return g_(t, x, ms);
}

StateField::StateField(Field g, int state_dim) : g_(std::move(g)) {
  for (int i = 1; i <= state_dim; ++i) dx_.push_back(g_.partial(dsl::Variable::x(i)));
}

void StateField::gradient(double t, std::span<const double> x,
                          std::span<double> out) const {
  for (std::size_t i = 0; i < dx_.size(); ++i) out[i] = dx_[i](t, x);
}

}  // namespace omtk
