#include "omtk/norms.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "omtk/error.hpp"

namespace omtk {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw InputError("bad " + what + " '" + text + "'");
  return value;
}

}  // namespace

PathNorm PathNorm::lp(double p) {
  PathNorm n{Kind::lp, p, 0.25};
  n.validate();
  return n;
}

PathNorm PathNorm::holder(double alpha) {
  PathNorm n{Kind::holder, 2.0, alpha};
  n.validate();
  return n;
}

PathNorm PathNorm::parse(const std::string& text) {
  if (text == "sup") return sup();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon == std::string::npos) throw InputError("unknown norm '" + text + "'");
  const std::string arg = text.substr(colon + 1);
  if (head == "lp") return lp(parse_number(arg, "Lp exponent"));
  if (head == "holder") return holder(parse_number(arg, "Holder exponent"));
  throw InputError("unknown norm '" + text + "'");
}

void PathNorm::validate() const {
  if (kind == Kind::lp && !(p >= 2.0 && std::isfinite(p))) {
    throw InputError("Lp norm needs p >= 2");
  }
  if (kind == Kind::holder && !(alpha > 0.0 && alpha < 0.5)) {
    throw InputError("Holder exponent must lie in (0, 1/2)");
  }
}

std::string PathNorm::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::sup: os << "sup"; break;
    case Kind::lp: os << "lp:" << p; break;
    case Kind::holder: os << "holder:" << alpha; break;
  }
  return os.str();
}

double PathNorm::l2_constant(const Grid& grid) const {
  const double span = grid.horizon + grid.dt();
  if (kind == Kind::lp) return std::pow(span, 1.0 / p - 0.5);
  return 1.0 / std::sqrt(span);
}

double path_norm(const PathNorm& norm, const Matrix& f, double dt, Exec exec) {
  norm.validate();
  if (f.rows() == 0) throw InputError("norm of an empty path");
  double sup = 0.0;
  for (Eigen::Index n = 0; n < f.rows(); ++n) sup = std::max(sup, f.row(n).norm());
  switch (norm.kind) {
    case PathNorm::Kind::sup:
      return sup;
    case PathNorm::Kind::lp: {
      std::vector<double> powers(static_cast<std::size_t>(f.rows()));
      for (Eigen::Index n = 0; n < f.rows(); ++n) powers[n] = std::pow(f.row(n).norm(), norm.p);
      return std::pow(dt * kernels::pairwise_sum(powers), 1.0 / norm.p);
    }
    case PathNorm::Kind::holder:
      if (f.rows() < 2) throw InputError("Holder norm needs at least two nodes");
      return sup + kernels::holder_seminorm(f, dt, norm.alpha, exec);
  }
  return sup;
}

double discrete_l2(const Matrix& f, double dt) {
  std::vector<double> squares(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index n = 0; n < f.rows(); ++n) squares[n] = f.row(n).squaredNorm();
  return std::sqrt(dt * kernels::pairwise_sum(squares));
}

}  // namespace omtk
