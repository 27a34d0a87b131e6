#include "omtk/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "omtk/error.hpp"

namespace omtk::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) {
    while (!item.empty() && (item.back() == '\r' || item.back() == ' ')) item.pop_back();
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    out.push_back(item);
  }
  return out;
}

std::vector<std::string> path_header(int d, int m, bool derivatives) {
  std::vector<std::string> cols{"t"};
  for (const char* prefix : {"", "d"}) {
    if (*prefix && !derivatives) break;
    for (int i = 1; i <= d; ++i) cols.push_back(std::string(prefix) + "phi1_" + std::to_string(i));
    for (int j = 1; j <= m; ++j) cols.push_back(std::string(prefix) + "phi2_" + std::to_string(j));
  }
  return cols;
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ReferencePath read_path_csv(const std::filesystem::path& file, int d, int m) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCategory::io, "cannot open path file '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("path file '" + file.string() + "' is empty");
  const auto header = split_csv(line);
  const auto plain = path_header(d, m, false);
  const auto full = path_header(d, m, true);
  bool derivatives;
  if (header == full) {
    derivatives = true;
  } else if (header == plain) {
    derivatives = false;
  } else {
    std::string want;
    for (const auto& c : plain) want += (want.empty() ? "" : ",") + c;
    throw InputError("path header must be '" + want + "' (optionally with d-columns)");
  }
  const std::size_t cols = header.size();
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != cols) {
      throw InputError("path file line " + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " columns");
    }
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const char* end = cells[c].data() + cells[c].size();
      const auto [ptr, ec] = std::from_chars(cells[c].data(), end, row[c]);
      if (ec != std::errc() || ptr != end) {
        throw InputError("path file line " + std::to_string(line_no) + ": bad number '" +
                         cells[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw InputError("path file needs at least 3 nodes");
  const std::size_t steps = rows.size() - 1;
  const double horizon = rows.back()[0];
  const Grid grid = Grid::with_steps(horizon, steps);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (std::abs(rows[n][0] - grid.time(n)) > 1e-9 * std::max(1.0, horizon)) {
      throw InputError("path times must be uniform from 0 (line " + std::to_string(n + 2) + ")");
    }
  }
  const int dim = d + m;
  Matrix phi(static_cast<Eigen::Index>(rows.size()), dim);
  Matrix dphi(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (int c = 0; c < dim; ++c) {
      phi(static_cast<Eigen::Index>(n), c) = rows[n][1 + c];
      if (derivatives) dphi(static_cast<Eigen::Index>(n), c) = rows[n][1 + dim + c];
    }
  }
  if (derivatives) return ReferencePath::from_samples(grid, d, m, std::move(phi), std::move(dphi));
  return ReferencePath::from_samples(grid, d, m, std::move(phi));
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write '" + file.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCategory::io, "write failed for '" + file.string() + "'");
}

void write_json(const std::filesystem::path& file, const nlohmann::json& value) {
  write_text(file, value.dump(2) + "\n");
}

void write_path_csv(const std::filesystem::path& file, const ReferencePath& path,
                    bool derivatives) {
  std::ostringstream out;
  const auto header = path_header(path.d, path.m, derivatives);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index n = 0; n < path.nodes(); ++n) {
    out << number(path.grid.time(static_cast<std::size_t>(n)));
    for (Eigen::Index c = 0; c < path.phi.cols(); ++c) out << ',' << number(path.phi(n, c));
    if (derivatives) {
      for (Eigen::Index c = 0; c < path.dphi.cols(); ++c) out << ',' << number(path.dphi(n, c));
    }
    out << '\n';
  }
  write_text(file, out.str());
}

nlohmann::json to_json(const ActionValue& a) {
  return {{"kinetic", finite_or_null(a.kinetic)},
          {"divergence", finite_or_null(a.divergence)},
          {"total", finite_or_null(a.total)},
          {"quad_error", finite_or_null(a.quad_error)},
          {"warnings", a.warnings}};
}

nlohmann::json to_json(const TubeEstimate& e) {
  return {{"epsilon", e.epsilon}, {"norm", e.norm.name()}, {"hits", e.hits},
          {"trials", e.trials},   {"p_hat", e.p_hat},      {"ci_lo", e.ci_lo},
          {"ci_hi", e.ci_hi},     {"low_information", e.low_information}};
}

nlohmann::json to_json(const RatioReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const RatioRow& row : r.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"hits_phi", row.hits_phi},
                    {"hits_psi", row.hits_psi},
                    {"hits_both", row.hits_both},
                    {"hits_w", row.hits_w},
                    {"ratio", finite_or_null(row.ratio)},
                    {"log_ratio", finite_or_null(row.log_ratio)},
                    {"log_se", finite_or_null(row.log_se)},
                    {"ci_lo", finite_or_null(row.ci_lo)},
                    {"ci_hi", finite_or_null(row.ci_hi)},
                    {"log_error", finite_or_null(row.log_error)},
                    {"agrees", row.agrees},
                    {"low_information", row.low_information},
                    {"ratio_phi_w", finite_or_null(row.ratio_phi_w)},
                    {"ratio_psi_w", finite_or_null(row.ratio_psi_w)}});
  }
  return {{"norm", r.norm.name()},
          {"samples", r.samples},
          {"action_phi", to_json(r.action_phi)},
          {"action_psi", to_json(r.action_psi)},
          {"delta_action", finite_or_null(r.delta_action)},
          {"prediction", finite_or_null(r.prediction)},
          {"prediction_phi_w", finite_or_null(r.prediction_phi_w)},
          {"prediction_psi_w", finite_or_null(r.prediction_psi_w)},
          {"rows", rows},
          {"notices", r.notices},
          {"all_agree", r.all_agree},
          {"trend_ok", r.trend_ok}};
}

std::string tube_csv(const std::vector<TubeEstimate>& rows) {
  std::ostringstream out;
  out << "eps,p_hat,ci_lo,ci_hi,hits,trials,low_information\n";
  for (const TubeEstimate& e : rows) {
    out << number(e.epsilon) << ',' << number(e.p_hat) << ',' << number(e.ci_lo) << ','
        << number(e.ci_hi) << ',' << e.hits << ',' << e.trials << ','
        << (e.low_information ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace omtk::io
