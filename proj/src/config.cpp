#include "omtk/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "omtk/dsl.hpp"

namespace omtk {

namespace {

struct Preset {
  int d;
  int m;
  std::vector<std::string> p;
  std::vector<std::string> q;
  int moments;
  std::vector<double> x0;
  double horizon;
};

const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> table = {
      {"ou", {1, 1, {"0"}, {"-x2"}, 1, {0.0, 0.0}, 1.0}},
      {"ou-degenerate", {1, 1, {"x2"}, {"-x2"}, 1, {0.0, 0.0}, 1.0}},
      {"paper-ex-4", {1, 1, {"x2"}, {"M1*(x1^2-1)"}, 1, {1.0, -1.0}, 5.0}},
      {"mean-field-coupled",
       {1, 2, {"x2 - 0.5*x3"}, {"-x2 + M1 + 0.3*sin(x1)", "-x3^3 + 0.5*x2 - M2"}, 2,
        {0.2, -0.1, 0.3}, 1.0}},
      {"reduction-p0", {1, 1, {"0"}, {"-x2 + M1 + 0.5*x1"}, 1, {0.5, 0.0}, 1.0}},
      {"reduction-px1", {1, 1, {"x1"}, {"sin(x1) - x2 + M1^2"}, 1, {0.5, 0.0}, 1.0}},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw SchemaError(key, "expected a number, found '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw SchemaError(key, "expected an integer, found '" + text + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) out.push_back(to_double(key, item));
  return out;
}

/// "p[3]" -> ("p", 3); plain keys give index 0.
std::pair<std::string, int> split_key(const std::string& key) {
  const auto open = key.find('[');
  if (open == std::string::npos) return {key, 0};
  if (key.back() != ']') throw SchemaError(key, "malformed component key");
  const std::string base = key.substr(0, open);
  const int index = to_int(key, key.substr(open + 1, key.size() - open - 2));
  if (index < 1) throw SchemaError(key, "component index must be >= 1");
  return {base, index};
}

}  // namespace

nlohmann::json ProblemConfig::canonical() const {
  nlohmann::json out;
  out["dims"] = {d, m};
  std::vector<std::string> ps, qs;
  for (const Field& f : system.p) ps.push_back(dsl::to_string(*f.expr()));
  for (const Field& f : system.q) qs.push_back(dsl::to_string(*f.expr()));
  out["p"] = ps;
  out["q"] = qs;
  out["moments"] = moments;
  out["x0"] = x0;
  out["T"] = horizon;
  return out;
}

std::string ProblemConfig::hash() const { return fnv1a64_hex(canonical().dump()); }

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : presets()) out.push_back(name);
  return out;
}

ProblemConfig preset_config(const std::string& name) {
  return parse_config("preset = " + name + "\n");
}

ProblemConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw SchemaError("line " + std::to_string(line_no), "expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw SchemaError("line " + std::to_string(line_no), "empty key");
    if (!entries.emplace(key, value).second) throw SchemaError(key, "duplicate key");
  }

  ProblemConfig cfg;
  std::optional<Preset> base;
  if (auto it = entries.find("preset"); it != entries.end()) {
    const auto found = presets().find(it->second);
    if (found == presets().end()) throw SchemaError("preset", "unknown preset '" + it->second + "'");
    cfg.preset = it->second;
    base = found->second;
  }
  if (base) {
    cfg.d = base->d;
    cfg.m = base->m;
    cfg.p = base->p;
    cfg.q = base->q;
    cfg.moments = base->moments;
    cfg.x0 = base->x0;
    cfg.horizon = base->horizon;
  }

  std::map<int, std::string> p_items, q_items;
  bool have_dims = false;
  for (const auto& [key, value] : entries) {
    const auto [name, index] = split_key(key);
    if (name == "preset" && index == 0) continue;
    if (name == "dims" && index == 0) {
      const auto dims = split(value, ',');
      if (dims.size() != 2) throw SchemaError("dims", "expected 'd, m'");
      cfg.d = to_int("dims", dims[0]);
      cfg.m = to_int("dims", dims[1]);
      if (cfg.d < 0 || cfg.m < 1) throw SchemaError("dims", "need d >= 0 and m >= 1");
      have_dims = true;
    } else if ((name == "p" || name == "q") && index == 0) {
      (name == "p" ? cfg.p : cfg.q) = value.empty() ? std::vector<std::string>{} : split(value, ';');
    } else if (name == "p" || name == "q") {
      (name == "p" ? p_items : q_items)[index] = value;
    } else if (name == "moments" && index == 0) {
      cfg.moments = to_int("moments", value);
    } else if (name == "x0" && index == 0) {
      cfg.x0 = to_doubles("x0", value);
    } else if (name == "T" && index == 0) {
      cfg.horizon = to_double("T", value);
      if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
        throw SchemaError("T", "horizon must be positive and finite");
      }
    } else {
      throw SchemaError(key, "unknown key");
    }
  }
  if (!base && !have_dims) throw SchemaError("dims", "required without a preset");
  for (auto& [items, list, dim, name] :
       {std::tuple{&p_items, &cfg.p, cfg.d, "p"}, std::tuple{&q_items, &cfg.q, cfg.m, "q"}}) {
    for (const auto& [index, value] : *items) {
      const std::string key = std::string(name) + "[" + std::to_string(index) + "]";
      if (index > dim) throw SchemaError(key, "component index above " + std::to_string(dim));
      if (static_cast<int>(list->size()) < dim) list->resize(static_cast<std::size_t>(dim));
      (*list)[static_cast<std::size_t>(index - 1)] = value;
    }
  }
  if (static_cast<int>(cfg.p.size()) != cfg.d) {
    throw SchemaError("p", "expected " + std::to_string(cfg.d) + " components");
  }
  if (static_cast<int>(cfg.q.size()) != cfg.m) {
    throw SchemaError("q", "expected " + std::to_string(cfg.m) + " components");
  }
  if (static_cast<int>(cfg.x0.size()) != cfg.d + cfg.m) {
    throw SchemaError("x0", "expected " + std::to_string(cfg.d + cfg.m) + " entries");
  }

  DegenerateSystem sys;
  sys.d = cfg.d;
  sys.m = cfg.m;
  sys.moment_order = cfg.moments;
  for (int i = 0; i < cfg.d; ++i) {
    const std::string key = "p[" + std::to_string(i + 1) + "]";
    if (cfg.p[i].empty()) throw SchemaError(key, "missing expression");
    try {
      sys.p.push_back(Field::parse(cfg.p[i], sys.dims()));
    } catch (const ParseError& e) {
      throw ConfigParseError(key, e);
    }
  }
  for (int j = 0; j < cfg.m; ++j) {
    const std::string key = "q[" + std::to_string(j + 1) + "]";
    if (cfg.q[j].empty()) throw SchemaError(key, "missing expression");
    try {
      sys.q.push_back(Field::parse(cfg.q[j], sys.dims()));
    } catch (const ParseError& e) {
      throw ConfigParseError(key, e);
    }
  }
  sys.x0 = Eigen::Map<const Vector>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size()));
  sys.validate();
  cfg.system = std::move(sys);
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open config '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace omtk
