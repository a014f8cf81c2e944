#include "bermudan/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "bermudan/error.hpp"

namespace bermudan {

namespace {

using nlohmann::json;

// Error reporting keyed by JSON path; the line is located by walking the
// quoted path components through the source text.
class Context {
 public:
  Context(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ':' << line_of(path) << ": " << path << ": " << msg;
    throw Error(ErrorCode::config, os.str());
  }

  [[noreturn]] void fail_at_offset(std::size_t offset, const std::string& msg) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source_ << ':' << line << ':' << col << ": " << msg;
    throw Error(ErrorCode::config, os.str());
  }

  [[nodiscard]] const std::string& source() const noexcept { return source_; }

 private:
  [[nodiscard]] std::size_t line_of(const std::string& path) const {
    std::size_t pos = 0;
    std::size_t start = 0;
    while (start <= path.size()) {
      std::size_t dot = path.find('.', start);
      if (dot == std::string::npos) dot = path.size();
      std::string key = path.substr(start, dot - start);
      if (auto bracket = key.find('['); bracket != std::string::npos) key.resize(bracket);
      if (!key.empty()) {
        const auto found = text_.find('"' + key + '"', pos);
        if (found == std::string_view::npos) break;
        pos = found;
      }
      start = dot + 1;
    }
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos && i < text_.size(); ++i) line += text_[i] == '\n';
    return line;
  }

  std::string_view text_;
  std::string source_;
};

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const Context& ctx, const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) ctx.fail(join(path, key), "unknown key");
  }
}

const json& object_at(const Context& ctx, const json& parent, const std::string& path,
                      const char* key) {
  const auto it = parent.find(key);
  if (it == parent.end()) ctx.fail(join(path, key), "missing required object");
  if (!it->is_object()) ctx.fail(join(path, key), "must be an object");
  return *it;
}

double number(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_number()) ctx.fail(path, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) ctx.fail(path, "must be finite");
  return d;
}

double number_at(const Context& ctx, const json& parent, const std::string& path, const char* key) {
  const auto it = parent.find(key);
  if (it == parent.end()) ctx.fail(join(path, key), "missing required number");
  return number(ctx, *it, join(path, key));
}

std::optional<double> optional_number(const Context& ctx, const json& parent,
                                      const std::string& path, const char* key) {
  const auto it = parent.find(key);
  if (it == parent.end()) return std::nullopt;
  return number(ctx, *it, join(path, key));
}

std::size_t count(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) ctx.fail(path, "must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> vector_of(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_array()) ctx.fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(ctx, v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> vector_at(const Context& ctx, const json& parent, const std::string& path,
                              const char* key) {
  const auto it = parent.find(key);
  if (it == parent.end()) ctx.fail(join(path, key), "missing required array");
  return vector_of(ctx, *it, join(path, key));
}

// Flattens an array of equal-length arrays into row-major storage.
std::vector<double> matrix_of(const Context& ctx, const json& v, const std::string& path,
                              std::size_t cols, std::size_t* rows = nullptr) {
  if (!v.is_array()) ctx.fail(path, "must be an array of arrays");
  std::vector<double> flat;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const auto row = vector_of(ctx, v[r], row_path);
    if (row.size() != cols) {
      ctx.fail(row_path, "has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  if (rows) *rows = v.size();
  return flat;
}

// Runs a library constructor and rewrites its failure as a config error.
template <class Fn>
auto guarded(const Context& ctx, const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    ctx.fail(path, e.what());
  }
}

void require_dim(const Context& ctx, const std::string& field, std::size_t got,
                 const std::string& reference, std::size_t d) {
  if (got != d) {
    ctx.fail(field, "has dimension " + std::to_string(got) + " but " + reference + " has dimension " +
                        std::to_string(d));
  }
}

CubatureRule explicit_rule(const Context& ctx, const json& obj, const std::string& path) {
  const auto dim_it = obj.find("dim");
  if (dim_it == obj.end()) ctx.fail(join(path, "dim"), "missing required integer");
  const std::size_t dim = count(ctx, *dim_it, join(path, "dim"));
  if (dim == 0) ctx.fail(join(path, "dim"), "must be positive");
  auto weights = vector_at(ctx, obj, path, "weights");
  const auto pts_it = obj.find("points");
  if (pts_it == obj.end()) ctx.fail(join(path, "points"), "missing required array");
  std::size_t rows = 0;
  auto points = matrix_of(ctx, *pts_it, join(path, "points"), dim, &rows);
  if (rows != weights.size()) {
    ctx.fail(join(path, "points"), "has " + std::to_string(rows) + " points but " + join(path, "weights") +
                                       " has " + std::to_string(weights.size()) + " entries");
  }
  return guarded(ctx, path, [&] { return CubatureRule(dim, std::move(weights), std::move(points)); });
}

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string source) {
  const Context ctx(text, std::move(source));
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    ctx.fail_at_offset(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) ctx.fail_at_offset(0, "top level must be a JSON object");
  reject_unknown(ctx, root, "", {"payoff", "rule", "pricing", "grid", "x0", "oracle", "output"});

  // payoff
  const json& payoff = object_at(ctx, root, "", "payoff");
  reject_unknown(ctx, payoff, "payoff", {"strike", "basket_weights"});
  const double strike = number_at(ctx, payoff, "payoff", "strike");
  auto beta = vector_at(ctx, payoff, "payoff", "basket_weights");
  const std::size_t d = beta.size();
  BasketPut put = guarded(ctx, "payoff", [&] { return BasketPut(strike, std::move(beta)); });

  // pricing
  const json& pj = object_at(ctx, root, "", "pricing");
  reject_unknown(ctx, pj, "pricing",
                 {"r", "t", "eps", "max_iters", "tol_eq", "pad_factor", "extension", "interpolation"});
  const double r = number_at(ctx, pj, "pricing", "r");
  const double t = number_at(ctx, pj, "pricing", "t");
  PricingConfig pricing = guarded(ctx, "pricing", [&] { return PricingConfig(r, t); });
  if (auto v = optional_number(ctx, pj, "pricing", "eps")) {
    if (!(*v > 0.0)) ctx.fail("pricing.eps", "must be positive");
    pricing.eps = *v;
  }
  if (auto it = pj.find("max_iters"); it != pj.end()) {
    pricing.max_iters = count(ctx, *it, "pricing.max_iters");
    if (pricing.max_iters == 0) ctx.fail("pricing.max_iters", "must be positive");
  }
  pricing.tol_eq = 1e-9 * put.strike();
  if (auto v = optional_number(ctx, pj, "pricing", "tol_eq")) {
    if (!(*v >= 0.0)) ctx.fail("pricing.tol_eq", "must be nonnegative");
    pricing.tol_eq = *v;
  }
  if (auto v = optional_number(ctx, pj, "pricing", "pad_factor")) {
    if (!(*v >= 0.0)) ctx.fail("pricing.pad_factor", "must be nonnegative");
    pricing.pad_factor = *v;
  }
  if (auto it = pj.find("extension"); it != pj.end()) {
    const std::string policy = it->is_string() ? it->get<std::string>() : "";
    if (policy == "payoff_plus") {
      pricing.extension = ExtensionPolicy::payoff_plus;
    } else if (policy == "zero") {
      pricing.extension = ExtensionPolicy::zero;
    } else {
      ctx.fail("pricing.extension", "must be \"payoff_plus\" or \"zero\"");
    }
  }
  if (auto it = pj.find("interpolation"); it != pj.end()) {
    const std::string mode = it->is_string() ? it->get<std::string>() : "";
    if (mode == "price") {
      pricing.interpolation = Interpolation::price_linear;
    } else if (mode == "log") {
      pricing.interpolation = Interpolation::log_linear;
    } else {
      ctx.fail("pricing.interpolation", "must be \"price\" or \"log\"");
    }
  }

  // rule
  const json& rj = object_at(ctx, root, "", "rule");
  std::variant<RuleSpec, CubatureRule> rule = RuleSpec{};
  std::string type = "explicit";
  if (auto it = rj.find("type"); it != rj.end()) {
    if (!it->is_string()) ctx.fail("rule.type", "must be a string");
    type = it->get<std::string>();
  }
  if (type == "gauss_hermite") {
    reject_unknown(ctx, rj, "rule", {"type", "points_per_axis", "sigma", "t", "correlation"});
    RuleSpec spec;
    const auto ppa = rj.find("points_per_axis");
    if (ppa == rj.end()) ctx.fail("rule.points_per_axis", "missing required integer");
    spec.points_per_axis = count(ctx, *ppa, "rule.points_per_axis");
    if (spec.points_per_axis == 0) ctx.fail("rule.points_per_axis", "must be >= 1");
    spec.sigma = vector_at(ctx, rj, "rule", "sigma");
    require_dim(ctx, "rule.sigma", spec.sigma.size(), "payoff.basket_weights", d);
    spec.t = pricing.interval();
    if (auto rt = optional_number(ctx, rj, "rule", "t")) {
      if (std::abs(*rt - pricing.interval()) > 1e-15 * std::max(1.0, std::abs(*rt))) {
        ctx.fail("rule.t", "differs from pricing.t; the rule must describe one exercise interval");
      }
    }
    if (auto it = rj.find("correlation"); it != rj.end()) {
      std::size_t rows = 0;
      auto corr = matrix_of(ctx, *it, "rule.correlation", d, &rows);
      require_dim(ctx, "rule.correlation", rows, "payoff.basket_weights", d);
      spec.correlation = std::move(corr);
    }
    guarded(ctx, "rule.correlation", [&] { return build_gauss_hermite(spec); });
    rule = std::move(spec);
  } else if (type == "explicit") {
    reject_unknown(ctx, rj, "rule", {"type", "dim", "weights", "points"});
    CubatureRule explicit_r = explicit_rule(ctx, rj, "rule");
    require_dim(ctx, "rule.dim", explicit_r.dim(), "payoff.basket_weights", d);
    rule = std::move(explicit_r);
  } else {
    ctx.fail("rule.type", "must be \"gauss_hermite\" or \"explicit\"");
  }

  // grid
  const json& gj = object_at(ctx, root, "", "grid");
  reject_unknown(ctx, gj, "grid", {"lo", "hi", "n"});
  auto lo = vector_at(ctx, gj, "grid", "lo");
  auto hi = vector_at(ctx, gj, "grid", "hi");
  const auto n_it = gj.find("n");
  if (n_it == gj.end() || !n_it->is_array()) ctx.fail("grid.n", "missing required array of integers");
  std::vector<std::size_t> n;
  for (std::size_t i = 0; i < n_it->size(); ++i) {
    n.push_back(count(ctx, (*n_it)[i], "grid.n[" + std::to_string(i) + "]"));
  }
  require_dim(ctx, "grid.lo", lo.size(), "payoff.basket_weights", d);
  require_dim(ctx, "grid.hi", hi.size(), "payoff.basket_weights", d);
  require_dim(ctx, "grid.n", n.size(), "payoff.basket_weights", d);
  LogPriceGrid grid = guarded(ctx, "grid", [&] { return LogPriceGrid(std::move(lo), std::move(hi), std::move(n)); });

  // x0
  const auto x0_it = root.find("x0");
  if (x0_it == root.end()) ctx.fail("x0", "missing required array");
  auto x0 = vector_of(ctx, *x0_it, "x0");
  require_dim(ctx, "x0", x0.size(), "payoff.basket_weights", d);
  if (!grid.contains(x0)) ctx.fail("x0", "lies outside the grid box [grid.lo, grid.hi]");

  double budget = 5e-3 * put.strike();
  if (auto it = root.find("oracle"); it != root.end()) {
    if (!it->is_object()) ctx.fail("oracle", "must be an object");
    reject_unknown(ctx, *it, "oracle", {"budget"});
    if (auto v = optional_number(ctx, *it, "oracle", "budget")) {
      if (!(*v >= 0.0)) ctx.fail("oracle.budget", "must be nonnegative");
      budget = *v;
    }
  }

  std::string out_dir = ".";
  if (auto it = root.find("output"); it != root.end()) {
    if (!it->is_object()) ctx.fail("output", "must be an object");
    reject_unknown(ctx, *it, "output", {"dir"});
    if (auto dir = it->find("dir"); dir != it->end()) {
      if (!dir->is_string()) ctx.fail("output.dir", "must be a string");
      out_dir = dir->get<std::string>();
    }
  }

  return RunConfig{
      .payoff = std::move(put),
      .rule = std::move(rule),
      .pricing = pricing,
      .grid = std::move(grid),
      .x0 = std::move(x0),
      .oracle_budget = budget,
      .out_dir = std::move(out_dir),
      .source = ctx.source(),
  };
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

CubatureRule base_rule(const RunConfig& config) {
  if (const auto* spec = std::get_if<RuleSpec>(&config.rule)) return build_gauss_hermite(*spec);
  return std::get<CubatureRule>(config.rule);
}

std::string rule_to_json(const CubatureRule& rule) {
  nlohmann::ordered_json j;
  j["dim"] = rule.dim();
  j["weights"] = std::vector<double>(rule.weights().begin(), rule.weights().end());
  auto points = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto p = rule.point(k);
    points.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(points);
  return j.dump();
}

CubatureRule rule_from_json(std::string_view text) {
  const Context ctx(text, "<rule>");
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    ctx.fail_at_offset(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) ctx.fail_at_offset(0, "rule must be a JSON object");
  reject_unknown(ctx, j, "", {"type", "dim", "weights", "points"});
  return explicit_rule(ctx, j, "");
}

}  // namespace bermudan
