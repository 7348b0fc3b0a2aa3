#include "resdelta/config_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resdelta/errors.hpp"

namespace resdelta {

namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config: not valid JSON");
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  return doc;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw ConfigError("config: " + where + " needs numeric \"" + key + "\"");
  return it->get<double>();
}

double optional_number(const json& obj, const std::string& key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError("config: \"" + key + "\" must be a number");
  return it->get<double>();
}

std::uint64_t require_seed(const json& obj) {
  auto it = obj.find("seed");
  if (it == obj.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0)
    throw ConfigError("config: mandatory \"seed\" (non-negative integer) missing");
  return it->get<std::uint64_t>();
}

std::vector<double> require_number_array(const json& obj, const std::string& key,
                                         const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array())
    throw ConfigError("config: " + where + " needs array \"" + key + "\"");
  std::vector<double> out;
  for (const json& e : *it) {
    if (!e.is_number()) throw ConfigError("config: \"" + key + "\" entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

VerifyJob parse_verify_config(const std::string& text) {
  json doc = parse_document(text);
  reject_unknown_keys(doc,
                      {"seed", "eta", "rel_tolerance", "min_separation", "mollified",
                       "mollified_samples", "configs"},
                      "document");
  VerifyJob job;
  job.seed = require_seed(doc);
  job.eta = optional_number(doc, "eta", job.eta);
  job.rel_tolerance = optional_number(doc, "rel_tolerance", job.rel_tolerance);
  job.min_separation = optional_number(doc, "min_separation", job.min_separation);
  if (auto it = doc.find("mollified"); it != doc.end()) {
    if (!it->is_boolean()) throw ConfigError("config: \"mollified\" must be a boolean");
    job.mollified = it->get<bool>();
  }
  job.mollified_samples =
      static_cast<long>(optional_number(doc, "mollified_samples", job.mollified_samples));
  if (job.mollified_samples < 1) throw ConfigError("config: mollified_samples must be >= 1");

  auto it = doc.find("configs");
  if (it == doc.end() || !it->is_array() || it->empty())
    throw ConfigError("config: verify needs a non-empty \"configs\" array");
  for (const json& c : *it) {
    if (!c.is_object()) throw ConfigError("config: each verify case must be an object");
    reject_unknown_keys(c, {"a", "b", "u", "v", "width"}, "verify case");
    VerifyCase vc;
    vc.a = require_number(c, "a", "verify case");
    vc.b = require_number(c, "b", "verify case");
    vc.u = require_number_array(c, "u", "verify case");
    vc.v = require_number_array(c, "v", "verify case");
    vc.width = require_number(c, "width", "verify case");
    if (vc.a == 0.0 || vc.b == 0.0)
      throw ConfigError("config: leading coefficients must be nonzero");
    if (vc.u.empty() || vc.v.empty())
      throw ConfigError("config: root lists must be non-empty");
    if (vc.width <= 0.0) throw ConfigError("config: width must be positive");
    job.cases.push_back(std::move(vc));
  }
  return job;
}

HornConfig parse_horn_config(const std::string& text) {
  json doc = parse_document(text);
  reject_unknown_keys(doc, {"seed", "alpha", "beta", "samples", "bins", "p_range", "q_range"},
                      "document");
  HornConfig cfg;
  cfg.seed = require_seed(doc);
  std::vector<double> a = require_number_array(doc, "alpha", "horn");
  std::vector<double> b = require_number_array(doc, "beta", "horn");
  if (a.size() != 3 || b.size() != 3)
    throw ConfigError("config: alpha and beta must have exactly 3 entries");
  std::copy(a.begin(), a.end(), cfg.alpha.begin());
  std::copy(b.begin(), b.end(), cfg.beta.begin());
  cfg.samples = static_cast<long>(optional_number(doc, "samples", cfg.samples));
  cfg.bins = static_cast<int>(optional_number(doc, "bins", cfg.bins));
  auto range = [&](const char* key, double& lo, double& hi) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    std::vector<double> r = require_number_array(doc, key, "horn");
    if (r.size() != 2 || !(r[0] < r[1]))
      throw ConfigError(std::string("config: \"") + key + "\" must be [lo, hi] with lo < hi");
    lo = r[0];
    hi = r[1];
  };
  range("p_range", cfg.p_lo, cfg.p_hi);
  range("q_range", cfg.q_lo, cfg.q_hi);
  validate(cfg);
  return cfg;
}

IntegrateJob parse_integrate_config(const std::string& text) {
  json doc = parse_document(text);
  reject_unknown_keys(doc, {"seed", "eta", "method", "samples", "factors", "test_function"},
                      "document");
  IntegrateJob job;
  job.seed = require_seed(doc);
  job.eta = optional_number(doc, "eta", job.eta);
  job.samples = static_cast<long>(optional_number(doc, "samples", job.samples));
  if (job.samples < 1) throw ConfigError("config: samples must be >= 1");
  if (auto it = doc.find("method"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("config: \"method\" must be a string");
    std::string m = it->get<std::string>();
    if (m == "quadrature")
      job.method = IntegrationMethod::AdaptiveQuadrature;
    else if (m == "mc")
      job.method = IntegrationMethod::MonteCarlo;
    else if (m == "closed-form")
      job.method = IntegrationMethod::ExactClosedForm;
    else
      throw ConfigError("config: method must be quadrature, mc, or closed-form");
  }

  auto fit = doc.find("factors");
  if (fit == doc.end() || !fit->is_array() || fit->empty())
    throw ConfigError("config: integrate needs a non-empty \"factors\" array");
  for (const json& f : *fit) {
    if (!f.is_object()) throw ConfigError("config: each factor must be an object");
    reject_unknown_keys(f, {"gradient", "offset"}, "factor");
    AffineFunction af;
    af.gradient = require_number_array(f, "gradient", "factor");
    af.offset = require_number(f, "offset", "factor");
    job.factors.push_back(std::move(af));
  }

  auto tit = doc.find("test_function");
  if (tit == doc.end() || !tit->is_object())
    throw ConfigError("config: integrate needs a \"test_function\" object");
  reject_unknown_keys(*tit, {"kind", "center", "width"}, "test_function");
  auto kit = tit->find("kind");
  if (kit == tit->end() || !kit->is_string())
    throw ConfigError("config: test_function needs string \"kind\"");
  std::string kind = kit->get<std::string>();
  std::vector<double> center = require_number_array(*tit, "center", "test_function");
  double width = require_number(*tit, "width", "test_function");
  if (width <= 0.0) throw ConfigError("config: test_function width must be positive");
  if (kind == "gaussian")
    job.phi = TestFunction::gaussian(std::move(center), width);
  else if (kind == "bump")
    job.phi = TestFunction::bump(std::move(center), width);
  else
    throw ConfigError("config: test_function kind must be gaussian or bump");
  if (job.phi.dim() != static_cast<int>(job.factors.front().gradient.size()))
    throw ConfigError("config: test_function dimension must match the factors");
  return job;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace resdelta
