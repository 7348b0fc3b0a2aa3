#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "resdelta/config_io.hpp"
#include "resdelta/errors.hpp"
#include "resdelta/horn.hpp"
#include "resdelta/multipoly.hpp"
#include "resdelta/verifier.hpp"

namespace fs = std::filesystem;
using namespace resdelta;

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitConfigError = 2;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << content;
}

void require_out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out directory is required");
  if (!fs::is_directory(out)) throw ConfigError("output directory does not exist: " + out);
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += format_double(xs[i]);
  }
  return s + "]";
}

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<double> tolerance;
};

int run_verify(const Flags& fl) {
  VerifyJob job = parse_verify_config(read_text_file(fl.config));
  if (fl.seed) job.seed = *fl.seed;
  if (fl.tolerance) job.rel_tolerance = *fl.tolerance;
  require_out_dir(fl.out);

  std::ostringstream rep;
  rep << "verify report\n";
  rep << "seed=" << job.seed << " eta=" << format_double(job.eta)
      << " rel_tolerance=" << format_double(job.rel_tolerance)
      << " min_separation=" << format_double(job.min_separation) << "\n";

  int passed = 0;
  for (std::size_t idx = 0; idx < job.cases.size(); ++idx) {
    const VerifyCase& c = job.cases[idx];
    RootPoly P{c.a, c.u, Family::A};
    RootPoly Q{c.b, c.v, Family::B};
    std::vector<double> center = c.u;
    center.insert(center.end(), c.v.begin(), c.v.end());
    TestFunction phi = TestFunction::gaussian(center, c.width);

    VerifyOptions opts;
    opts.integration.eta = job.eta;
    opts.integration.seed = job.seed + 40009 * idx;
    opts.rel_tol = job.rel_tolerance;
    opts.min_separation = job.min_separation;
    opts.run_mollified = job.mollified;
    opts.mollified_samples = job.mollified_samples;

    IdentityReport r = verify_identity(P, Q, phi, opts);

    rep << "\ncase " << (idx + 1) << "\n";
    rep << "  a=" << format_double(c.a) << " b=" << format_double(c.b) << " u=" << join_numbers(c.u)
        << " v=" << join_numbers(c.v) << " width=" << format_double(c.width) << "\n";
    auto line = [&](const char* name, const IntegralResult& res) {
      rep << "  " << name << "=";
      if (res.divergent())
        rep << "divergent";
      else
        rep << format_double(res.value);
      rep << "\n";
    };
    line("lhs_localized", r.lhs_localized);
    line("lhs_direct", r.lhs_direct);
    line("rhs_localized", r.rhs_localized);
    for (const MollifiedEstimate& m : r.mollified)
      rep << "  mollified eps=" << format_double(m.epsilon) << " value=" << format_double(m.value)
          << " stderr=" << format_double(m.std_error) << "\n";
    if (r.divergent) {
      auto pr = r.lhs_localized.divergent_pair;
      rep << "  result: Divergent (pair " << (pr.first + 1) << "," << (pr.second + 1) << ")\n";
    } else {
      rep << "  abs_discrepancy=" << format_double(r.abs_discrepancy) << "\n";
      rep << "  rel_discrepancy=" << format_double(r.rel_discrepancy) << "\n";
      rep << "  result: " << (r.pass ? "PASS" : "FAIL") << "\n";
      if (!r.pass) rep << "  note: " << r.note << "\n";
    }
    if (r.pass) ++passed;
  }
  rep << "\nsummary: " << passed << "/" << job.cases.size() << " passed\n";

  write_file(fs::path(fl.out) / "report.txt", rep.str());
  std::cout << "verify: " << passed << "/" << job.cases.size() << " passed\n";
  return passed == static_cast<int>(job.cases.size()) ? 0 : kExitVerifyFail;
}

int run_expand_j(int size_a, int size_b, const std::string& a_str, const std::string& b_str) {
  if (size_a < 1 || size_b < 1 || size_a > 4 || size_b > 4)
    throw ConfigError("expand-j: family sizes must be between 1 and 4");
  mpq_class a, b;
  try {
    a = mpq_class(a_str);
    b = mpq_class(b_str);
  } catch (const std::invalid_argument&) {
    throw ConfigError("expand-j: leading coefficients must be rationals like 3 or -5/7");
  }
  if (a.get_den() == 0 || b.get_den() == 0)
    throw ConfigError("expand-j: zero denominator");
  a.canonicalize();
  b.canonicalize();
  if (a == 0 || b == 0) throw ConfigError("expand-j: leading coefficients must be nonzero");

  MultiPoly J = expand_j_symbolic(size_a, size_b, a, b);

  // Self-check against the defining sum at a few distinct rational points.
  int nv = size_a + size_b;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<mpq_class> point(nv);
    for (int i = 0; i < nv; ++i) {
      point[i] = mpq_class(2 * i + 1 + trial * nv * 2, i + 2);
      point[i].canonicalize();
    }
    std::vector<mpq_class> u(point.begin(), point.begin() + size_a);
    std::vector<mpq_class> v(point.begin() + size_a, point.end());
    if (J.eval(point) != j_multiplier_exact(u, v, a, b)) {
      std::cerr << "expand-j: expansion disagrees with the defining sum\n";
      return kExitVerifyFail;
    }
  }
  std::cout << J.to_string(size_a) << "\n";
  return 0;
}

std::string grid_csv(const HornGrid& g) {
  std::string s = "p_lo,p_hi,q_lo,q_hi,value,stderr,flag\n";
  for (int ip = 0; ip < g.bins; ++ip)
    for (int iq = 0; iq < g.bins; ++iq) {
      int b = g.idx(ip, iq);
      s += format_double(g.p_edges[ip]) + "," + format_double(g.p_edges[ip + 1]) + "," +
           format_double(g.q_edges[iq]) + "," + format_double(g.q_edges[iq + 1]) + "," +
           format_double(g.value[b]) + "," + format_double(g.std_error[b]) + ",";
      if (g.flag[b] == 'D') s += "D";
      s += "\n";
    }
  return s;
}

int run_horn(const Flags& fl) {
  HornConfig cfg = parse_horn_config(read_text_file(fl.config));
  if (fl.seed) cfg.seed = *fl.seed;
  require_out_dir(fl.out);

  CompareReport rep = compare_report(cfg);

  std::string cmp = "p_lo,p_hi,q_lo,q_hi,mc,sigma,localized,z,flag\n";
  for (const CompareRow& r : rep.rows) {
    cmp += format_double(rep.mc.p_edges[r.ip]) + "," + format_double(rep.mc.p_edges[r.ip + 1]) +
           "," + format_double(rep.mc.q_edges[r.iq]) + "," +
           format_double(rep.mc.q_edges[r.iq + 1]) + "," + format_double(r.mc) + "," +
           format_double(r.sigma) + "," + format_double(r.localized) + "," + format_double(r.z) +
           ",";
    if (r.flag == 'D') cmp += "D";
    cmp += "\n";
  }

  write_file(fs::path(fl.out) / "mc_grid.csv", grid_csv(rep.mc));
  write_file(fs::path(fl.out) / "localized_grid.csv", grid_csv(rep.localized));
  write_file(fs::path(fl.out) / "compare.csv", cmp);

  std::cout << "horn: bins=" << rep.mc.bins * rep.mc.bins << " unflagged=" << rep.unflagged
            << " flagged=" << rep.flagged
            << " unflagged_pass_fraction=" << format_double(rep.unflagged_pass_fraction)
            << " mc_mass=" << format_double(rep.mc.total_mass)
            << " localized_mass=" << format_double(rep.localized.total_mass) << "\n";
  return 0;
}

int run_integrate(const Flags& fl) {
  IntegrateJob job = parse_integrate_config(read_text_file(fl.config));
  if (fl.seed) job.seed = *fl.seed;

  AffineFactorization fac = validate_factorization(job.factors);
  IntegrationConfig cfg;
  cfg.method = job.method;
  cfg.samples = job.samples;
  cfg.eta = job.eta;
  cfg.seed = job.seed;
  if (fl.tolerance) cfg.rel_tol = *fl.tolerance;

  IntegralResult res = delta_product_integrate(fac, job.phi, cfg);
  if (res.divergent()) {
    std::cout << "DIVERGENT (pair " << (res.divergent_pair.first + 1) << ","
              << (res.divergent_pair.second + 1) << ")\n";
    return 0;
  }
  std::cout << format_double(res.value) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delta measures on affine hyperplane arrangements: verification and demos"};
  app.require_subcommand(1);

  Flags fl;
  int size_a = 0, size_b = 0;
  std::string a_str = "1", b_str = "1";

  auto add_common = [&](CLI::App* sub, bool needs_config, bool needs_out) {
    auto* c = sub->add_option("--config", fl.config, "JSON configuration file");
    if (needs_config) c->required();
    auto* o = sub->add_option("--out", fl.out, "output directory");
    if (needs_out) o->required();
    sub->add_option("--seed", fl.seed, "override the configured RNG seed");
    sub->add_option("--workers", fl.workers, "worker count (results are identical for any value)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", fl.tolerance, "override the comparison tolerance");
  };

  CLI::App* verify = app.add_subcommand("verify", "run the identity verifier on configured cases");
  add_common(verify, true, true);
  CLI::App* expand = app.add_subcommand("expand-j", "print the exact multiplier polynomial");
  expand->add_option("--size-a", size_a, "first family size")->required();
  expand->add_option("--size-b", size_b, "second family size")->required();
  expand->add_option("--a", a_str, "leading coefficient of P (rational)");
  expand->add_option("--b", b_str, "leading coefficient of Q (rational)");
  CLI::App* horn = app.add_subcommand("horn", "eigenvalue-sum density demo: MC vs localized");
  add_common(horn, true, true);
  CLI::App* integrate = app.add_subcommand("integrate", "integrate a test function against one delta measure");
  add_common(integrate, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (verify->parsed()) return run_verify(fl);
    if (expand->parsed()) return run_expand_j(size_a, size_b, a_str, b_str);
    if (horn->parsed()) return run_horn(fl);
    return run_integrate(fl);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DivisibilityFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerifyFail;
  } catch (const DegreeCertificateFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerifyFail;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}
