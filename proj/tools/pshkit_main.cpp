#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pshkit/commands.hpp"
#include "pshkit/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::string fixture;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon, eta, C, K;
  std::optional<std::size_t> n_boundary;
  bool json = false;
};

void add_common(CLI::App* sub, Common& c) {
  auto* cfg = sub->add_option("--config", c.config, "domain config (JSON)");
  auto* fix = sub->add_option("--fixture", c.fixture, "built-in domain: ball, example-2-3, example-2-3-fixed");
  cfg->excludes(fix);
  sub->add_option("--out", c.out, "directory for report.json and CSV tables");
  sub->add_option("--seed", c.seed, "sampling seed");
  sub->add_option("--epsilon", c.epsilon, "target Hessian slack");
  sub->add_option("--eta", c.eta, "single exponent to test");
  sub->add_option("--C", c.C, "force C instead of the formula");
  sub->add_option("--K", c.K, "starting K (0 disables doubling)");
  sub->add_option("--n-boundary", c.n_boundary, "boundary sample count");
  sub->add_flag("--json", c.json, "print the JSON report instead of the summary");
}

int emit(const pshkit::CommandResult& res, bool json) {
  if (json) {
    std::cout << res.report.dump(2) << "\n";
  } else {
    (res.exit_code == 2 ? std::cerr : std::cout) << res.summary << "\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plurisubharmonic defining functions for domains in C^2"};
  app.require_subcommand(1);

  Common common;
  CLI::App* classify = app.add_subcommand("classify", "weak/strict classification and obstruction table");
  CLI::App* verify = app.add_subcommand("verify", "interior and exterior main-estimate pipelines");
  CLI::App* df = app.add_subcommand("df-exponent", "exhaustion exponents on both sides");
  for (CLI::App* sub : {classify, verify, df}) add_common(sub, common);

  bool st_json = false, flip = false;
  CLI::App* selftest = app.add_subcommand("selftest", "invariant suites on the built-in fixtures");
  selftest->add_flag("--json", st_json, "machine-readable results");
  selftest->add_flag("--flip-sign", flip, "run on -rho; every fixture is then expected to fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (selftest->parsed()) {
    pshkit::SelftestOptions opts;
    opts.flip_sign = flip;
    return emit(pshkit::cmd_selftest(opts), st_json);
  }

  pshkit::DomainConfig cfg;
  try {
    if (!common.config.empty()) {
      cfg = pshkit::load_config(common.config);
    } else if (!common.fixture.empty()) {
      cfg = pshkit::fixture(common.fixture);
    } else {
      std::cerr << "one of --config or --fixture is required\n";
      return 2;
    }
    pshkit::apply(cfg, {common.seed, common.epsilon, common.eta, common.C, common.K, common.n_boundary});
  } catch (const pshkit::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (classify->parsed()) return emit(pshkit::cmd_classify(cfg, common.out), common.json);
  if (verify->parsed()) return emit(pshkit::cmd_verify(cfg, common.out), common.json);
  return emit(pshkit::cmd_df_exponent(cfg, common.out), common.json);
}
