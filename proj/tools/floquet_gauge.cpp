#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "floquet_gauge.h"

namespace {

struct Args {
  std::string config;
  std::string out;
  double tol = 0.0;
  std::size_t dense = 0;
  bool continue_through_poles = false;
  std::vector<std::string> params;
  std::string example;
  unsigned threads = 0;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Args& a, bool needs_config) {
  CLI::App* sub = app.add_subcommand(name, help);
  auto* config = sub->add_option("--config", a.config, "JSON configuration file")->check(CLI::ExistingFile);
  if (needs_config) config->required();
  sub->add_option("--out", a.out, "Output directory (created if missing)")->required();
  sub->add_option("--tol", a.tol, "Verification tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--dense", a.dense, "Number of uniform output points")->check(CLI::Range(2, 100000000));
  sub->add_option("--params", a.params, "Parameter overrides name=value")->expected(1, -1);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet decomposition, gauge transformations and Riccati reductions of linear ODE systems",
               "floquet-gauge"};
  app.set_version_flag("--version", std::string(fg_version()));
  app.require_subcommand(1);

  Args a;
  add_command(app, "floquet", "Floquet decomposition of a periodic system", a, true);
  add_command(app, "gauge", "Apply a gauge or solve the transport equation for one", a, true);
  add_command(app, "simulate", "Integrate x' = A(t) x + N(x, t)", a, true);
  add_command(app, "riccati", "Solve a Riccati equation through its linearization", a, true)
      ->add_flag("--continue-through-poles", a.continue_through_poles, "Integrate through poles instead of stopping");
  CLI::App* examples = add_command(app, "examples", "Verify the worked examples", a, false);
  examples->add_option("name", a.example, "Run only this example");
  examples->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::vector<const char*> params;
  for (const auto& p : a.params) params.push_back(p.c_str());
  fg_run_options opts;
  fg_run_options_init(&opts);
  opts.config = a.config.empty() ? nullptr : a.config.c_str();
  opts.out = a.out.c_str();
  opts.tol = a.tol;
  opts.dense = a.dense;
  opts.continue_through_poles = a.continue_through_poles ? 1 : 0;
  opts.params = params.data();
  opts.param_count = params.size();
  opts.example = a.example.empty() ? nullptr : a.example.c_str();
  opts.threads = a.threads;

  char message[4096];
  const std::string command = app.get_subcommands().front()->get_name();
  const int code = fg_run(command.c_str(), &opts, message, sizeof message);
  std::fprintf(code == 0 ? stdout : stderr, "%s\n", message);
  return code;
}
