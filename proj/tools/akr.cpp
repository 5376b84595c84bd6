#include "akr/run.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

void split_pairs(const std::vector<std::string>& in, std::map<std::string, std::string>& out, const char* flag) {
  for (const std::string& s : in) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError(flag, "expected key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"akr: Kobayashi-Royden metric estimates on almost complex model domains"};
  app.require_subcommand(1);

  std::string config_file, model, out, cert_file;
  std::vector<std::string> params, options;
  int grid = -1, threads = -1;
  double tol = -1.0;
  long long seed = -1;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_file, "INI file with [experiment], [params] and [options]");
    c->add_option("--model", model, "builtin model name (see `akr models`)");
    c->add_option("--param", params, "model parameter key=value")->allow_extra_args(false);
    c->add_option("--option", options, "task option key=value")->allow_extra_args(false);
    c->add_option("--grid", grid, "certificate samples per axis");
    c->add_option("--tol", tol, "tolerance");
    c->add_option("--seed", seed, "random seed");
    c->add_option("--out", out, "output directory");
    c->add_option("--threads", threads, "worker threads, 0 = all cores");
  };
  for (const std::string& t : akr::task_names()) {
    if (t == "verify") continue;
    add_common(app.add_subcommand(t, "run the " + t + " task"));
  }
  CLI::App* verify = app.add_subcommand("verify", "replay a .cert file");
  verify->add_option("file", cert_file, "certificate record")->required();
  verify->add_option("--grid", grid, "replay on a finer grid");
  app.add_subcommand("models", "list builtin models and parameter ranges");

  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();

  try {
    if (task == "models") {
      std::cout << akr::list_models();
      return 0;
    }
    akr::ExperimentConfig cfg;
    if (!config_file.empty()) cfg = akr::parse_config(akr::read_text(config_file));
    cfg.task = task;
    if (!model.empty()) cfg.model = model;
    if (!out.empty()) cfg.out = out;
    if (grid >= 0) cfg.grid = grid;
    if (tol >= 0.0) cfg.tol = tol;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads >= 0) cfg.threads = threads;
    split_pairs(params, cfg.params, "--param");
    split_pairs(options, cfg.options, "--option");
    if (task == "verify") cfg.options["file"] = cert_file;
    const akr::RunResult res = akr::run(cfg, std::cerr);
    for (const std::string& f : res.files) std::cout << "wrote " << f << "\n";
    std::cout << res.summary << "\n";
    return res.exit_code;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
