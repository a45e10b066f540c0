#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hgl/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-like Ginzburg-Landau minimizers on the Heisenberg group"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  bool deterministic = false;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--deterministic", deterministic,
                  "single worker, fixed-order reductions");
    sub->add_option("--threads", threads, "worker count for the kernels");
  };

  const char* names[] = {"solve", "refine", "analyze", "sequence", "gamma", "verify"};
  const hgl::RunMode modes[] = {hgl::RunMode::solve,    hgl::RunMode::refine,
                                hgl::RunMode::analyze,  hgl::RunMode::sequence,
                                hgl::RunMode::gamma,    hgl::RunMode::verify};
  const char* help[] = {"constrained minimization from the ramp",
                        "minimization plus the translate min-refinement",
                        "refinement plus the measurement reports",
                        "rational approximation sequence toward a target direction",
                        "interface sharpening under the N-scaled functional",
                        "full run with pass/fail checks"};
  CLI::App* subs[6];
  for (int i = 0; i < 6; ++i) {
    subs[i] = app.add_subcommand(names[i], help[i]);
    add_common(subs[i]);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    hgl::RunConfig cfg = hgl::parse_config(read_file(config_path));
    for (int i = 0; i < 6; ++i)
      if (subs[i]->parsed()) cfg.mode = modes[i];

    hgl::PipelineOptions opt;
    opt.out_dir = out_dir;
    opt.deterministic = deterministic;
    if (threads > 0) {
      opt.threads = threads;
    } else if (const char* env = std::getenv("HGL_THREADS")) {
      opt.threads = std::max(1, std::atoi(env));
    }
    return hgl::run_pipeline(cfg, opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
