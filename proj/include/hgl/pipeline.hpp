#pragma once

#include <iosfwd>
#include <string>

#include "hgl/config.hpp"

namespace hgl {

struct PipelineOptions {
  std::string out_dir = ".";
  bool deterministic = false;
  int threads = 1;
};

// Executes the configured mode, writes field dumps and CSV reports into
// out_dir, and returns the process exit status (0 on success; in verify mode,
// 0 only if every check passes).
int run_pipeline(const RunConfig& cfg, const PipelineOptions& opt, std::ostream& log);

}  // namespace hgl
