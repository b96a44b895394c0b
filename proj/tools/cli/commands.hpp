#pragma once

#include <ostream>
#include <string>

#include "cli/run_config.hpp"
#include "pgflow/integrate.hpp"

namespace pgflow::cli {

/// Process exit status.
enum ExitCode : int {
  kStalled = 0,
  kConfigError = 1,
  kFieldError = 2,
  kExhausted = 3,
};

int exit_code(Termination t);

/// Integrate a configured problem and write the requested files.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_run(const std::string& config_path, const Overrides& o, std::ostream& out,
            std::ostream& err);

/// Finite-difference gradient check at x0 and 10 seeded random points.
int cmd_check(const std::string& config_path, const Overrides& o, std::ostream& out,
              std::ostream& err);

/// Precision-error sweep on the dependent gradient triple.
int cmd_projection_bench(const Overrides& o, std::ostream& out, std::ostream& err);

/// Attraction-domain problem from the three reference starts (or --x0).
int cmd_example1(const Overrides& o, std::ostream& out, std::ostream& err);

/// Essential-matrix estimation from the reference start.
int cmd_example2(const Overrides& o, std::ostream& out, std::ostream& err);

}  // namespace pgflow::cli
