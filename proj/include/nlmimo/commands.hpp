#pragma once

#include <string>

#include "nlmimo/config.hpp"
#include "nlmimo/csv.hpp"

namespace nlmimo {

struct CommandResult {
  Table table;
  bool ok = true;  // false when any sweep cell failed
};

/// One row per nonlinear stage plus the cascade: a, sigma_g2, gamma_g and
/// standard errors.
CommandResult cmd_bussgang(const RunConfig& config);

/// Per (beta, PC) row: alpha_p, eta_ideal, required gamma_g, chosen hardware
/// point and the resulting SNR_edge bound. Infeasible rows are reported in
/// the status column.
CommandResult cmd_design(const RunConfig& config);

/// Outage points visited by a bisection over SNR_edge plus a final
/// `threshold` row with the SNR_edge meeting the target BER at the
/// availability level.
CommandResult cmd_simulate(const RunConfig& config);

/// beta x PC x chain grid of simulate thresholds. With sweep.out_dir set,
/// finished cells leave a marker and are not recomputed on the next run.
CommandResult cmd_sweep(const RunConfig& config);

CommandResult run_command(const std::string& name, const RunConfig& config);

}  // namespace nlmimo
