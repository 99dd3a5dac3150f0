// Run CSV emission, parsing, and the scalar summary computed from it.
//
// Column order (N joints, K = (N²−N)/2):
//   t, q1..qN, qd1..qdN, qdd1..qddN, tau1..tauN,
//   qm1..qmN, qf1..qfN, qdf1..qdfN, qddf1..qddfN, qref1..qrefN,
//   tauhat1..tauhatN, e1_1..e1_N, e2_1..e2_N, e3_1..e3_K, e4_1..e4_N,
//   eps_norm, emod_norm, dead_zone_active, weights_changed,
//   V, dV, region, wn_M_hidden, wn_M_output, wn_C_hidden, wn_C_output,
//   wn_G_hidden, wn_G_output, weight_step, fallback, err_M, err_C, err_G
//
// dead_zone_active is 1 when ‖e_mod‖ < γν0/α (adaptation frozen). Floats
// use 17 significant digits so a parsed table reproduces the run exactly.
#pragma once

#include "nnid/control.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nnid {

std::vector<std::string> run_csv_header(std::size_t dof);
void write_run_csv(std::ostream& os, const RunLog& log);

/// Column-major numeric table keyed by header name.
struct CsvTable {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> columns;
  std::size_t rows = 0;

  const std::vector<double>& col(const std::string& name) const;
  bool has(const std::string& name) const { return columns.count(name) > 0; }
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// Joint count implied by a run table's header.
std::size_t table_dof(const CsvTable& t);

struct SummaryReport {
  std::size_t dof = 0;
  std::size_t steps = 0;
  double duration = 0.0;
  double rms_e1_first = 0.0;  // first 5% of steps
  double rms_e1_last = 0.0;   // last 5% of steps
  double e1_ratio = 0.0;
  double sup_emod_late = 0.0;            // last 50% of steps
  double sup_emod_post_transient = 0.0;  // after the first 20%
  std::size_t steps_outside_dead_zone = 0;
  double frac_dV_negative_outside = 0.0;
  std::size_t frozen_steps = 0;
  std::size_t frozen_steps_with_weight_change = 0;
  double mean_err_M_first = 0.0, mean_err_M_last = 0.0;
  double mean_err_C_first = 0.0, mean_err_C_last = 0.0;
  double mean_err_G_first = 0.0, mean_err_G_last = 0.0;
  std::vector<double> tracking_rms;  // per joint, q − q_ref
  std::vector<double> effort_rms;    // per joint
  std::vector<double> effort_tv;     // per joint, Σ|Δτ|
  double weight_tv = 0.0;            // Σ‖θ_k − θ_{k−1}‖
  double late_weight_norm_variance = 0.0;  // last 25%, summed over blocks
  double fallback_fraction = 0.0;
};

SummaryReport summarize(const CsvTable& table);
void write_summary(std::ostream& os, const SummaryReport& s);

/// First time ‖e_mod‖ comes back to `threshold` or below after having been
/// above it; 0 if it never exceeded it, +∞ if it never returned.
double time_to_threshold(const CsvTable& table, double threshold);

/// Mean of the given column over the half-open step range [begin, end).
double column_mean(const CsvTable& t, const std::string& name,
                   std::size_t begin, std::size_t end);

}  // namespace nnid
