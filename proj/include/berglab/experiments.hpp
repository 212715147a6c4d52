#pragma once

// Batch front end: each experiment tag drives one module operation over a
// configurable grid and records the results as CSV tables plus companion
// plot scripts.  The summary report re-reads those tables and re-checks the
// acceptance band for each criterion from the recorded numbers alone.

#include <cstdint>
#include <string>
#include <vector>

#include "berglab/numerics.hpp"
#include "berglab/weights.hpp"

namespace berglab::experiments {

struct ExperimentConfig {
  std::string experiment;
  weights::WeightSpec weight = weights::WeightSpec::exp_disk(1.0);
  std::string output_dir = ".";
  std::uint64_t seed = 20240815;

  Scalar tol = 1e-8;          // quadrature target where an operation takes one
  long kernel_n_max = 150000; // disk kernel model size
  long fock_n_max = 8192;     // plane kernel model size
  int n_radial = 64;          // operator grids (opnorm-contrast scales these)
  Scalar u_max = 5.0;         // radial clustering depth of those grids
  int iterations = 24;        // power-iteration budget per restart
  int deriv_max = 6;          // highest derivative order in the ledger
  int vn_lo = 5, vn_hi = 12;  // block range for the norm-scaling fit
  int pair_count = 1000;      // random pairs for the identity residual table
  Scalar eta = 0.0;           // profile-check exponent shift

  std::vector<Scalar> p_values;     // exponents (opnorm, block norms)
  std::vector<int> resolutions;     // radial sizes for the opnorm ladder
  std::vector<Scalar> r_grid;       // radii; per-tag default when empty
  std::vector<Scalar> lambda_grid;  // moment parameters
  std::vector<Scalar> t_grid;       // plane radii
};

// the ten run tags, in canonical order
const std::vector<std::string>& experiment_tags();

// Defaults appropriate for the tag (grids, weight family, exponent sets).
// Throws std::invalid_argument for an unknown tag.
ExperimentConfig default_config(const std::string& tag);

// Throws std::invalid_argument naming the offending field.  Never touches
// the filesystem, so a bad config writes nothing.
void validate(const ExperimentConfig& cfg);

// FNV-1a hash of the effective config (output directory excluded, so moving
// results does not change their recorded identity).
std::string config_hash(const ExperimentConfig& cfg);

struct RunResult {
  std::vector<std::string> files;  // artifacts written, in order
  std::string failed_op;           // operation that threw; empty on success
  std::string error;               // its message
  bool ok() const { return failed_op.empty(); }
};

// Validates, then executes the experiment.  Tables are written as soon as
// they are complete, so a mid-run failure leaves the earlier artifacts on
// disk and names the operation that broke.
RunResult run(const ExperimentConfig& cfg);

struct CriterionResult {
  std::string name;
  bool found = false;   // all required tables present
  bool passed = false;
  std::string detail;   // measured numbers or the missing/violating item
};

struct Report {
  std::vector<CriterionResult> criteria;
  int found_count = 0;
  int passed_count = 0;
  bool all_pass = false;  // every criterion found and passed
  std::string text;       // rendered summary, also written to summary.txt
};

// Scans dir for recorded tables and re-checks each criterion band.
Report report(const std::string& dir);

}  // namespace berglab::experiments
