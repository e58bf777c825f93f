#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "dfvalid/term.hpp"

namespace dfv {

struct BackendConfig {
  // Internal enumeration limits. The bit budget is the sum of free scalar
  // variable widths after equality elimination.
  unsigned budget_bits = 20;
  unsigned max_cells = 16;  // lazily branched memory cells per assignment
  // External SMT-LIB2 solver. Empty path = internal only. The command is
  // invoked as `<path> <script-file>`; extra arguments may be embedded in path.
  std::string solver_path;
  unsigned timeout_ms = 30000;
};

struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Model {
  VarEnv vars;
  MemEnv mems;
};

enum class Verdict { Sat, Unsat, Unknown };

struct SolverResult {
  Verdict verdict;
  std::optional<Model> model;  // present iff Sat
  std::string reason;          // for Unknown
};

// Complete within its budget: exhaustive enumeration over free scalars with
// lazily branched memory cells. Throws CapabilityError when the budget or the
// 8-bit address-width limit is exceeded and no external solver is configured.
SolverResult check_sat(const Formula& f, const BackendConfig& config);
SolverResult check_sat_internal(const Formula& f, const BackendConfig& config);
SolverResult check_sat_external(const Formula& f, const BackendConfig& config);

enum class Validity { Valid, Invalid, Unknown };

struct ValidityResult {
  Validity verdict;
  std::optional<Model> counter_model;  // present iff Invalid
  std::string reason;
};

ValidityResult check_valid(const Formula& f, const BackendConfig& config);

// True iff the two memories agree at every address (discharged pointwise by
// the internal backend, by array extensionality externally).
Formula mem_equal(const Mem& a, const Mem& b);

}  // namespace dfv
