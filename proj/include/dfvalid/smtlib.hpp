#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfvalid/solver.hpp"
#include "dfvalid/term.hpp"

namespace dfv {

// SMT-LIB2 (QF_ABV) wire format for the external backend. One process per
// query: the script carries declarations, the assertion, check-sat, and
// get-value lines for every scalar plus every syntactic (select mem addr)
// pair so memory maps can be rebuilt from the response.
std::string smtlib_script(const Formula& f);

struct SmtResponse {
  Verdict verdict = Verdict::Unknown;
  Model model;
  std::string raw;
};

// Parses solver output: a sat/unsat/unknown line followed by get-value
// s-expressions. Throws std::runtime_error on malformed input.
SmtResponse parse_smtlib_response(const std::string& text, const Formula& f);

// Serializes one term/memory for embedding in scripts (exposed for tests).
std::string smtlib_term(const Term& t);
std::string smtlib_mem(const Mem& m);
std::string smtlib_formula(const Formula& f);

}  // namespace dfv
