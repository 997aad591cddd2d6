#pragma once

#include <stdexcept>
#include <string>

namespace eot {

// Contract violations surfaced by the library. Failure to converge is
// deliberately not in this list: solvers report it through their result
// structs so that long sweeps can record it and keep going.
enum class errc {
  empty_support,
  negative_weight,
  nonfinite_coordinate,
  nonpositive_eps,
  bad_dimension,
  cache_budget_exceeded,
  not_symmetric,
  not_psd,
  not_orthogonal,
  wrong_cost_variant,
  a_bound_violated,
  degenerate_fit,
  parse_error,
  bad_config,
};

struct error : std::runtime_error {
  errc code;
  error(errc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

[[noreturn]] inline void fail(errc c, const std::string& what) { throw error(c, what); }

inline void require(bool ok, errc c, const std::string& what) {
  if (!ok) fail(c, what);
}

}  // namespace eot
