#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sv {

/// Base class for all svboot errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (negative distance, non-positive parameter, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// No point pair fell into any lag bin.
class all_bins_empty : public error {
 public:
  using error::error;
};

/// Too few nonempty lag bins for the requested operation.
class insufficient_bins : public error {
 public:
  using error::error;
};

/// Cholesky factorization hit a non-positive pivot.
class not_positive_definite : public error {
 public:
  using error::error;
};

/// The base model fit (or the fit on normal scores) did not pass the
/// convergence screen, so the bootstrap cannot start.
class base_fit_failed : public error {
 public:
  using error::error;
};

/// The bootstrap attempt budget ran out before enough replicates were
/// accepted. Carries the counts accumulated so far.
class attempt_budget_exhausted : public error {
 public:
  attempt_budget_exhausted(const std::string& what, std::int64_t generated,
                           std::int64_t retained, std::int64_t discarded_filter,
                           std::int64_t discarded_screen)
      : error(what),
        n_generated(generated),
        n_retained(retained),
        n_discarded_filter(discarded_filter),
        n_discarded_screen(discarded_screen) {}

  std::int64_t n_generated;
  std::int64_t n_retained;
  std::int64_t n_discarded_filter;
  std::int64_t n_discarded_screen;
};

/// Input lists whose lengths must agree do not.
class length_mismatch : public error {
 public:
  using error::error;
};

/// Grouping over an empty result set.
class empty_group : public error {
 public:
  using error::error;
};

/// CSV input could not be parsed. Carries the 1-based line number.
class csv_parse_error : public error {
 public:
  csv_parse_error(const std::string& what, std::size_t line_number)
      : error(what), line(line_number) {}

  std::size_t line;
};

}  // namespace sv
