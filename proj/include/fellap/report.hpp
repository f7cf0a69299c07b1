#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fellap/errors.hpp"

namespace fellap {

/// One failed instance of a checked identity.
struct Violation {
  std::string check;
  std::string witness;
  double magnitude = 0.0;
};

/// Running maximum of one named check.
struct CheckSummary {
  std::string check;
  double max_residual = 0.0;
  std::string worst_witness;
  std::size_t evaluations = 0;
};

/// Outcome of a validator. Violations are data: an empty violation list is a pass.
class Report {
 public:
  explicit Report(double tolerance = 1e-10) : tolerance_(tolerance) {}

  double tolerance() const { return tolerance_; }

  /// Record one evaluation of `check`; a residual above tolerance is also a violation.
  void record(const std::string& check, double residual, const std::string& witness) {
    auto it = std::find_if(checks_.begin(), checks_.end(),
                           [&](const CheckSummary& c) { return c.check == check; });
    if (it == checks_.end()) {
      checks_.push_back({check, 0.0, "", 0});
      it = std::prev(checks_.end());
    }
    ++it->evaluations;
    if (it->evaluations == 1 || residual > it->max_residual) {
      it->max_residual = residual;
      it->worst_witness = witness;
    }
    if (!(residual <= tolerance_)) violations_.push_back({check, witness, residual});
  }

  /// Record a combinatorial failure (no magnitude other than "wrong").
  void fail(const std::string& check, const std::string& witness) { record(check, 1.0, witness); }

  void merge(const Report& other) {
    for (const auto& c : other.checks_) {
      auto it = std::find_if(checks_.begin(), checks_.end(),
                             [&](const CheckSummary& x) { return x.check == c.check; });
      if (it == checks_.end()) {
        checks_.push_back(c);
      } else {
        it->evaluations += c.evaluations;
        if (c.max_residual > it->max_residual) {
          it->max_residual = c.max_residual;
          it->worst_witness = c.worst_witness;
        }
      }
    }
    violations_.insert(violations_.end(), other.violations_.begin(), other.violations_.end());
  }

  bool ok() const { return violations_.empty(); }
  const std::vector<Violation>& violations() const { return violations_; }
  const std::vector<CheckSummary>& checks() const { return checks_; }

  double max_residual() const {
    double m = 0.0;
    for (const auto& c : checks_) m = std::max(m, c.max_residual);
    return m;
  }

  double max_residual(const std::string& check) const {
    for (const auto& c : checks_)
      if (c.check == check) return c.max_residual;
    return 0.0;
  }

  bool has_violation(const std::string& check) const {
    return std::any_of(violations_.begin(), violations_.end(),
                       [&](const Violation& v) { return v.check == check; });
  }

  std::string summary() const {
    std::ostringstream os;
    os << (ok() ? "pass" : "FAIL") << " (" << violations_.size() << " violations, max residual "
       << max_residual() << ")";
    if (!ok()) {
      const auto& v = violations_.front();
      os << "; first: " << v.check << " at " << v.witness << " (" << v.magnitude << ")";
    }
    return os.str();
  }

 private:
  double tolerance_;
  std::vector<CheckSummary> checks_;
  std::vector<Violation> violations_;
};

/// Raised by constructors that require a passing validation report.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, Report report)
      : Error(what + ": " + report.summary()), report_(std::move(report)) {}
  const Report& report() const { return report_; }

 private:
  Report report_;
};

}  // namespace fellap
