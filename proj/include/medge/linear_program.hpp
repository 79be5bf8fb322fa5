#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medge {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct Term {
  int var = 0;
  double coef = 0.0;

  bool operator==(const Term&) const = default;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;

  bool operator==(const Constraint&) const = default;
};

/// One value per variable, each 0 or 1.
using Assignment = std::vector<std::uint8_t>;

/// A pure 0-1 linear program in minimization form.
///
/// Variables flagged `auxiliary` are fully determined by the others through
/// the constraints (product linearizations, derived indicators). The
/// enumeration oracle only counts non-auxiliary variables against its cap.
struct LinearProgram {
  std::vector<std::string> variable_names;
  std::vector<std::uint8_t> auxiliary;
  std::vector<Constraint> constraints;
  std::vector<Term> objective;
  double objective_offset = 0.0;

  int add_variable(std::string name, bool is_auxiliary = false);
  void add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);

  [[nodiscard]] int variable_count() const { return static_cast<int>(variable_names.size()); }
  [[nodiscard]] int decision_variable_count() const;

  /// Objective including the constant offset.
  [[nodiscard]] double evaluate(std::span<const std::uint8_t> assignment) const;
  [[nodiscard]] double row_activity(const Constraint& row, std::span<const std::uint8_t> assignment) const;
  [[nodiscard]] bool satisfies(const Constraint& row, std::span<const std::uint8_t> assignment,
                               double tol = 1e-9) const;
  /// Indices of violated constraints.
  [[nodiscard]] std::vector<int> violations(std::span<const std::uint8_t> assignment,
                                            double tol = 1e-9) const;
  [[nodiscard]] bool feasible(std::span<const std::uint8_t> assignment, double tol = 1e-9) const {
    return violations(assignment, tol).empty();
  }

  /// Throws std::invalid_argument when a term references an unknown variable,
  /// a coefficient is not finite, or names are missing.
  void validate() const;

  bool operator==(const LinearProgram&) const = default;
};

/// CPLEX-style LP text: Minimize / Subject To / Binaries / End.
/// Auxiliary flags travel in `\ auxiliary:` comment lines, which external
/// readers ignore.
std::string export_program(const LinearProgram& lp);
LinearProgram parse_program(std::string_view text);

}  // namespace medge
