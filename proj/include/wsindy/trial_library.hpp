#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace wsindy {

struct TermSpec {
  enum class Kind { monomial, sine, cosine };

  Kind kind = Kind::monomial;
  std::vector<int> exponents;  // monomial only, length D
  int n = 0;                   // trig frequency
  int d = 0;                   // trig coordinate (0-based)

  static TermSpec monomial(std::vector<int> exps) { return {Kind::monomial, std::move(exps), 0, 0}; }
  static TermSpec sine(int n, int d) { return {Kind::sine, {}, n, d}; }
  static TermSpec cosine(int n, int d) { return {Kind::cosine, {}, n, d}; }

  int degree() const;
  double eval(std::span<const double> x) const;
  // "1", "x1", "x1^3 x2", "sin(2 x1)"
  std::string label() const;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

/// Ordered candidate dictionary. Columns of Theta(y) follow terms() order.
class TrialLibrary {
public:
  /// Throws InvalidArgument on duplicate terms, dimension mismatch, or
  /// negative exponents.
  TrialLibrary(int dim, std::vector<TermSpec> terms);

  /// Every monomial of total degree <= max_degree (constant included), in
  /// graded lexicographic order, followed by sin(n x_d) then cos(n x_d) for
  /// n = 1, 2 when include_trig is set.
  static TrialLibrary polynomial(int dim, int max_degree, bool include_trig = false);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(terms_.size()); }
  const std::vector<TermSpec>& terms() const noexcept { return terms_; }

  /// Column index of a term, or -1.
  int index_of(const TermSpec& term) const;

  /// Theta(y), M x J, evaluated row by row. Throws InvalidArgument on
  /// non-finite data or a column-count mismatch.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& y) const;

  /// One row of Theta at a single state.
  void evaluate_row(std::span<const double> x, std::span<double> out) const;

  nlohmann::json to_json() const;
  static TrialLibrary from_json(const nlohmann::json& j);

private:
  int dim_;
  std::vector<TermSpec> terms_;
};

/// Closed-form library size C(max_degree + D, D) (+ 4D with trig).
int library_size(int dim, int max_degree, bool include_trig);

}  // namespace wsindy
