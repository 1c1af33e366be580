#include "wsindy/trial_library.hpp"

#include "wsindy/error.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace wsindy {

int TermSpec::degree() const {
  if (kind != Kind::monomial) return 0;
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

double TermSpec::eval(std::span<const double> x) const {
  switch (kind) {
    case Kind::monomial: {
      double v = 1.0;
      for (std::size_t i = 0; i < exponents.size(); ++i)
        for (int e = 0; e < exponents[i]; ++e) v *= x[i];
      return v;
    }
    case Kind::sine:
      return std::sin(n * x[static_cast<std::size_t>(d)]);
    case Kind::cosine:
      return std::cos(n * x[static_cast<std::size_t>(d)]);
  }
  return 0.0;
}

std::string TermSpec::label() const {
  if (kind != Kind::monomial) {
    std::string f = kind == Kind::sine ? "sin(" : "cos(";
    if (n != 1) f += std::to_string(n) + " ";
    return f + "x" + std::to_string(d + 1) + ")";
  }
  std::string out;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    if (!out.empty()) out += " ";
    out += "x" + std::to_string(i + 1);
    if (exponents[i] > 1) out += "^" + std::to_string(exponents[i]);
  }
  return out.empty() ? "1" : out;
}

TrialLibrary::TrialLibrary(int dim, std::vector<TermSpec> terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim_ < 1) throw InvalidArgument("library dimension must be >= 1");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (t.kind == TermSpec::Kind::monomial) {
      if (static_cast<int>(t.exponents.size()) != dim_) throw InvalidArgument("monomial exponent length != dimension");
      for (int e : t.exponents)
        if (e < 0) throw InvalidArgument("monomial exponents must be non-negative");
    } else if (t.d < 0 || t.d >= dim_ || t.n < 1) {
      throw InvalidArgument("trig term has invalid coordinate or frequency");
    }
    for (std::size_t k = 0; k < i; ++k)
      if (terms_[k] == t) throw InvalidArgument("duplicate library term " + t.label());
  }
}

TrialLibrary TrialLibrary::polynomial(int dim, int max_degree, bool include_trig) {
  if (dim < 1) throw InvalidArgument("library dimension must be >= 1");
  if (max_degree < 0) throw InvalidArgument("max_degree must be >= 0");
  std::vector<TermSpec> terms;
  std::vector<int> exps(static_cast<std::size_t>(dim), 0);
  // Within one total degree, emit exponent vectors in decreasing
  // lexicographic order: x1^2, x1 x2, x2^2, ...
  std::function<void(int, int)> fill = [&](int pos, int remaining) {
    if (pos == dim - 1) {
      exps[static_cast<std::size_t>(pos)] = remaining;
      terms.push_back(TermSpec::monomial(exps));
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      exps[static_cast<std::size_t>(pos)] = e;
      fill(pos + 1, remaining - e);
    }
  };
  for (int deg = 0; deg <= max_degree; ++deg) fill(0, deg);
  if (include_trig) {
    for (auto kind : {TermSpec::Kind::sine, TermSpec::Kind::cosine})
      for (int n = 1; n <= 2; ++n)
        for (int d = 0; d < dim; ++d) terms.push_back({kind, {}, n, d});
  }
  return TrialLibrary(dim, std::move(terms));
}

int TrialLibrary::index_of(const TermSpec& term) const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i] == term) return static_cast<int>(i);
  return -1;
}

void TrialLibrary::evaluate_row(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < terms_.size(); ++j) out[j] = terms_[j].eval(x);
}

Eigen::MatrixXd TrialLibrary::evaluate(const Eigen::MatrixXd& y) const {
  if (y.cols() != dim_) throw InvalidArgument("data has " + std::to_string(y.cols()) + " columns, library expects " + std::to_string(dim_));
  if (!y.allFinite()) throw InvalidArgument("data contains non-finite values");
  const Eigen::Index rows = y.rows();
  const int max_deg = [&] {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.degree());
    return m;
  }();
  Eigen::MatrixXd theta(rows, size());
  // Column-wise power tables make monomials one product per factor.
  std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(dim_));
  for (int d = 0; d < dim_; ++d) {
    auto& pw = powers[static_cast<std::size_t>(d)];
    pw.resize(rows, max_deg + 1);
    pw.col(0).setOnes();
    for (int e = 1; e <= max_deg; ++e) pw.col(e) = pw.col(e - 1).cwiseProduct(y.col(d));
  }
  for (int j = 0; j < size(); ++j) {
    const auto& t = terms_[static_cast<std::size_t>(j)];
    auto col = theta.col(j);
    switch (t.kind) {
      case TermSpec::Kind::monomial:
        col.setOnes();
        for (int d = 0; d < dim_; ++d) {
          const int e = t.exponents[static_cast<std::size_t>(d)];
          if (e > 0) col.array() *= powers[static_cast<std::size_t>(d)].col(e).array();
        }
        break;
      case TermSpec::Kind::sine:
        col = (static_cast<double>(t.n) * y.col(t.d)).array().sin().matrix();
        break;
      case TermSpec::Kind::cosine:
        col = (static_cast<double>(t.n) * y.col(t.d)).array().cos().matrix();
        break;
    }
  }
  return theta;
}

nlohmann::json TrialLibrary::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms_) {
    nlohmann::json j;
    switch (t.kind) {
      case TermSpec::Kind::monomial:
        j["kind"] = "monomial";
        j["exponents"] = t.exponents;
        break;
      case TermSpec::Kind::sine:
      case TermSpec::Kind::cosine:
        j["kind"] = t.kind == TermSpec::Kind::sine ? "sine" : "cosine";
        j["n"] = t.n;
        j["d"] = t.d;
        break;
    }
    j["label"] = t.label();
    arr.push_back(j);
  }
  return {{"dim", dim_}, {"terms", arr}};
}

TrialLibrary TrialLibrary::from_json(const nlohmann::json& j) {
  std::vector<TermSpec> terms;
  for (const auto& jt : j.at("terms")) {
    const auto kind = jt.at("kind").get<std::string>();
    if (kind == "monomial")
      terms.push_back(TermSpec::monomial(jt.at("exponents").get<std::vector<int>>()));
    else if (kind == "sine")
      terms.push_back(TermSpec::sine(jt.at("n").get<int>(), jt.at("d").get<int>()));
    else if (kind == "cosine")
      terms.push_back(TermSpec::cosine(jt.at("n").get<int>(), jt.at("d").get<int>()));
    else
      throw InvalidArgument("unknown term kind '" + kind + "'");
  }
  return TrialLibrary(j.at("dim").get<int>(), std::move(terms));
}

int library_size(int dim, int max_degree, bool include_trig) {
  // C(max_degree + dim, dim)
  long long c = 1;
  for (int i = 1; i <= dim; ++i) c = c * (max_degree + i) / i;
  return static_cast<int>(c) + (include_trig ? 4 * dim : 0);
}

}  // namespace wsindy
