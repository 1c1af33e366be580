#include "wsindy/pipeline.hpp"

namespace wsindy {

std::vector<TestFunction> build_basis(const TimeSeries& data, const TrialLibrary& lib, const GridConfig& grid,
                                      nlohmann::json* info, std::vector<std::string>* warnings) {
  nlohmann::json j;
  std::vector<TestFunction> basis;
  if (const auto* ug = std::get_if<UniformGridConfig>(&grid)) {
    auto ub = build_uniform_basis(data, *ug);
    j = {{"kind", "uniform"}, {"rho", ug->rho}, {"s", ug->s}, {"L", ub.L}, {"p", ub.p}, {"spacing", ub.spacing}};
    if (warnings) warnings->insert(warnings->end(), ub.warnings.begin(), ub.warnings.end());
    basis = std::move(ub.basis);
  } else if (const auto* sq = std::get_if<SquareGridConfig>(&grid)) {
    auto ub = basis_for_square_system(data, lib.size(), sq->p, sq->L_override);
    j = {{"kind", "square"}, {"L", ub.L}, {"p", ub.p}, {"spacing", ub.spacing}};
    if (warnings) warnings->insert(warnings->end(), ub.warnings.begin(), ub.warnings.end());
    basis = std::move(ub.basis);
  } else {
    const auto& ag = std::get<AdaptiveGridConfig>(grid);
    auto ab = build_adaptive_basis(data, ag);
    j = {{"kind", "adaptive"},
         {"K_requested", ag.K},
         {"r_whm", ag.r_whm},
         {"p_deriv", ag.p_deriv},
         {"s_deriv", ag.s_deriv},
         {"p_root", ab.shape.p_root},
         {"p", ab.shape.p},
         {"half_width_points", ab.shape.half_width}};
    if (static_cast<int>(ab.basis.size()) < ag.K && warnings)
      warnings->push_back("duplicate centres removed: K reduced from " + std::to_string(ag.K) + " to " +
                          std::to_string(ab.basis.size()));
    basis = std::move(ab.basis);
  }
  j["K"] = basis.size();
  if (info) *info = std::move(j);
  return basis;
}

Identification identify(const TimeSeries& data, const TrialLibrary& lib, const GridConfig& grid, const SolverConfig& solver) {
  solver.validate();
  data.validate();
  Identification out;
  const auto basis = build_basis(data, lib, grid, &out.grid, &out.warnings);
  out.system = assemble(basis, lib, data);
  const Whitener whitener = cholesky_whitener(out.system.Sigma);
  out.jitter = whitener.jitter;
  out.model = sequential_threshold(out.system, whitener, solver);
  if (!out.model.converged) out.warnings.push_back("sequential thresholding did not converge for every dimension");
  if (out.model.rank_deficient)
    out.warnings.push_back("final least-squares solve was numerically rank deficient; minimum-norm solution used");
  return out;
}

nlohmann::json Identification::report() const {
  nlohmann::json j;
  const Eigen::MatrixXd r = residual(system, model.w);
  const double bn = system.b.norm();
  j["system"] = system.diagnostics();
  j["grid"] = grid;
  j["residual_norm"] = r.norm();
  j["relative_residual"] = bn > 0.0 ? r.norm() / bn : 0.0;
  j["covariance_jitter"] = jitter;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["rank_deficient"] = model.rank_deficient;
  j["warnings"] = warnings;
  return j;
}

}  // namespace wsindy
