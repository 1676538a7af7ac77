#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gm3/model.hpp"
#include "gm3/sim.hpp"

namespace gm3 {

/// Discretized steady system on a grid with unknowns interleaved as
/// (u_0, v_0, w_0, u_1, ...). Each equation is divided by the magnitude
/// of its constant diagonal part, 2 D/h^2 + decay, so residuals are O(1)
/// relative to the discrete operator.
class SteadySystem {
public:
  SteadySystem(const ModelParams& p, const Grid1D& grid);

  Eigen::Index unknowns() const { return 3 * n_; }
  const Grid1D& grid() const { return grid_; }
  const ModelParams& params() const { return p_; }
  void set_Dv(double Dv) { p_.Dv = Dv; }

  static Eigen::VectorXd pack(const FieldTriple& f);
  FieldTriple unpack(const Eigen::VectorXd& X) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& X) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& X) const;
  /// Per-equation divisors used by residual().
  Eigen::VectorXd row_scale() const;
  /// d(residual)/d(Dv).
  Eigen::VectorXd dDv(const Eigen::VectorXd& X) const;

private:
  ModelParams p_;
  Grid1D grid_;
  Eigen::Index n_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Damped Newton on the steady system from initial. Throws NewtonDiverged
/// with the residual history.
FieldTriple steady_newton(const FieldTriple& initial, const ModelParams& p, const Grid1D& grid,
                          const NewtonOptions& options = {}, NewtonReport* report = nullptr);

struct BranchPoint {
  double Dv = 0.0;
  double mu = 0.0;  // u at the far end of the grid
  double v0 = 0.0;  // v at the near end times sqrt(delta1)
  FieldTriple state;
  double arclength = 0.0;
  bool fold = false;
  double stability_hint = 0.0;
  double residual = 0.0;
};

struct ContinuationOptions {
  DomainMode domain = DomainMode::Half;
  Eigen::Index n = 2001;       // raised until h <= sqrt(delta1)/10
  double ds_min = 1e-4;
  double ds_max = 0.1;
  int max_points = 500;
  double fold_tol = 1e-6;
  double newton_tol = 1e-10;
  int corrector_iter = 10;
  std::optional<FieldTriple> initial;  // default: asymptotic spike at x = 0
};

struct Branch {
  std::vector<BranchPoint> points;
  bool truncated = false;  // StepFailure stopped the branch early
  std::string note;
};

/// Pseudo-arclength continuation in Dv from Dv_start toward Dv_target.
/// Folds are flagged where the Dv component of the tangent changes sign and
/// refined by bisection; the branch is followed around them and stops when
/// Dv leaves the interval between the two endpoints or max_points is hit.
Branch continue_branch(const ModelParams& p, double Dv_start, double Dv_target, double ds,
                       const ContinuationOptions& options = {});

}  // namespace gm3
