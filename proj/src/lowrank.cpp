#include "umfloc/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "umfloc/error.hpp"

namespace umfloc {

void CompletionConfig::validate() const {
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::Config, "completion: epsilon must be >= 0");
  require(max_rank >= 1, ErrorKind::Config, "completion: rank cap must be >= 1");
  require(max_iterations >= 1, ErrorKind::Config, "completion: max_iterations must be >= 1");
  require(tolerance > 0.0, ErrorKind::Config, "completion: tolerance must be positive");
  require(residual_slack >= 0.0, ErrorKind::Config, "completion: residual slack must be >= 0");
}

void fix_signs(Eigen::MatrixXd& U, Eigen::MatrixXd& V) {
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    Eigen::Index idx = 0;
    U.col(k).cwiseAbs().maxCoeff(&idx);
    if (U(idx, k) < 0.0) {
      U.col(k) = -U.col(k);
      if (k < V.cols()) V.col(k) = -V.col(k);
    }
  }
  U = U.unaryExpr([](double x) { return std::abs(x) < 1e-10 ? 0.0 : x; });
  V = V.unaryExpr([](double x) { return std::abs(x) < 1e-10 ? 0.0 : x; });
}

SvdResult truncated_svd(const Eigen::MatrixXd& X, int rank) {
  require(rank >= 1, ErrorKind::Config, "svd: rank must be >= 1");
  require(X.size() > 0, ErrorKind::Dimension, "svd: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = std::min<Eigen::Index>(rank, svd.singularValues().size());
  SvdResult out{svd.singularValues().head(r), svd.matrixU().leftCols(r), svd.matrixV().leftCols(r)};
  fix_signs(out.U, out.V);
  return out;
}

namespace {

// Rank-capped soft-impute. Each step refreshes a q-dimensional right subspace
// of Z = P(H) + P_perp(X) by one warm-started block power iteration, so the
// cost per step is O(N^2 q) instead of a full SVD.
class SoftImpute {
 public:
  SoftImpute(const Eigen::MatrixXd& PH, const Eigen::MatrixXd& W, int rank, const Eigen::MatrixXd& V0)
      : PH_(PH), Wc_(1.0 - W.array()), rank_(rank), V_(V0) {
    X_ = Eigen::MatrixXd::Zero(PH.rows(), PH.cols());
    W_ = W;
  }

  // Returns the number of steps taken; `settled` reports whether the relative
  // change dropped below tol before the budget ran out.
  int solve(double lambda, int budget, double tol, bool& settled) {
    settled = false;
    momentum_ = 1.0;
    X_prev_ = X_;
    double f = objective(X_, d_, lambda);
    int it = 0;
    while (it < budget) {
      ++it;
      const double change = step(lambda, f);
      last_change_ = change;
      if (change < tol) {
        settled = true;
        break;
      }
    }
    return it;
  }

  double last_change() const { return last_change_; }
  double residual() const { return (W_.array() * (X_ - PH_).array()).matrix().norm(); }
  const Eigen::MatrixXd& X() const { return X_; }

  void factors(Eigen::VectorXd& values, Eigen::MatrixXd& U, Eigen::MatrixXd& V) const {
    Eigen::Index keep = 0;
    while (keep < d_.size() && d_(keep) > 0.0) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    values = d_.head(keep);
    U = U_.leftCols(keep);
    V = V_.leftCols(keep);
  }

 private:
  double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, double lambda) const {
    const double r = (W_.array() * (X - PH_).array()).matrix().squaredNorm();
    return 0.5 * r + lambda * d.sum();
  }

  // Proximal step from Y; fills next/dn.
  void prox(const Eigen::MatrixXd& Y, double lambda, Eigen::MatrixXd& next, Eigen::VectorXd& dn) {
    const Eigen::MatrixXd Z = PH_ + (Wc_ * Y.array()).matrix();
    const Eigen::Index q = V_.cols();
    Eigen::MatrixXd P = Z * V_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(P);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(Z.rows(), q);
    const Eigen::MatrixXd B = Q.transpose() * Z;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_ = Q * svd.matrixU();
    V_ = svd.matrixV();
    const Eigen::Index r = std::min<Eigen::Index>(rank_, svd.singularValues().size());
    dn = (svd.singularValues().head(r).array() - lambda).max(0.0);
    next = U_.leftCols(r) * dn.asDiagonal() * V_.leftCols(r).transpose();
  }

  // Accelerated step with adaptive restart on objective increase.
  double step(double lambda, double& f) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_ * momentum_));
    const double beta = (momentum_ - 1.0) / t_next;
    Eigen::MatrixXd next;
    Eigen::VectorXd dn;
    prox(beta > 0.0 ? Eigen::MatrixXd(X_ + beta * (X_ - X_prev_)) : X_, lambda, next, dn);
    double fn = objective(next, dn, lambda);
    momentum_ = t_next;
    if (beta > 0.0 && fn > f) {
      momentum_ = 1.0;
      prox(X_, lambda, next, dn);
      fn = objective(next, dn, lambda);
    }
    const double scale = std::max(X_.norm(), 1e-300);
    const double change = (next - X_).norm() / scale;
    X_prev_.swap(X_);
    X_.swap(next);
    d_ = dn;
    f = fn;
    return X_.norm() == 0.0 && change == 0.0 ? 0.0 : change;
  }

  Eigen::MatrixXd PH_;
  Eigen::ArrayXXd Wc_;
  Eigen::MatrixXd W_;
  int rank_;
  Eigen::MatrixXd X_;
  Eigen::MatrixXd X_prev_;
  double momentum_ = 1.0;
  double last_change_ = 0.0;
  Eigen::MatrixXd U_;
  Eigen::MatrixXd V_;
  Eigen::VectorXd d_;
};

CompletedMatrix zero_completion(Eigen::Index rows, Eigen::Index cols, double residual) {
  CompletedMatrix out;
  out.X = Eigen::MatrixXd::Zero(rows, cols);
  out.values = Eigen::VectorXd::Zero(1);
  out.U = Eigen::MatrixXd::Zero(rows, 1);
  out.V = Eigen::MatrixXd::Zero(cols, 1);
  out.residual = residual;
  out.converged = true;
  return out;
}

// Soft threshold level at which sqrt(sum min(s_i, lambda)^2) == eps.
double threshold_for_residual(const Eigen::VectorXd& sigma, double eps) {
  std::vector<double> s(sigma.data(), sigma.data() + sigma.size());
  std::sort(s.begin(), s.end());
  const double target = eps * eps;
  double below = 0.0;
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double at_sk = below + static_cast<double>(n - k) * s[k] * s[k];
    if (at_sk >= target) return std::sqrt(std::max(0.0, (target - below) / static_cast<double>(n - k)));
    below += s[k] * s[k];
  }
  return s.empty() ? 0.0 : s.back();
}

CompletedMatrix complete_full(const Eigen::MatrixXd& H, double eps) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double lambda = threshold_for_residual(sigma, eps);
  Eigen::VectorXd d = (sigma.array() - lambda).max(0.0);
  Eigen::Index keep = 0;
  while (keep < d.size() && d(keep) > 0.0) ++keep;
  if (keep == 0) return zero_completion(H.rows(), H.cols(), H.norm());

  CompletedMatrix out;
  out.values = d.head(keep);
  out.U = svd.matrixU().leftCols(keep);
  out.V = svd.matrixV().leftCols(keep);
  out.X = out.U * out.values.asDiagonal() * out.V.transpose();
  fix_signs(out.U, out.V);
  out.residual = (out.X - H).norm();
  out.lambda = lambda;
  out.iterations = 1;
  out.converged = true;
  out.trace.push_back({1, lambda, out.residual});
  return out;
}

}  // namespace

CompletedMatrix complete(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const CompletionConfig& cfg) {
  cfg.validate();
  require(H.rows() == W.rows() && H.cols() == W.cols(), ErrorKind::Dimension, "completion: H and W differ in shape");
  require(H.size() > 0, ErrorKind::Dimension, "completion: empty matrix");
  require((W.array() > 0.5).any(), ErrorKind::Degenerate, "completion: no observed entries");

  const Eigen::MatrixXd mask = (W.array() > 0.5).cast<double>();
  const Eigen::MatrixXd PH = (mask.array() * H.array()).matrix();
  const double data_norm = PH.norm();
  const double eps = cfg.epsilon;

  if (data_norm <= eps || data_norm == 0.0) return zero_completion(H.rows(), H.cols(), data_norm);

  const bool full = (mask.array() > 0.5).all();
  if (full && eps == 0.0) {
    CompletedMatrix out;
    out.X = H;
    const SvdResult s = truncated_svd(H, static_cast<int>(std::min(H.rows(), H.cols())));
    out.values = s.values;
    out.U = s.U;
    out.V = s.V;
    out.residual = 0.0;
    out.iterations = 0;
    out.converged = true;
    return out;
  }
  if (full) return complete_full(H, eps);

  const Eigen::Index min_dim = std::min(H.rows(), H.cols());
  const int rank = static_cast<int>(std::min<Eigen::Index>(cfg.max_rank, min_dim));
  const Eigen::Index q = std::min<Eigen::Index>(rank + 2, min_dim);

  Eigen::BDCSVD<Eigen::MatrixXd> init(PH, Eigen::ComputeThinV);
  const double lambda_max = init.singularValues()(0);
  const double lambda_min = 1e-9 * lambda_max;
  SoftImpute solver(PH, mask, rank, init.matrixV().leftCols(q));

  const double upper = eps * (1.0 + cfg.residual_slack);
  const double lower = eps * (1.0 - cfg.residual_slack);

  CompletedMatrix out;
  bool settled = false;
  double residual = data_norm;
  double lambda = lambda_max;
  double infeasible_lambda = lambda_max;

  auto run = [&](double lam) {
    out.iterations += solver.solve(lam, cfg.max_iterations, cfg.tolerance, settled);
    residual = solver.residual();
    out.trace.push_back({out.iterations, lam, residual});
  };

  // Continuation from lambda_max downwards until the constraint is met.
  const double target = eps > 0.0 ? upper : 1e-8 * data_norm;
  while (true) {
    const double before = residual;
    lambda = std::max(lambda * 0.25, lambda_min);
    run(lambda);
    // Residual floor of the rank cap reached above the target.
    if (residual > target && residual > (1.0 - 1e-3) * before) break;
    if (eps > 0.0 && residual <= upper) break;
    if (eps == 0.0 && residual <= target) break;
    if (residual > upper) infeasible_lambda = lambda;
    if (lambda <= lambda_min) break;
  }

  // Bisection in log(lambda) until the residual is within the slack band.
  if (eps > 0.0 && residual < lower) {
    double lo = lambda;
    double hi = infeasible_lambda;
    for (int k = 0; k < 40 && hi / lo > 1.0 + 1e-9; ++k) {
      const double mid = std::sqrt(lo * hi);
      run(mid);
      lambda = mid;
      if (residual > upper) {
        hi = mid;
      } else if (residual < lower) {
        lo = mid;
      } else {
        break;
      }
    }
    if (residual > upper) {
      lambda = lo;
      run(lo);
    }
  }

  out.X = solver.X();
  solver.factors(out.values, out.U, out.V);
  fix_signs(out.U, out.V);
  out.residual = residual;
  out.lambda = lambda;
  out.converged = settled && residual <= upper + 1e-6 * data_norm;
  return out;
}

CompletedMatrix complete(const ObservationGrid& grid, const CompletionConfig& cfg) {
  return complete(grid.H, grid.W, cfg);
}

double choose_epsilon(double sigma_bar, std::size_t count, int size, double width, double alpha, double lipschitz) {
  require(sigma_bar >= 0.0 && width >= 0.0 && alpha >= 0.0 && lipschitz >= 0.0 && size >= 0, ErrorKind::Domain,
          "choose_epsilon: inputs must be non-negative");
  if (size == 0 || count == 0) return 0.0;
  const double n = static_cast<double>(size);
  const double spacing = width / n;
  const double ak = alpha * lipschitz;
  const double bar2 = spacing * spacing *
                      (ak * ak * spacing * spacing / 2.0 + std::sqrt(2.0) * ak * spacing * sigma_bar +
                       sigma_bar * sigma_bar);
  return std::sqrt(static_cast<double>(count)) * std::sqrt(bar2);
}

double estimate_lipschitz(const FieldModel& model, double step) {
  require(step > 0.0, ErrorKind::Domain, "lipschitz: step must be positive");
  const double reach = std::min(model.width(), model.support_radius());
  double best = 0.0;
  double prev = model.eval(0.0);
  for (double d = step; d <= reach + 1e-12; d += step) {
    const double cur = model.eval(d);
    best = std::max(best, std::abs(cur - prev) / step);
    prev = cur;
  }
  return best;
}

void write_residual_trace(const CompletedMatrix& completed, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "iteration,lambda,residual\n" << std::setprecision(17);
  for (const auto& p : completed.trace) out << p.iteration << ',' << p.lambda << ',' << p.residual << '\n';
}

}  // namespace umfloc
