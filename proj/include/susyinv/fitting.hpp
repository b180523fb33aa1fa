#pragma once

// Fitting the two ways the poles can be determined from data:
//  - fit_erf: weighted linear least squares for the ERF coefficients,
//    iteratively reweighted by 1/Q^2 so the converged objective
//    approximates sum w (K_model - K_i)^2;
//  - fit_poles: damped least squares (Levenberg-Marquardt, forward-difference
//    Jacobian) on delta(k) = -sum arctan(k/kappa_j), with the l > 0 sum
//    rules enforced by a geometric penalty schedule.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "susyinv/erf.hpp"
#include "susyinv/kinematics.hpp"
#include "susyinv/poles.hpp"

namespace susyinv {

enum class WeightScheme { Uniform, BySigma, KVariancePropagated };
enum class InitGuess { Manual, CoarseGrid, FromErfExtraction };

struct FitConfig {
  int order_m = 3;
  int order_n = 2;
  int n_poles = 0;
  WeightScheme weighting = WeightScheme::KVariancePropagated;
  int max_iterations = 200;
  double param_tol = 1e-10;
  double penalty_initial = 1e3;
  int penalty_stages = 6;
  double penalty_factor = 10.0;
  InitGuess init = InitGuess::FromErfExtraction;
  std::vector<double> initial_poles;
  int multistart = 0;
  unsigned seed = 20230417;
  PhysicalConstants constants;
};

struct FitReport {
  std::vector<double> parameters;
  std::vector<double> residuals_deg;   // per kept data point
  std::vector<double> energies;        // E_lab of kept points
  double rms_deg = 0;
  std::vector<double> constraint_res;  // sum-rule residuals (fit_poles, l>0)
  bool converged = false;
  int iterations = 0;
  double objective = 0;
  std::vector<std::string> warnings;
  std::optional<Eigen::MatrixXd> covariance;
};

namespace detail {

inline std::vector<double> base_weights(const PhaseShiftDataset& data,
                                        WeightScheme scheme, PartialWave l,
                                        const PhysicalConstants& c,
                                        bool k_space) {
  std::vector<double> w;
  w.reserve(data.points.size());
  for (const auto& pt : data.points) {
    double wi = 1.0;
    if (scheme != WeightScheme::Uniform && pt.has_sigma) {
      if (k_space && scheme == WeightScheme::KVariancePropagated) {
        const double k = k_from_elab(pt.e_lab, c);
        const double s = std::sin(pt.delta);
        const double sK =
            std::pow(k, 2 * l.l + 1) * pt.sigma / (s * s);  // |dK/ddelta| sigma
        wi = 1.0 / (sK * sK);
      } else {
        wi = 1.0 / (pt.sigma * pt.sigma);
      }
    }
    w.push_back(wi);
  }
  return w;
}

}  // namespace detail

inline std::pair<ErfModel, FitReport> fit_erf(const PhaseShiftDataset& data,
                                              const FitConfig& cfg) {
  data.validate();
  const int l = data.l.l;
  const int M = cfg.order_m, N = cfg.order_n;
  if (M < 0 || N < 0) throw DomainError("fit orders must be non-negative");

  FitReport rep;
  if (M - N != l + 1)
    rep.warnings.push_back(
        "order warning: M - N != l + 1, the fitted ERF cannot reproduce the "
        "high-energy phase behavior");

  // convert points to K space, excluding K-poles
  std::vector<double> ks, Ks, e_keep, d_keep;
  std::vector<double> w0_all = detail::base_weights(data, cfg.weighting, data.l,
                                                    cfg.constants, true);
  std::vector<double> w0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& pt = data.points[i];
    if (std::abs(std::sin(pt.delta)) < 1e-12) {
      std::ostringstream os;
      os << "excluded point at E_lab = " << pt.e_lab
         << " MeV: delta = 0 (mod pi), K undefined";
      rep.warnings.push_back(os.str());
      continue;
    }
    const double k = k_from_elab(pt.e_lab, cfg.constants);
    ks.push_back(k);
    Ks.push_back(K_from_delta(k, pt.delta, data.l));
    w0.push_back(w0_all[i]);
    e_keep.push_back(pt.e_lab);
    d_keep.push_back(pt.delta);
  }
  const int npt = static_cast<int>(ks.size());
  const int npar = M + 1 + N;
  if (npt < npar)
    throw DomainError("not enough usable data points for the requested orders");

  Eigen::VectorXd q = Eigen::VectorXd::Zero(N + 1);
  q(0) = 1.0;
  Eigen::VectorXd theta(npar);
  Eigen::MatrixXd A(npt, npar);
  Eigen::VectorXd b(npt);
  int it = 0;
  for (; it < std::max(cfg.max_iterations, 1); ++it) {
    for (int i = 0; i < npt; ++i) {
      const double x = ks[i] * ks[i];
      double Q = 0;
      for (int m = N; m >= 0; --m) Q = Q * x + q(m);
      double wi = w0[i];
      if (it > 0) wi /= Q * Q;
      const double sw = std::sqrt(wi);
      double xp = 1;
      for (int m = 0; m <= M; ++m) {
        A(i, m) = sw * xp;
        xp *= x;
      }
      xp = x;
      for (int j = 1; j <= N; ++j) {
        A(i, M + j) = -sw * Ks[i] * xp;
        xp *= x;
      }
      b(i) = sw * Ks[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < npar)
      throw NumericError(
          "ill-conditioned ERF fit: normal system rank-deficient, try lower "
          "orders");
    Eigen::VectorXd theta_new = qr.solve(b);
    const double step = it == 0 ? 1.0 : (theta_new - theta).norm() /
                                            (1.0 + theta_new.norm());
    theta = theta_new;
    for (int j = 1; j <= N; ++j) q(j) = theta(M + j);
    if (N == 0 || (it > 0 && step < cfg.param_tol)) {
      rep.converged = true;
      ++it;
      break;
    }
  }
  rep.iterations = it;
  if (N == 0) rep.converged = true;

  ErfModel model;
  model.l = data.l;
  model.p.assign(theta.data(), theta.data() + M + 1);
  model.q.resize(N + 1);
  model.q[0] = 1.0;
  for (int j = 1; j <= N; ++j) model.q[j] = theta(M + j);
  model.kind = N == 0 ? ErfKind::Taylor : ErfKind::Pade;
  model.validate();

  rep.parameters.assign(model.p.begin(), model.p.end());
  rep.parameters.insert(rep.parameters.end(), model.q.begin() + 1, model.q.end());
  rep.energies = e_keep;

  // residuals back in phase-shift degrees on the kept points
  auto deltas = delta_from_model(model, ks);
  double ss = 0, obj = 0;
  for (int i = 0; i < npt; ++i) {
    // compare against the data branch mod pi
    const double ddata = d_keep[i];
    double dd = deltas[i] + M_PI * std::round((ddata - deltas[i]) / M_PI);
    const double res = (dd - ddata) * 180.0 / M_PI;
    rep.residuals_deg.push_back(res);
    ss += res * res;
    const double x = ks[i] * ks[i];
    const double km = model.eval(x);
    obj += w0[i] * (km - Ks[i]) * (km - Ks[i]);
  }
  rep.rms_deg = std::sqrt(ss / npt);
  rep.objective = obj;
  return {model, rep};
}

namespace detail {

struct LmProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  int n_res = 0;
};

// Damped least squares with forward-difference Jacobian.  Accepted steps
// never increase the objective; convergence = relative step below tol.
inline bool levenberg_marquardt(const LmProblem& prob, Eigen::VectorXd& x,
                                int max_iter, double tol, int& iters,
                                double& objective) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd r = prob.residuals(x);
  double f = r.squaredNorm();
  double lambda = -1;
  bool converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::MatrixXd J(prob.n_res, n);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-7 * (1.0 + std::abs(x(j)));
      Eigen::VectorXd xp = x;
      xp(j) += h;
      J.col(j) = (prob.residuals(xp) - r) / h;
    }
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    if (lambda < 0) lambda = 1e-3 * JtJ.diagonal().maxCoeff();
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd Aug = JtJ;
      Aug.diagonal().array() += lambda;
      Eigen::VectorXd step = Aug.ldlt().solve(-g);
      Eigen::VectorXd xn = x + step;
      Eigen::VectorXd rn = prob.residuals(xn);
      const double fn = rn.squaredNorm();
      if (fn <= f && std::isfinite(fn)) {
        const double rel_step = step.norm() / (1.0 + x.norm());
        x = xn;
        r = rn;
        f = fn;
        lambda = std::max(lambda / 3.0, 1e-14 * JtJ.diagonal().maxCoeff());
        accepted = true;
        if (rel_step < tol) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16 * (1.0 + JtJ.diagonal().maxCoeff())) break;
    }
    if (!accepted || converged) {
      if (!accepted) converged = f == 0.0 || it > 0;
      ++it;
      break;
    }
  }
  iters = it;
  objective = f;
  return converged;
}

}  // namespace detail

inline std::pair<PoleSet, FitReport> fit_poles(const PhaseShiftDataset& data,
                                               int n_poles,
                                               const FitConfig& cfg) {
  data.validate();
  if (n_poles < 1) throw DomainError("fit_poles requires n >= 1");
  if (data.points.empty()) throw DomainError("fit_poles requires data");
  const int l = data.l.l;

  std::vector<double> ks, ds;
  for (const auto& pt : data.points) {
    ks.push_back(k_from_elab(pt.e_lab, cfg.constants));
    ds.push_back(pt.delta);
  }
  std::vector<double> w = detail::base_weights(data, cfg.weighting, data.l,
                                               cfg.constants, false);
  const int npt = static_cast<int>(ks.size());

  // initial guess
  Eigen::VectorXd x(n_poles);
  if (cfg.init == InitGuess::Manual ||
      (!cfg.initial_poles.empty() &&
       static_cast<int>(cfg.initial_poles.size()) == n_poles)) {
    if (static_cast<int>(cfg.initial_poles.size()) != n_poles)
      throw DomainError("manual initial guess requires n_poles values");
    for (int j = 0; j < n_poles; ++j) x(j) = cfg.initial_poles[j];
  } else if (cfg.init == InitGuess::FromErfExtraction) {
    FitConfig ecfg = cfg;
    ecfg.order_n = std::max(0, (n_poles - 2 * l - 1) / 2);
    ecfg.order_m = ecfg.order_n + l + 1;
    if (std::max(2 * ecfg.order_m, 2 * ecfg.order_n + 2 * l + 1) != n_poles)
      ecfg.order_m = (n_poles + 1) / 2;  // fall back to a Taylor-ish seed
    auto [model, erep] = fit_erf(data, ecfg);
    auto ext = extract_poles(model);
    if (static_cast<int>(ext.real_poles.size()) >= n_poles) {
      for (int j = 0; j < n_poles; ++j) x(j) = ext.real_poles[j];
    } else {
      for (int j = 0; j < n_poles; ++j)
        x(j) = (j < static_cast<int>(ext.real_poles.size()))
                   ? ext.real_poles[j]
                   : 0.5 * (j + 1);
    }
  } else {  // CoarseGrid
    for (int j = 0; j < n_poles; ++j)
      x(j) = (j % 2 == 0 ? 1.0 : -1.0) * 0.3 * (1 + j);
  }

  const int n_con = l;  // alpha = 1, 3, ..., 2l-1
  FitReport rep;
  double mu = cfg.penalty_initial;
  const int stages = (l > 0) ? std::max(cfg.penalty_stages, 1) : 1;

  std::mt19937 rng(cfg.seed);
  auto make_problem = [&](double mu_c) {
    detail::LmProblem prob;
    prob.n_res = npt + (l > 0 ? n_con : 0);
    prob.residuals = [&, mu_c](const Eigen::VectorXd& kap) {
      Eigen::VectorXd r(npt + (l > 0 ? n_con : 0));
      for (int i = 0; i < npt; ++i) {
        double d = 0;
        for (int j = 0; j < kap.size(); ++j) {
          const double kj = std::abs(kap(j)) < 1e-8
                                ? (kap(j) < 0 ? -1e-8 : 1e-8)  // barrier
                                : kap(j);
          d -= std::atan(ks[i] / kj);
        }
        r(i) = std::sqrt(w[i]) * (d - ds[i]);
      }
      for (int c = 0; c < (l > 0 ? n_con : 0); ++c) {
        const int alpha = 2 * c + 1;
        long double s = 0;
        for (int j = 0; j < kap.size(); ++j)
          s += std::pow(1.0L / static_cast<long double>(kap(j)), alpha);
        r(npt + c) = std::sqrt(mu_c) * static_cast<double>(s);
      }
      return r;
    };
    return prob;
  };

  bool converged = false;
  int total_iters = 0;
  double objective = 0;
  for (int attempt = 0; attempt <= std::max(cfg.multistart, 0); ++attempt) {
    Eigen::VectorXd xs = x;
    if (attempt > 0) {
      std::normal_distribution<double> pert(0.0, 0.1);
      for (int j = 0; j < n_poles; ++j) xs(j) = x(j) * (1.0 + pert(rng));
    }
    bool ok = true;
    mu = cfg.penalty_initial;
    int iters_acc = 0;
    for (int s = 0; s < stages; ++s) {
      auto prob = make_problem(l > 0 ? mu : 0.0);
      int iters = 0;
      double obj = 0;
      ok = detail::levenberg_marquardt(prob, xs, cfg.max_iterations,
                                       cfg.param_tol, iters, obj) ||
           s + 1 < stages;
      iters_acc += iters;
      objective = obj;
      mu *= cfg.penalty_factor;
    }
    total_iters = iters_acc;
    if (ok) {
      x = xs;
      converged = true;
      break;
    }
    if (attempt == std::max(cfg.multistart, 0)) x = xs;
  }

  for (int j = 0; j < n_poles; ++j)
    if (x(j) == 0.0) throw NumericError("pole collapsed to zero during fit");

  PoleSet out(data.l, std::vector<double>(x.data(), x.data() + n_poles),
              PoleProvenance::DirectFit);
  rep.converged = converged;
  rep.iterations = total_iters;
  rep.objective = objective;
  rep.parameters = out.kappas;
  rep.energies.clear();

  // residuals and constraint report
  double ss = 0;
  for (int i = 0; i < npt; ++i) {
    const double d = delta_from_poles(out, ks[i]);
    const double res = (d - ds[i]) * 180.0 / M_PI;
    rep.residuals_deg.push_back(res);
    rep.energies.push_back(data.points[i].e_lab);
    ss += res * res;
  }
  rep.rms_deg = std::sqrt(ss / npt);
  if (l > 0) {
    rep.constraint_res = sum_rule_residuals(out);
    for (double cres : rep.constraint_res)
      if (std::abs(cres) > 1e-6) {
        rep.converged = false;
        rep.warnings.push_back(
            "sum-rule constraint residual above 1e-6 after penalty schedule");
        break;
      }
  }
  return {out, rep};
}

}  // namespace susyinv
