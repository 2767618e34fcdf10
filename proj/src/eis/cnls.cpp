#include "eis/cnls.hpp"

#include <Eigen/Cholesky>
#include <cfloat>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "eis/linalg.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kDampingLimit = 1e12;

double wrap_angle(double d) { return std::remainder(d, 2.0 * kPi); }

// Lower Cholesky factor of a 2x2 covariance block.
struct Chol2 {
  double l11, l21, l22;
};

Chol2 cholesky2(const CovBlock2x2& q) {
  if (!(q.a > 0)) throw SingularWeightError("covariance block a <= 0");
  Chol2 c;
  c.l11 = std::sqrt(q.a);
  c.l21 = q.b / c.l11;
  const double rem = q.c - c.l21 * c.l21;
  if (!(rem > 0)) {
    throw SingularWeightError("covariance block not positive definite");
  }
  c.l22 = std::sqrt(rem);
  return c;
}

// Whitened residuals r and model Jacobian J so that the weighted SSE equals
// |r|^2 and a Gauss-Newton step solves (J^T J + damping) d = J^T r.
class Problem {
 public:
  Problem(const ImpedanceSpectrum& sp, Coordinates coords)
      : sp_(sp), coords_(coords) {
    if (sp.size() == 0) throw ArgumentError("empty spectrum");
    if (coords_ == Coordinates::cartesian) {
      chol_.reserve(sp.size());
      for (const auto& p : sp.points) chol_.push_back(cholesky2(p.cov_cartesian()));
    } else {
      for (const auto& p : sp.points) {
        if (!(p.sigma_rho > 0) || !(p.sigma_phi > 0)) {
          throw SingularWeightError("non-positive polar sigma in spectrum");
        }
      }
    }
  }

  int residual_count() const { return 2 * sp_.size(); }

  double cost(const EcmParams& theta) const {
    double acc = 0;
    for (int i = 0; i < sp_.size(); ++i) {
      const auto& p = sp_.points[i];
      if (coords_ == Coordinates::polar) {
        const Complex z = z_eq(theta, p.omega());
        const double er = (p.rho - std::abs(z)) / p.sigma_rho;
        const double ep = wrap_angle(p.phi - std::arg(z)) / p.sigma_phi;
        acc += er * er + ep * ep;
      } else {
        const Complex z = z_eq(theta, p.omega());
        const double e1 = p.re - z.real();
        const double e2 = p.im - z.imag();
        const auto& c = chol_[i];
        const double y1 = e1 / c.l11;
        const double y2 = (e2 - c.l21 * y1) / c.l22;
        acc += y1 * y1 + y2 * y2;
      }
    }
    return acc;
  }

  void residuals(const EcmParams& theta, Eigen::VectorXd& r,
                 Eigen::MatrixXd& j) const {
    r.resize(residual_count());
    j.resize(residual_count(), kNumParams);
    for (int i = 0; i < sp_.size(); ++i) {
      const auto& p = sp_.points[i];
      if (coords_ == Coordinates::polar) {
        const PolarJet jet = polar_jet(theta, p.omega());
        const double wr = 1.0 / p.sigma_rho;
        const double wp = 1.0 / p.sigma_phi;
        r(2 * i) = (p.rho - jet.rho) * wr;
        r(2 * i + 1) = wrap_angle(p.phi - jet.phi) * wp;
        j.row(2 * i) = (jet.d_rho * wr).transpose();
        j.row(2 * i + 1) = (jet.d_phi * wp).transpose();
      } else {
        const Complex z = z_eq(theta, p.omega());
        const ModelJacobian mj = z_eq_jacobian(theta, p.omega());
        const auto& c = chol_[i];
        const double e1 = p.re - z.real();
        const double e2 = p.im - z.imag();
        const double y1 = e1 / c.l11;
        r(2 * i) = y1;
        r(2 * i + 1) = (e2 - c.l21 * y1) / c.l22;
        for (int k = 0; k < kNumParams; ++k) {
          const double j1 = mj(0, k) / c.l11;
          j(2 * i, k) = j1;
          j(2 * i + 1, k) = (mj(1, k) - c.l21 * j1) / c.l22;
        }
      }
    }
  }

 private:
  const ImpedanceSpectrum& sp_;
  Coordinates coords_;
  std::vector<Chol2> chol_;
};

}  // namespace

const char* to_string(Coordinates c) {
  return c == Coordinates::polar ? "polar" : "cartesian";
}

Coordinates coordinates_from_string(const std::string& s) {
  if (s == "polar") return Coordinates::polar;
  if (s == "cartesian") return Coordinates::cartesian;
  throw ArgumentError("unknown coordinates '" + s + "'");
}

double objective(const EcmParams& theta, const ImpedanceSpectrum& sp,
                 Coordinates coords) {
  return Problem(sp, coords).cost(theta);
}

FitResult fit(const ImpedanceSpectrum& sp, const EcmParams& theta0,
              const FitConfig& config) {
  theta0.validate();
  const Problem problem(sp, config.coordinates);

  ParamVector x = theta0.vector();
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  problem.residuals(theta0, r, j);
  double cost = r.squaredNorm();

  FitResult out;
  out.cost_trace.push_back(cost);
  double lambda = config.damping_init;
  bool failed = false;

  int it = 0;
  while (it < config.max_iters && !out.converged && !failed) {
    ++it;
    const ParamVector g = j.transpose() * r;
    double gscaled = 0;
    for (int k = 0; k < kNumParams; ++k) {
      gscaled = std::max(gscaled, std::abs(g(k)) * std::max(std::abs(x(k)), 1e-12));
    }
    if (gscaled <= config.gradient_tol * std::max(1.0, cost)) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }

    const ParamMatrix h = j.transpose() * j;
    ParamVector d = h.diagonal();
    for (int k = 0; k < kNumParams; ++k) d(k) = std::max(d(k), 1e-300);

    bool stepped = false;
    while (!stepped && !failed) {
      const ParamMatrix a = h + lambda * ParamMatrix(d.asDiagonal());
      Eigen::LDLT<ParamMatrix> ldlt(a);
      ParamVector step = ldlt.solve(g);
      const bool solved = ldlt.info() == Eigen::Success && step.allFinite();
      EcmParams trial;
      double trial_cost = std::numeric_limits<double>::infinity();
      bool usable = false;
      if (solved) {
        trial = EcmParams::from_vector(x + step);
        // Trial steps leaving the parameter domain are rejected and the
        // damping increased; the iterate itself always stays feasible.
        if (trial.valid()) {
          trial_cost = problem.cost(trial);
          usable = std::isfinite(trial_cost) && trial_cost < cost;
        }
      }
      double step_rel = 0;
      if (solved) {
        for (int k = 0; k < kNumParams; ++k) {
          step_rel = std::max(
              step_rel, std::abs(step(k)) / std::max(std::abs(x(k)), 1e-300));
        }
      }
      if (!usable) {
        // A rejected step this small means the quadratic model cannot
        // improve the cost at this precision: the iterate has converged.
        if (solved && trial.valid() && std::isfinite(trial_cost) &&
            (step_rel < config.step_tol ||
             std::abs(trial_cost - cost) <= config.cost_tol * cost)) {
          out.converged = true;
          out.message = "no further decrease at numerical precision";
          break;
        }
        lambda *= solved ? 4.0 : 10.0;
        if (lambda > kDampingLimit) {
          failed = true;
          out.message = "singular normal equations: damping limit exceeded";
        }
        continue;
      }
      const double rel_dec = (cost - trial_cost) / std::max(cost, DBL_MIN);
      x = x + step;
      problem.residuals(trial, r, j);
      cost = trial_cost;
      out.cost_trace.push_back(cost);
      lambda = std::max(lambda / 3.0, 1e-14);
      stepped = true;
      if (cost <= 0.0 || rel_dec < config.cost_tol) {
        out.converged = true;
        out.message = "cost decrease below tolerance";
      } else if (step_rel < config.step_tol) {
        out.converged = true;
        out.message = "step below tolerance";
      }
    }
  }
  if (!out.converged && !failed) out.message = "max iterations reached";

  out.theta_hat = EcmParams::from_vector(x);
  out.cost = cost;
  out.iterations = it;
  accuracy_matrix(out.theta_hat, sp, config.coordinates, out.accuracy_matrix,
                  out.param_variances, out.accuracy_pd);
  return out;
}

void accuracy_matrix(const EcmParams& theta_hat, const ImpedanceSpectrum& sp,
                     Coordinates coords, ParamMatrix& a, ParamVector& var,
                     bool& pd) {
  ParamMatrix gn = ParamMatrix::Zero();
  ParamMatrix second = ParamMatrix::Zero();
  for (const auto& p : sp.points) {
    if (coords == Coordinates::polar) {
      const PolarHessians ph = polar_hessians(theta_hat, p.omega());
      const double vr = p.sigma_rho * p.sigma_rho;
      const double vp = p.sigma_phi * p.sigma_phi;
      gn += ph.d_rho * ph.d_rho.transpose() / vr +
            ph.d_phi * ph.d_phi.transpose() / vp;
      const double w0 = (p.rho - ph.rho) / vr;
      const double w1 = wrap_angle(p.phi - ph.phi) / vp;
      second += w0 * ph.h_rho + w1 * ph.h_phi;
    } else {
      const Complex z = z_eq(theta_hat, p.omega());
      const ModelJacobian mj = z_eq_jacobian(theta_hat, p.omega());
      const Eigen::Matrix2d qinv = p.cov_cartesian().matrix().inverse();
      gn += mj.transpose() * qinv * mj;
      ParamMatrix h_re, h_im;
      z_eq_hessian(theta_hat, p.omega(), h_re, h_im);
      const Eigen::Vector2d eps(p.re - z.real(), p.im - z.imag());
      const Eigen::Vector2d w = qinv * eps;
      second += w(0) * h_re + w(1) * h_im;
    }
  }
  a = gn - second;
  const SpdInverse inv_a = invert_spd(a);
  pd = inv_a.pd;
  if (pd) {
    var = inv_a.inverse.diagonal();
  } else {
    // Second term dominates; report the Gauss-Newton variances instead.
    var = invert_spd(gn).inverse.diagonal();
  }
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  double t[kNumParams];
  theta_hat.to_array(t);
  for (int i = 0; i < kNumParams; ++i) {
    j["theta_hat"][EcmParams::names()[i]] = t[i];
    j["param_variances"][EcmParams::names()[i]] = param_variances(i);
  }
  j["theta_hat_vector"] = std::vector<double>(t, t + kNumParams);
  j["cost"] = cost;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["accuracy_pd"] = accuracy_pd;
  j["message"] = message;
  for (int r = 0; r < kNumParams; ++r) {
    for (int c = 0; c < kNumParams; ++c) {
      j["accuracy_matrix"][r][c] = accuracy_matrix(r, c);
    }
  }
  return j.dump(2);
}

}  // namespace eis
