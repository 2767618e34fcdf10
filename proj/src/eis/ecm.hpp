#pragma once

// Wide-band Li-ion equivalent circuit model: series resistance, a
// high-frequency CPE, two Zarc (R ∥ CPE) branches and a Warburg element.
// Provides the complex impedance, analytic first and second parameter
// derivatives and derived arc geometry.

#include <Eigen/Core>
#include <array>
#include <complex>

namespace eis {

using Complex = std::complex<double>;

inline constexpr int kNumParams = 10;
using ParamVector = Eigen::Matrix<double, kNumParams, 1>;
using ParamMatrix = Eigen::Matrix<double, kNumParams, kNumParams>;
// Row 0: d Re(Z)/dθ, row 1: d Im(Z)/dθ.
using ModelJacobian = Eigen::Matrix<double, 2, kNumParams>;

// Canonical order: [R_s, Q_HF, phi_HF, R_1, Q_1, phi_1, R_2, Q_2, phi_2, Q_W].
struct EcmParams {
  double r_s = 0;
  double q_hf = 0;
  double phi_hf = 0;
  double r_1 = 0;
  double q_1 = 0;
  double phi_1 = 0;
  double r_2 = 0;
  double q_2 = 0;
  double phi_2 = 0;
  double q_w = 0;

  static EcmParams from_array(const double* v);
  static EcmParams from_vector(const ParamVector& v);
  void to_array(double* v) const;
  ParamVector vector() const;

  // Domain: resistances and CPE coefficients > 0, phi_hf in [-1,0),
  // phi_1 and phi_2 in (0,1].
  bool valid() const;
  void validate() const;  // throws DomainError

  static const std::array<const char*, kNumParams>& names();

  // Parameters of the bundled demo cell used by the default configs.
  static EcmParams demo_cell();
};

// Depressed-circle geometry of a Zarc branch in Nyquist (R, -X) coordinates.
struct ZarcDescriptor {
  double center_re = 0;      // real-axis coordinate of the circle center
  double center_negim = 0;   // (-X)-axis coordinate; <= 0 for phi in (0,1]
  double radius = 0;         // R / (2 sin(pi phi / 2))
  double tau = 0;            // (R Q)^(1/phi)
  double omega_c = 0;        // 1 / tau
};

// Individual elements. All require omega > 0 (DomainError otherwise).
Complex z_hf(double q_hf, double phi_hf, double omega);
Complex z_cpe(double q, double phi, double omega);
Complex z_warburg(double q_w, double omega);
Complex z_zarc(double r, double q, double phi, double omega);

// Equivalent impedance: R_s + Z_HF + Zarc_1 + Zarc_2 + Z_W.
Complex z_eq(const EcmParams& p, double omega);

ZarcDescriptor zarc_descriptor(double r, double q, double phi);

// dZ/dθ as a complex gradient in canonical parameter order.
std::array<Complex, kNumParams> z_eq_gradient(const EcmParams& p, double omega);
ModelJacobian z_eq_jacobian(const EcmParams& p, double omega);

// Analytic second derivatives; h_re(k,l) = d2 Re(Z) / dθ_k dθ_l and likewise
// h_im. Cross-element entries are identically zero.
void z_eq_hessian(const EcmParams& p, double omega, ParamMatrix& h_re,
                  ParamMatrix& h_im);

// Polar model functions rho(θ,ω) = |Z|, phi(θ,ω) = arg Z and their parameter
// derivatives, obtained from the Cartesian ones by the chain rule.
struct PolarJet {
  double rho = 0;
  double phi = 0;
  ParamVector d_rho;
  ParamVector d_phi;
};
PolarJet polar_jet(const EcmParams& p, double omega);

struct PolarHessians {
  double rho = 0;
  double phi = 0;
  ParamVector d_rho;
  ParamVector d_phi;
  ParamMatrix h_rho;
  ParamMatrix h_phi;
};
PolarHessians polar_hessians(const EcmParams& p, double omega);

}  // namespace eis
