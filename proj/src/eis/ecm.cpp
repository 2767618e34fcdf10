#include "eis/ecm.hpp"

#include <cmath>

#include "eis/errors.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// (j omega)^phi for omega > 0, computed in polar form: modulus omega^phi,
// angle phi*pi/2. Valid for any real phi (no branch-cut ambiguity).
Complex jw_pow(double omega, double phi) {
  return std::polar(std::pow(omega, phi), phi * kPi / 2.0);
}

Complex log_jw(double omega) { return Complex(std::log(omega), kPi / 2.0); }

void require_positive_omega(double omega) {
  if (!(omega > 0.0)) {
    throw DomainError("angular frequency must be > 0");
  }
}

// Indices in the canonical parameter order.
enum : int {
  kRs = 0,
  kQhf = 1,
  kPhiHf = 2,
  kR1 = 3,
  kQ1 = 4,
  kPhi1 = 5,
  kR2 = 6,
  kQ2 = 7,
  kPhi2 = 8,
  kQw = 9,
};

struct ZarcDerivs {
  Complex z;
  Complex d_r, d_q, d_phi;
  Complex d2_rr, d2_rq, d2_rphi, d2_qq, d2_qphi, d2_phiphi;
};

// Z = R / D with D = 1 + R Q u, u = (j omega)^phi. All derivatives follow
// from d u/d phi = u ln(j omega).
ZarcDerivs zarc_derivs(double r, double q, double phi, double omega) {
  const Complex u = jw_pow(omega, phi);
  const Complex el = log_jw(omega);
  const Complex d = 1.0 + r * q * u;
  const Complex d2 = d * d;
  const Complex d3 = d2 * d;
  ZarcDerivs out;
  out.z = r / d;
  out.d_r = 1.0 / d2;
  out.d_q = -r * r * u / d2;
  out.d_phi = -r * r * q * u * el / d2;
  out.d2_rr = -2.0 * q * u / d3;
  out.d2_rq = -2.0 * r * u / d3;
  out.d2_rphi = -2.0 * r * q * u * el / d3;
  out.d2_qq = 2.0 * r * r * r * u * u / d3;
  out.d2_qphi = -r * r * u * el * (1.0 - r * q * u) / d3;
  out.d2_phiphi = -r * r * q * u * el * el * (1.0 - r * q * u) / d3;
  return out;
}

}  // namespace

EcmParams EcmParams::from_array(const double* v) {
  EcmParams p;
  p.r_s = v[0];
  p.q_hf = v[1];
  p.phi_hf = v[2];
  p.r_1 = v[3];
  p.q_1 = v[4];
  p.phi_1 = v[5];
  p.r_2 = v[6];
  p.q_2 = v[7];
  p.phi_2 = v[8];
  p.q_w = v[9];
  return p;
}

EcmParams EcmParams::from_vector(const ParamVector& v) {
  return from_array(v.data());
}

void EcmParams::to_array(double* v) const {
  v[0] = r_s;
  v[1] = q_hf;
  v[2] = phi_hf;
  v[3] = r_1;
  v[4] = q_1;
  v[5] = phi_1;
  v[6] = r_2;
  v[7] = q_2;
  v[8] = phi_2;
  v[9] = q_w;
}

ParamVector EcmParams::vector() const {
  ParamVector v;
  to_array(v.data());
  return v;
}

bool EcmParams::valid() const {
  const bool positives = r_s > 0 && q_hf > 0 && r_1 > 0 && q_1 > 0 &&
                         r_2 > 0 && q_2 > 0 && q_w > 0;
  const bool exponents = phi_hf >= -1.0 && phi_hf < 0.0 && phi_1 > 0.0 &&
                         phi_1 <= 1.0 && phi_2 > 0.0 && phi_2 <= 1.0;
  bool finite = true;
  double a[kNumParams];
  to_array(a);
  for (double x : a) finite = finite && std::isfinite(x);
  return positives && exponents && finite;
}

void EcmParams::validate() const {
  if (!valid()) {
    throw DomainError(
        "ECM parameters outside domain (positivity or exponent ranges)");
  }
}

const std::array<const char*, kNumParams>& EcmParams::names() {
  static const std::array<const char*, kNumParams> kNames = {
      "R_s", "Q_HF", "phi_HF", "R_1", "Q_1",
      "phi_1", "R_2", "Q_2", "phi_2", "Q_W"};
  return kNames;
}

EcmParams EcmParams::demo_cell() {
  EcmParams p;
  p.r_s = 3.8e-2;
  p.q_hf = 1.667e4;
  p.phi_hf = -0.85;
  p.r_1 = 0.45;
  p.q_1 = 2.0e-2;
  p.phi_1 = 0.9;
  p.r_2 = 0.65;
  p.q_2 = 0.4;
  p.phi_2 = 0.9;
  p.q_w = 3.693;
  return p;
}

Complex z_hf(double q_hf, double phi_hf, double omega) {
  require_positive_omega(omega);
  return 1.0 / (jw_pow(omega, phi_hf) * q_hf);
}

Complex z_cpe(double q, double phi, double omega) {
  require_positive_omega(omega);
  return 1.0 / (jw_pow(omega, phi) * q);
}

Complex z_warburg(double q_w, double omega) {
  require_positive_omega(omega);
  // 1/(sqrt(j w) Q) with the real and negated imaginary part bit-identical,
  // pinning the phase at exactly -45 degrees.
  const double s = 1.0 / (q_w * std::sqrt(2.0 * omega));
  return {s, -s};
}

Complex z_zarc(double r, double q, double phi, double omega) {
  require_positive_omega(omega);
  return r / (1.0 + jw_pow(omega, phi) * r * q);
}

Complex z_eq(const EcmParams& p, double omega) {
  require_positive_omega(omega);
  return p.r_s + z_hf(p.q_hf, p.phi_hf, omega) +
         z_zarc(p.r_1, p.q_1, p.phi_1, omega) +
         z_zarc(p.r_2, p.q_2, p.phi_2, omega) + z_warburg(p.q_w, omega);
}

ZarcDescriptor zarc_descriptor(double r, double q, double phi) {
  ZarcDescriptor d;
  const double half_angle = kPi * phi / 2.0;
  d.center_re = r / 2.0;
  d.center_negim = -(r / 2.0) * std::cos(half_angle) / std::sin(half_angle);
  d.radius = r / (2.0 * std::sin(half_angle));
  d.tau = std::pow(r * q, 1.0 / phi);
  d.omega_c = 1.0 / d.tau;
  return d;
}

std::array<Complex, kNumParams> z_eq_gradient(const EcmParams& p,
                                              double omega) {
  require_positive_omega(omega);
  std::array<Complex, kNumParams> g;
  const Complex el = log_jw(omega);

  g[kRs] = 1.0;

  const Complex zhf = z_hf(p.q_hf, p.phi_hf, omega);
  g[kQhf] = -zhf / p.q_hf;
  g[kPhiHf] = -el * zhf;

  const ZarcDerivs a1 = zarc_derivs(p.r_1, p.q_1, p.phi_1, omega);
  g[kR1] = a1.d_r;
  g[kQ1] = a1.d_q;
  g[kPhi1] = a1.d_phi;

  const ZarcDerivs a2 = zarc_derivs(p.r_2, p.q_2, p.phi_2, omega);
  g[kR2] = a2.d_r;
  g[kQ2] = a2.d_q;
  g[kPhi2] = a2.d_phi;

  g[kQw] = -z_warburg(p.q_w, omega) / p.q_w;
  return g;
}

ModelJacobian z_eq_jacobian(const EcmParams& p, double omega) {
  const auto g = z_eq_gradient(p, omega);
  ModelJacobian j;
  for (int k = 0; k < kNumParams; ++k) {
    j(0, k) = g[k].real();
    j(1, k) = g[k].imag();
  }
  return j;
}

void z_eq_hessian(const EcmParams& p, double omega, ParamMatrix& h_re,
                  ParamMatrix& h_im) {
  require_positive_omega(omega);
  h_re.setZero();
  h_im.setZero();
  const auto put = [&](int k, int l, Complex v) {
    h_re(k, l) = v.real();
    h_re(l, k) = v.real();
    h_im(k, l) = v.imag();
    h_im(l, k) = v.imag();
  };
  const Complex el = log_jw(omega);

  const Complex zhf = z_hf(p.q_hf, p.phi_hf, omega);
  put(kQhf, kQhf, 2.0 * zhf / (p.q_hf * p.q_hf));
  put(kQhf, kPhiHf, el * zhf / p.q_hf);
  put(kPhiHf, kPhiHf, el * el * zhf);

  const ZarcDerivs a1 = zarc_derivs(p.r_1, p.q_1, p.phi_1, omega);
  put(kR1, kR1, a1.d2_rr);
  put(kR1, kQ1, a1.d2_rq);
  put(kR1, kPhi1, a1.d2_rphi);
  put(kQ1, kQ1, a1.d2_qq);
  put(kQ1, kPhi1, a1.d2_qphi);
  put(kPhi1, kPhi1, a1.d2_phiphi);

  const ZarcDerivs a2 = zarc_derivs(p.r_2, p.q_2, p.phi_2, omega);
  put(kR2, kR2, a2.d2_rr);
  put(kR2, kQ2, a2.d2_rq);
  put(kR2, kPhi2, a2.d2_rphi);
  put(kQ2, kQ2, a2.d2_qq);
  put(kQ2, kPhi2, a2.d2_qphi);
  put(kPhi2, kPhi2, a2.d2_phiphi);

  const Complex zw = z_warburg(p.q_w, omega);
  put(kQw, kQw, 2.0 * zw / (p.q_w * p.q_w));
}

PolarJet polar_jet(const EcmParams& p, double omega) {
  const Complex z = z_eq(p, omega);
  const auto g = z_eq_gradient(p, omega);
  const double re = z.real();
  const double im = z.imag();
  const double rho2 = re * re + im * im;
  const double rho = std::sqrt(rho2);
  PolarJet jet;
  jet.rho = rho;
  jet.phi = std::atan2(im, re);
  for (int k = 0; k < kNumParams; ++k) {
    const double dre = g[k].real();
    const double dim = g[k].imag();
    jet.d_rho(k) = (re * dre + im * dim) / rho;
    jet.d_phi(k) = (re * dim - im * dre) / rho2;
  }
  return jet;
}

PolarHessians polar_hessians(const EcmParams& p, double omega) {
  const Complex z = z_eq(p, omega);
  const auto g = z_eq_gradient(p, omega);
  ParamMatrix h_re, h_im;
  z_eq_hessian(p, omega, h_re, h_im);

  const double re = z.real();
  const double im = z.imag();
  const double rho2 = re * re + im * im;
  const double rho = std::sqrt(rho2);

  PolarHessians out;
  out.rho = rho;
  out.phi = std::atan2(im, re);
  ParamVector dre, dim;
  for (int k = 0; k < kNumParams; ++k) {
    dre(k) = g[k].real();
    dim(k) = g[k].imag();
    out.d_rho(k) = (re * dre(k) + im * dim(k)) / rho;
    out.d_phi(k) = (re * dim(k) - im * dre(k)) / rho2;
  }
  for (int k = 0; k < kNumParams; ++k) {
    for (int l = 0; l < kNumParams; ++l) {
      // rho * d2rho = dR_k dR_l + dX_k dX_l + R d2R + X d2X - drho_k drho_l
      out.h_rho(k, l) =
          (dre(k) * dre(l) + dim(k) * dim(l) + re * h_re(k, l) +
           im * h_im(k, l) - out.d_rho(k) * out.d_rho(l)) /
          rho;
      // d(dphi_k)/dθ_l with dphi_k = (R dX_k - X dR_k) / rho^2
      out.h_phi(k, l) =
          (dre(l) * dim(k) + re * h_im(k, l) - dim(l) * dre(k) -
           im * h_re(k, l)) /
              rho2 -
          2.0 * out.d_phi(k) * out.d_rho(l) / rho;
    }
  }
  // The phi Hessian is symmetric analytically; symmetrize to remove the
  // asymmetric rounding of the two equivalent evaluation orders.
  out.h_phi = ((out.h_phi + out.h_phi.transpose()) / 2.0).eval();
  out.h_rho = ((out.h_rho + out.h_rho.transpose()) / 2.0).eval();
  return out;
}

}  // namespace eis
