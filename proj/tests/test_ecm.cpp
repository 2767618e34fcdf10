#include <doctest.h>

#include <cmath>
#include <random>

#include "eis/ecm.hpp"
#include "eis/errors.hpp"
#include "support/oracles.hpp"

using namespace eis;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("hf element") {
  // phi = -1 reduces to an ideal inductor j*omega*L with L = 1/Q.
  CHECK(z_hf(1.0, -1.0, 1.0).real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(z_hf(1.0, -1.0, 1.0).imag() == doctest::Approx(1.0));
  CHECK(z_hf(2.0, -1.0, 3.0).imag() == doctest::Approx(1.5));

  // Polar-form oracle: modulus omega^{-phi}/Q, angle -phi*pi/2.
  const double q = 1.667e4, phi = -0.85, w = 2.0 * kPi * 1e4;
  const Complex z = z_hf(q, phi, w);
  const double rho = std::pow(w, 0.85) / q;
  CHECK(std::abs(z) == doctest::Approx(rho).epsilon(1e-12));
  CHECK(std::arg(z) == doctest::Approx(0.85 * kPi / 2.0).epsilon(1e-12));
  CHECK(z.imag() > 0);

  CHECK_THROWS_AS(z_hf(1.0, -0.5, 0.0), DomainError);
  CHECK_THROWS_AS(z_hf(1.0, -0.5, -1.0), DomainError);
}

TEST_CASE("cpe element") {
  CHECK(z_cpe(1.0, 1.0, 1.0).imag() == doctest::Approx(-1.0));
  CHECK(z_cpe(1.0, 1.0, 1.0).real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(z_cpe(1.0, 0.5, 0.5).real() == doctest::Approx(1.0));
  CHECK(z_cpe(1.0, 0.5, 0.5).imag() == doctest::Approx(-1.0));

  const Complex z = z_cpe(0.02, 0.9, 187.4);
  CHECK(std::abs(z) ==
        doctest::Approx(1.0 / (0.02 * std::pow(187.4, 0.9))).epsilon(1e-12));
  CHECK(std::arg(z) == doctest::Approx(-0.45 * kPi).epsilon(1e-12));

  CHECK_THROWS_AS(z_cpe(1.0, 0.9, 0.0), DomainError);
}

TEST_CASE("warburg element") {
  CHECK(z_warburg(1.0, 0.5).real() == doctest::Approx(1.0));
  CHECK(z_warburg(1.0, 0.5).imag() == doctest::Approx(-1.0));
  CHECK(z_warburg(2.0, 0.5).real() == doctest::Approx(0.5));
  CHECK(z_warburg(2.0, 0.5).imag() == doctest::Approx(-0.5));

  const double w = 2.0 * kPi * 0.01;
  const double expect = 1.0 / (3.693 * std::sqrt(2.0 * w));
  CHECK(z_warburg(3.693, w).real() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(z_warburg(3.693, w).imag() == doctest::Approx(-expect).epsilon(1e-14));

  // -45 degrees exactly, at any frequency.
  for (double omega : {1e-6, 1e-2, 1.0, 1e3, 1e8}) {
    CHECK(std::arg(z_warburg(0.7, omega)) == doctest::Approx(-kPi / 4.0));
  }
  CHECK_THROWS_AS(z_warburg(1.0, -2.0), DomainError);
}

TEST_CASE("zarc element") {
  // RC semicircle peak at omega_c = 1.
  CHECK(z_zarc(1.0, 1.0, 1.0, 1.0).real() == doctest::Approx(0.5));
  CHECK(z_zarc(1.0, 1.0, 1.0, 1.0).imag() == doctest::Approx(-0.5));
  // DC limit is R.
  CHECK(z_zarc(1.0, 1.0, 1.0, 1e-9).real() == doctest::Approx(1.0));
  CHECK(std::abs(z_zarc(1.0, 1.0, 1.0, 1e-9).imag()) < 1e-8);

  // At its characteristic frequency the arc equals R/(1 + j^phi); the peak
  // value is R/2 - j (R/2) tan(pi phi / 4).
  const double r = 0.45, q = 0.02, phi = 0.9;
  const double wc = zarc_descriptor(r, q, phi).omega_c;
  const Complex z = z_zarc(r, q, phi, wc);
  const Complex jphi = std::polar(1.0, phi * kPi / 2.0);
  const Complex expect = r / (1.0 + jphi);
  CHECK(z.real() == doctest::Approx(expect.real()).epsilon(1e-12));
  CHECK(z.imag() == doctest::Approx(expect.imag()).epsilon(1e-12));
  CHECK(z.real() == doctest::Approx(r / 2.0).epsilon(1e-12));
  CHECK(z.imag() ==
        doctest::Approx(-(r / 2.0) * std::tan(kPi * phi / 4.0)).epsilon(1e-12));

  // Parallel-combination identity against the CPE element.
  const Complex zc = z_cpe(q, phi, wc);
  const Complex par = r * zc / (r + zc);
  CHECK(z.real() == doctest::Approx(par.real()).epsilon(1e-12));
  CHECK(z.imag() == doctest::Approx(par.imag()).epsilon(1e-12));
}

TEST_CASE("zarc descriptor") {
  const ZarcDescriptor rc = zarc_descriptor(1.0, 1.0, 1.0);
  CHECK(rc.center_re == doctest::Approx(0.5));
  CHECK(rc.center_negim == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rc.radius == doctest::Approx(0.5));
  CHECK(rc.tau == doctest::Approx(1.0));
  CHECK(rc.omega_c == doctest::Approx(1.0));

  const EcmParams p = EcmParams::demo_cell();
  const double tau1 = zarc_descriptor(p.r_1, p.q_1, p.phi_1).tau;
  const double tau2 = zarc_descriptor(p.r_2, p.q_2, p.phi_2).tau;
  CHECK(tau2 / tau1 == doctest::Approx(41.98).epsilon(5e-4));

  CHECK(zarc_descriptor(0.65, 0.4, 0.9).tau ==
        doctest::Approx(std::pow(0.26, 1.0 / 0.9)).epsilon(1e-12));
}

TEST_CASE("equivalent impedance asymptotes") {
  const EcmParams p = EcmParams::demo_cell();
  const double r_sigma = p.r_s + p.r_1 + p.r_2;
  CHECK(r_sigma == doctest::Approx(1.138));

  // omega -> 0: X + R -> R_Sigma, i.e. -X - (R - R_Sigma) -> 0.
  for (double omega : {1e-7, 1e-8}) {
    const Complex z = z_eq(p, omega);
    CHECK(std::abs(z.imag() + z.real() - r_sigma) / std::abs(z.imag()) <
          1e-3);
  }

  // High-frequency slope -tan(pi phi_HF / 2) = tan(0.425 pi) ~ 4.165.
  const double k_hf = std::tan(0.425 * kPi);
  CHECK(k_hf == doctest::Approx(4.165).epsilon(2e-4));
  const Complex z8 = z_eq(p, 1e8);
  const Complex z9 = z_eq(p, 1e9);
  const double slope =
      (z9.imag() - z8.imag()) / (z9.real() - z8.real());
  CHECK(slope == doctest::Approx(k_hf).epsilon(1e-3));

  // Degenerate circuit: huge CPE coefficients and vanishing arcs leave R_s.
  EcmParams d = p;
  d.q_hf = 1e15;
  d.q_w = 1e15;
  d.r_1 = 1e-15;
  d.r_2 = 1e-15;
  for (double omega : {1e-3, 1.0, 1e5}) {
    CHECK(std::abs(z_eq(d, omega) - Complex(d.r_s, 0)) < 1e-10);
  }
}

TEST_CASE("additivity of the equivalent impedance") {
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> logw(-3.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    const Complex whole = z_eq(p, omega);
    const Complex parts = p.r_s + z_hf(p.q_hf, p.phi_hf, omega) +
                          z_zarc(p.r_1, p.q_1, p.phi_1, omega) +
                          z_zarc(p.r_2, p.q_2, p.phi_2, omega) +
                          z_warburg(p.q_w, omega);
    CHECK(std::abs(whole - parts) <= 1e-12 * std::abs(whole));
  }
}

TEST_CASE("zarc depressed-circle locus") {
  std::mt19937_64 rng(7002);
  std::uniform_real_distribution<double> logw(-4.0, 7.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double r = std::exp(3.0 * (u(rng) - 0.5));
    const double q = std::exp(3.0 * (u(rng) - 0.5));
    const double phi = 0.3 + 0.7 * u(rng);
    const ZarcDescriptor d = zarc_descriptor(r, q, phi);
    const double omega = std::pow(10.0, logw(rng));
    const Complex z = z_zarc(r, q, phi, omega);
    // Nyquist (R, -X) distance from the circle center.
    const double dist = std::hypot(z.real() - d.center_re,
                                   -z.imag() - d.center_negim);
    CHECK(std::abs(dist - d.radius) < 1e-9 * d.radius);
  }
}

TEST_CASE("analytic jacobian") {
  const EcmParams p = EcmParams::demo_cell();

  // Affine dependence on R_s.
  for (double omega : {1e-2, 1.0, 1e4}) {
    const ModelJacobian j = z_eq_jacobian(p, omega);
    CHECK(j(0, 0) == doctest::Approx(1.0));
    CHECK(j(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    // dX/dQ_W = +1/(Q_W^2 sqrt(2 omega)).
    CHECK(j(1, 9) ==
          doctest::Approx(1.0 / (p.q_w * p.q_w * std::sqrt(2.0 * omega)))
              .epsilon(1e-12));
  }

  // Finite-difference agreement at the demo cell.
  {
    const ModelJacobian ja = z_eq_jacobian(p, 1.0);
    const ModelJacobian jf = oracles::fd_jacobian(p, 1.0);
    const double rho = std::abs(z_eq(p, 1.0));
    double arr[kNumParams];
    p.to_array(arr);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < kNumParams; ++k) {
        const double slack = oracles::fd_slack(rho, 1e-6 * std::abs(arr[k]));
        CHECK(oracles::fd_close(ja(r, k), jf(r, k), 1e-6, slack));
      }
    }
  }

  // 100 random interior points, tolerance 1e-5 relative (plus the FD
  // oracle's own cancellation noise).
  std::mt19937_64 rng(7003);
  std::uniform_real_distribution<double> logw(-2.5, 5.5);
  for (int i = 0; i < 100; ++i) {
    const EcmParams q = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    const ModelJacobian a = z_eq_jacobian(q, omega);
    const ModelJacobian f = oracles::fd_jacobian(q, omega);
    const double rho = std::abs(z_eq(q, omega));
    double arr[kNumParams];
    q.to_array(arr);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < kNumParams; ++k) {
        const double slack = oracles::fd_slack(rho, 1e-6 * std::abs(arr[k]));
        CHECK(oracles::fd_close(a(r, k), f(r, k), 1e-5, slack));
      }
    }
  }
}

TEST_CASE("analytic model hessian vs differentiated jacobian") {
  std::mt19937_64 rng(7004);
  std::uniform_real_distribution<double> logw(-2.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    ParamMatrix hre, him, fre, fim;
    z_eq_hessian(p, omega, hre, him);
    oracles::fd_hessian(p, omega, fre, fim);
    const double jscale =
        z_eq_jacobian(p, omega).cwiseAbs().maxCoeff();
    double arr[kNumParams];
    p.to_array(arr);
    for (int k = 0; k < kNumParams; ++k) {
      for (int l = 0; l < kNumParams; ++l) {
        const double slack =
            oracles::fd_slack(jscale, 1e-6 * std::abs(arr[l]));
        CHECK(oracles::fd_close(hre(k, l), fre(k, l), 1e-4, slack));
        CHECK(oracles::fd_close(him(k, l), fim(k, l), 1e-4, slack));
      }
    }
  }
}

TEST_CASE("polar jet chain rule") {
  std::mt19937_64 rng(7005);
  std::uniform_real_distribution<double> logw(-2.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    const PolarJet jet = polar_jet(p, omega);

    double a[kNumParams];
    p.to_array(a);
    for (int k = 0; k < kNumParams; ++k) {
      const double h = 1e-6 * std::abs(a[k]);
      double plus[kNumParams], minus[kNumParams];
      for (int j = 0; j < kNumParams; ++j) plus[j] = minus[j] = a[j];
      plus[k] += h;
      minus[k] -= h;
      const Complex zp = z_eq(EcmParams::from_array(plus), omega);
      const Complex zm = z_eq(EcmParams::from_array(minus), omega);
      const double drho = (std::abs(zp) - std::abs(zm)) / (2.0 * h);
      const double dphi = (std::arg(zp) - std::arg(zm)) / (2.0 * h);
      CHECK(oracles::fd_close(jet.d_rho(k), drho, 1e-5,
                              oracles::fd_slack(jet.rho, h)));
      CHECK(oracles::fd_close(jet.d_phi(k), dphi, 1e-5,
                              oracles::fd_slack(1.0, h)));
    }
  }
}

TEST_CASE("polar hessians are symmetric and match finite differences") {
  std::mt19937_64 rng(7006);
  std::uniform_real_distribution<double> logw(-1.5, 4.5);
  for (int i = 0; i < 10; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    const PolarHessians ph = polar_hessians(p, omega);
    CHECK((ph.h_rho - ph.h_rho.transpose()).cwiseAbs().maxCoeff() <
          1e-10 * ph.h_rho.cwiseAbs().maxCoeff());
    CHECK((ph.h_phi - ph.h_phi.transpose()).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1e-30, ph.h_phi.cwiseAbs().maxCoeff()));

    // Columns of the rho/phi Hessians vs finite differences of the jet.
    double a[kNumParams];
    p.to_array(a);
    for (int l = 0; l < kNumParams; ++l) {
      const double h = 1e-6 * std::abs(a[l]);
      double plus[kNumParams], minus[kNumParams];
      for (int j = 0; j < kNumParams; ++j) plus[j] = minus[j] = a[j];
      plus[l] += h;
      minus[l] -= h;
      const PolarJet jp = polar_jet(EcmParams::from_array(plus), omega);
      const PolarJet jm = polar_jet(EcmParams::from_array(minus), omega);
      const double rho_scale = ph.d_rho.cwiseAbs().maxCoeff();
      const double phi_scale = ph.d_phi.cwiseAbs().maxCoeff();
      for (int k = 0; k < kNumParams; ++k) {
        const double frho = (jp.d_rho(k) - jm.d_rho(k)) / (2.0 * h);
        const double fphi = (jp.d_phi(k) - jm.d_phi(k)) / (2.0 * h);
        CHECK(oracles::fd_close(ph.h_rho(k, l), frho, 1e-4,
                                oracles::fd_slack(rho_scale, h)));
        CHECK(oracles::fd_close(ph.h_phi(k, l), fphi, 1e-4,
                                oracles::fd_slack(phi_scale, h)));
      }
    }
  }
}

TEST_CASE("parameter domain validation") {
  EcmParams p = EcmParams::demo_cell();
  CHECK(p.valid());
  p.phi_hf = 0.0;
  CHECK(!p.valid());
  p = EcmParams::demo_cell();
  p.phi_1 = 0.0;
  CHECK(!p.valid());
  p = EcmParams::demo_cell();
  p.phi_2 = 1.0;  // boundary allowed
  CHECK(p.valid());
  p.phi_hf = -1.0;  // boundary allowed
  CHECK(p.valid());
  p.r_1 = 0.0;
  CHECK(!p.valid());
  CHECK_THROWS_AS(p.validate(), DomainError);
}
