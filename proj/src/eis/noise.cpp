#include "eis/noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "eis/errors.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool region_contains(const NoiseRegion& r, double f_hz, double rho) {
  return f_hz >= r.f_min_hz && f_hz <= r.f_max_hz && rho >= r.z_min_ohm &&
         rho <= r.z_max_ohm;
}

double parse_bound(const std::string& tok) {
  if (tok == "inf" || tok == "+inf") return HUGE_VAL;
  return std::stod(tok);
}

std::string format_bound(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

NoiseModel::NoiseModel(std::vector<NoiseRegion> regions, double eps_phi_rad)
    : regions_(std::move(regions)), eps_phi_(eps_phi_rad) {
  if (regions_.empty()) throw ArgumentError("noise model needs >= 1 region");
  for (const auto& r : regions_) {
    if (!(r.eps_rho > 0)) throw ArgumentError("eps_rho must be > 0");
    if (!(r.f_min_hz < r.f_max_hz) || !(r.z_min_ohm < r.z_max_ohm)) {
      throw ArgumentError("degenerate noise region bounds");
    }
  }
  if (!(eps_phi_ > 0)) throw ArgumentError("eps_phi must be > 0");
}

NoiseModel NoiseModel::single_region(double eps_rho_percent,
                                     double eps_phi_deg) {
  NoiseRegion r;
  r.f_min_hz = 0;
  r.f_max_hz = HUGE_VAL;
  r.z_min_ohm = 0;
  r.z_max_ohm = HUGE_VAL;
  r.eps_rho = eps_rho_percent / 100.0;
  return NoiseModel({r}, eps_phi_deg * kPi / 180.0);
}

NoiseModel NoiseModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open noise model file: " + path);
  std::vector<NoiseRegion> regions;
  double eps_phi_deg = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    try {
      if (key == "eps_phi_deg") {
        ls >> eps_phi_deg;
      } else if (key == "region") {
        std::string a, b, c, d, e;
        if (!(ls >> a >> b >> c >> d >> e)) {
          throw IoError("short region row");
        }
        NoiseRegion r;
        r.f_min_hz = parse_bound(a);
        r.f_max_hz = parse_bound(b);
        r.z_min_ohm = parse_bound(c);
        r.z_max_ohm = parse_bound(d);
        r.eps_rho = parse_bound(e) / 100.0;
        regions.push_back(r);
      } else {
        throw IoError("unknown key '" + key + "'");
      }
    } catch (const std::exception& ex) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (eps_phi_deg <= 0) throw IoError(path + ": missing eps_phi_deg");
  return NoiseModel(std::move(regions), eps_phi_deg * kPi / 180.0);
}

void NoiseModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write noise model file: " + path);
  out << "# eisfit noise model\n";
  out << "eps_phi_deg " << eps_phi_ * 180.0 / kPi << "\n";
  out << "# region f_min_hz f_max_hz z_min_ohm z_max_ohm eps_rho_percent\n";
  for (const auto& r : regions_) {
    out << "region " << format_bound(r.f_min_hz) << " "
        << format_bound(r.f_max_hz) << " " << format_bound(r.z_min_ohm) << " "
        << format_bound(r.z_max_ohm) << " " << r.eps_rho * 100.0 << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

double NoiseModel::eps_rho(double f_hz, double rho) const {
  for (const auto& r : regions_) {
    if (region_contains(r, f_hz, rho)) return r.eps_rho;
  }
  std::ostringstream os;
  os << "(f=" << f_hz << " Hz, |Z|=" << rho
     << " Ohm) outside every accuracy contour region";
  throw UndefinedRegionError(os.str());
}

std::pair<double, double> NoiseModel::sigma_polar(double f_hz,
                                                  double rho) const {
  const double er = eps_rho(f_hz, rho);
  return {rho * er / 3.0, eps_phi_ / 3.0};
}

CovBlock2x2 NoiseModel::cov_polar(double f_hz, double rho) const {
  const auto [sr, sp] = sigma_polar(f_hz, rho);
  CovBlock2x2 q;
  q.a = sr * sr;
  q.b = 0.0;  // magnitude and phase errors are uncorrelated
  q.c = sp * sp;
  return q;
}

std::string NoiseModel::id() const {
  std::ostringstream os;
  os.precision(12);
  os << "eps_phi_deg=" << eps_phi_ * 180.0 / kPi;
  for (const auto& r : regions_) {
    os << ";region=" << format_bound(r.f_min_hz) << ","
       << format_bound(r.f_max_hz) << "," << format_bound(r.z_min_ohm) << ","
       << format_bound(r.z_max_ohm) << "," << r.eps_rho * 100.0;
  }
  return os.str();
}

CovBlock2x2 polar_to_cartesian_cov_exact(double rho, double phi,
                                         double sigma_rho, double sigma_phi) {
  // With s = sigma_phi^2, E[cos(phi+d)] = cos(phi) e^{-s/2} and
  // E[cos^2(phi+d)] = (1 + cos(2 phi) e^{-2s}) / 2, so
  //   Var(R) = (rho^2 + sr^2) [(1 - e^{-2s})/2 + cos^2(phi) e^{-2s}]
  //            - rho^2 cos^2(phi) e^{-s},
  // and symmetrically for Var(X); the cross term carries sin(phi) cos(phi).
  const double s = sigma_phi * sigma_phi;
  const double e1 = std::exp(-s);
  const double e2 = std::exp(-2.0 * s);
  const double p2 = rho * rho + sigma_rho * sigma_rho;
  const double base = p2 * (1.0 - e2) / 2.0;
  const double arc = p2 * e2 - rho * rho * e1;
  const double cphi = std::cos(phi);
  const double sphi = std::sin(phi);
  CovBlock2x2 q;
  q.a = base + cphi * cphi * arc;
  q.c = base + sphi * sphi * arc;
  q.b = sphi * cphi * arc;
  return q;
}

CovBlock2x2 cov_cartesian_measured(double rho_meas, double phi_meas,
                                   double sigma_rho, double sigma_phi) {
  if (!(sigma_rho > 0) || !(sigma_phi > 0)) {
    throw ArgumentError("cov_cartesian_measured needs positive sigmas");
  }
  const double s = sigma_phi * sigma_phi;
  const double e2 = std::exp(-2.0 * s);
  const double e4 = std::exp(-4.0 * s);
  const double ch1 = std::cosh(s), sh1 = std::sinh(s);
  const double ch2 = std::cosh(2.0 * s), sh2 = std::sinh(2.0 * s);
  const double c2 = std::cos(phi_meas) * std::cos(phi_meas);
  const double s2 = std::sin(phi_meas) * std::sin(phi_meas);
  const double sc = std::sin(phi_meas) * std::cos(phi_meas);
  const double r2 = rho_meas * rho_meas;
  const double v2 = sigma_rho * sigma_rho;
  CovBlock2x2 q;
  q.a = r2 * e2 * (c2 * (ch2 - ch1) + s2 * (sh2 - sh1)) +
        v2 * e2 * (c2 * (2.0 * ch2 - ch1) + s2 * (2.0 * sh2 - sh1));
  q.c = r2 * e2 * (s2 * (ch2 - ch1) + c2 * (sh2 - sh1)) +
        v2 * e2 * (s2 * (2.0 * ch2 - ch1) + c2 * (2.0 * sh2 - sh1));
  q.b = sc * e4 * (v2 + (r2 + v2) * (1.0 - std::exp(s)));
  return q;
}

CovBlock2x2 cov_cartesian_true(const EcmParams& p, double omega,
                               const NoiseModel& model) {
  const Complex z = z_eq(p, omega);
  const double rho = std::abs(z);
  const double phi = std::arg(z);
  const auto [sr, sp] = model.sigma_polar(omega / (2.0 * kPi), rho);
  return polar_to_cartesian_cov_exact(rho, phi, sr, sp);
}

CovBlockDerivs cov_cartesian_true_derivs(double rho, double phi,
                                         double eps_rho, double eps_phi) {
  // Every element is rho^2 times a function of phi alone (sigma_rho is
  // proportional to rho), so d/d rho = 2 value / rho. The phi derivatives
  // rotate variance between the two coordinates through the shared factor
  // arc = (rho^2 + sr^2) e^{-2s} - rho^2 e^{-s}.
  const double k = eps_rho / 3.0;
  const double sp = eps_phi / 3.0;
  const double s = sp * sp;
  const double e1 = std::exp(-s);
  const double e2 = std::exp(-2.0 * s);
  const double p2 = rho * rho * (1.0 + k * k);
  const double arc = p2 * e2 - rho * rho * e1;

  CovBlockDerivs out;
  out.value = polar_to_cartesian_cov_exact(rho, phi, rho * k, sp);
  out.d_rho.a = 2.0 * out.value.a / rho;
  out.d_rho.b = 2.0 * out.value.b / rho;
  out.d_rho.c = 2.0 * out.value.c / rho;
  const double s2phi = std::sin(2.0 * phi);
  const double c2phi = std::cos(2.0 * phi);
  out.d_phi.a = -s2phi * arc;
  out.d_phi.c = s2phi * arc;
  out.d_phi.b = c2phi * arc;
  return out;
}

}  // namespace eis
