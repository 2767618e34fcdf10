#include "eis/initializer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Fraction of the instrument maximum errors a point may deviate from the
// fitted asymptote line before the growth stops. The maximum errors are
// 3-sigma bounds, so the natural per-point consistency level is one third.
constexpr double kErrorBoundScale = 0.8;

struct Pt {
  double r, x;  // (R, X) plane
};

// Orthogonal fit with fixed slope: only the intercept is free, obtained in
// closed form as the mean of (x - k r).
void fixed_slope_fit(const std::vector<Pt>& pts, double k, LineFit& out) {
  double acc = 0;
  for (const auto& p : pts) acc += p.x - k * p.r;
  out.k = k;
  out.n = acc / static_cast<double>(pts.size());
  out.vertical = false;
  const double norm = std::sqrt(1.0 + k * k);
  out.ux = 1.0 / norm;
  out.uy = k / norm;
  out.px = 0.0;
  out.py = out.n;
}

// Total least squares: principal direction of the centered scatter matrix.
void tls_fit(const std::vector<Pt>& pts, LineFit& out) {
  const double n = static_cast<double>(pts.size());
  double mr = 0, mx = 0;
  for (const auto& p : pts) {
    mr += p.r;
    mx += p.x;
  }
  mr /= n;
  mx /= n;
  double srr = 0, sxx = 0, srx = 0;
  for (const auto& p : pts) {
    srr += (p.r - mr) * (p.r - mr);
    sxx += (p.x - mx) * (p.x - mx);
    srx += (p.r - mr) * (p.x - mx);
  }
  const double angle = 0.5 * std::atan2(2.0 * srx, srr - sxx);
  double ux = std::cos(angle);
  double uy = std::sin(angle);
  if (ux < 0) {
    ux = -ux;
    uy = -uy;
  }
  out.px = mr;
  out.py = mx;
  out.ux = ux;
  out.uy = uy;
  const double scale = std::sqrt(srr + sxx);
  if (std::abs(ux) < 1e-12 * std::max(1.0, scale)) {
    out.vertical = true;
    out.k = std::numeric_limits<double>::infinity();
    out.n = std::numeric_limits<double>::quiet_NaN();
    out.r0 = mr;
    out.ux = 0.0;
    out.uy = 1.0;
  } else {
    out.vertical = false;
    out.k = uy / ux;
    out.n = mx - out.k * mr;
  }
}

std::vector<Pt> end_points(const ImpedanceSpectrum& sp, SpectrumEnd end,
                           int n_points, std::vector<int>& indices) {
  const int n = sp.size();
  std::vector<Pt> pts;
  pts.reserve(n_points);
  indices.clear();
  for (int j = 0; j < n_points; ++j) {
    const int i = (end == SpectrumEnd::low_freq) ? j : n - 1 - j;
    indices.push_back(i);
    pts.push_back({sp.points[i].re, sp.points[i].im});
  }
  return pts;
}

}  // namespace

Complex LineFit::project(Complex z) const {
  const double dr = z.real() - px;
  const double dx = z.imag() - py;
  const double t = dr * ux + dx * uy;
  return {px + t * ux, py + t * uy};
}

bool LineFit::within_bounds() const {
  for (const auto& e : point_errors) {
    if (e.eps_rho > e.eps_rho_bound || e.eps_phi > e.eps_phi_bound) {
      return false;
    }
  }
  return true;
}

LineFit asymptote_line_at(const ImpedanceSpectrum& sp, SpectrumEnd end,
                          const NoiseModel& model, int n_points) {
  if (n_points < 2 || n_points > sp.size()) {
    throw ArgumentError("asymptote fit point count out of range");
  }
  std::vector<int> indices;
  const auto pts = end_points(sp, end, n_points, indices);

  LineFit fit;
  fit.n_points = n_points;
  if (end == SpectrumEnd::low_freq) {
    fixed_slope_fit(pts, -1.0, fit);
  } else {
    tls_fit(pts, fit);
    if (!fit.vertical && fit.k < 0.0) {
      fixed_slope_fit(pts, 0.0, fit);  // constrained optimum at k = 0
    }
  }
  fit.point_errors.reserve(n_points);
  for (int j = 0; j < n_points; ++j) {
    const auto& p = sp.points[indices[j]];
    const Complex zl = fit.project(p.z());
    const double rho_l = std::abs(zl);
    LineFit::PointError e;
    e.eps_rho = std::abs((rho_l - p.rho) / rho_l);
    e.eps_phi = std::abs(std::arg(zl) - p.phi);
    e.eps_rho_bound = kErrorBoundScale * model.eps_rho(p.freq_hz, p.rho);
    e.eps_phi_bound = kErrorBoundScale * model.eps_phi();
    fit.point_errors.push_back(e);
  }
  return fit;
}

LineFit fit_asymptote_line(const ImpedanceSpectrum& sp, SpectrumEnd end,
                           const NoiseModel& model) {
  if (sp.size() < 3) {
    throw ArgumentError("need >= 3 spectrum points for an asymptote fit");
  }
  // Largest prefix whose points all satisfy the error bounds. A transient
  // violation at some intermediate size does not end the growth: the fit at
  // a larger size may absorb it.
  LineFit best;
  bool have = false;
  for (int n = 2; n <= sp.size(); ++n) {
    LineFit fit = asymptote_line_at(sp, end, model, n);
    if (fit.within_bounds()) {
      best = std::move(fit);
      have = true;
    }
  }
  if (!have) {
    throw InsufficientPointsError(
        "no end prefix satisfies the instrument error bounds");
  }
  return best;
}

LfInit init_lf(const ImpedanceSpectrum& sp, const LineFit& lf_line) {
  LfInit out;
  out.r_sigma = lf_line.n;  // X = -R + n crosses the horizontal axis at R = n
  double acc = 0;
  int terms = 0;
  for (int i = 0; i < lf_line.n_points; ++i) {
    const auto& p = sp.points[i];
    const double dr = p.re - out.r_sigma;
    if (dr <= 0 || p.im >= 0) {
      out.excluded.push_back(i);
      continue;
    }
    const double root = std::sqrt(2.0 * p.omega());
    acc += 1.0 / (root * dr);
    acc += -1.0 / (root * p.im);
    terms += 2;
  }
  if (terms == 0) {
    throw DegenerateGeometryError(
        "no low-frequency point has usable Warburg geometry");
  }
  out.q_w0 = acc / static_cast<double>(terms);
  if (!(out.q_w0 > 0)) {
    throw DegenerateGeometryError("non-positive Warburg coefficient estimate");
  }
  return out;
}

HfInit init_hf(const ImpedanceSpectrum& sp, const LineFit& hf_line) {
  HfInit out;
  const int n = sp.size();
  const auto top = sp.points[n - 1];

  const auto use_fallback = [&](const std::string& why) {
    out.fallback = true;
    out.notes.push_back("hf fallback: " + why);
    out.phi_hf0 = -0.5;
    double rs = std::numeric_limits<double>::infinity();
    for (const auto& p : sp.points) rs = std::min(rs, p.re);
    out.r_s0 = rs;
    // Warburg-exponent closed form at the highest-frequency point.
    const double wpow = std::pow(top.omega(), out.phi_hf0);
    const double x = top.im;
    out.q_hf0 = (x > 0) ? (std::sin(kPi / 4.0) / (x * wpow))
                        : 1.0 / (std::abs(top.z() - Complex(out.r_s0, 0)) * wpow);
  };

  if (!hf_line.vertical && hf_line.k <= 0.0) {
    use_fallback("no inductive tail detected (k_HF <= 0)");
    return out;
  }

  if (hf_line.vertical) {
    out.phi_hf0 = -1.0;
    out.r_s0 = hf_line.r0;
  } else {
    out.phi_hf0 = -std::atan(hf_line.k) / (kPi / 2.0);
    out.r_s0 = hf_line.n / std::tan(kPi * out.phi_hf0 / 2.0);
  }
  if (!(out.r_s0 > 0)) {
    use_fallback("line intercept gives non-positive R_s");
    return out;
  }

  const double delta = kPi * out.phi_hf0 / 2.0;
  const double cd = std::cos(delta);
  const double sd = std::sin(delta);
  double acc = 0;
  int terms = 0;
  for (int j = 0; j < hf_line.n_points; ++j) {
    const auto& p = sp.points[n - 1 - j];
    const double wpow = std::pow(p.omega(), out.phi_hf0);
    const double dr = p.re - out.r_s0;
    // Real-part term carries no information when cos(delta) ~ 0 (pure
    // inductive limit), and amplifies the R_s estimate error without bound
    // as R approaches R_s; keep it only while the subtraction is benign.
    if (dr > 0.5 * p.re && cd > 1e-9) {
      acc += cd / (dr * wpow);
      ++terms;
    }
    if (p.im > 0) {
      acc += -sd / (p.im * wpow);
      ++terms;
    }
  }
  if (terms == 0 || !(acc > 0)) {
    use_fallback("no usable closed-form term for Q_HF");
    return out;
  }
  out.q_hf0 = acc / static_cast<double>(terms);
  return out;
}

namespace {

struct PeakCandidate {
  int index = 0;       // grid index of the raw maximum
  double log_omega = 0;
  double re = 0;       // interpolated Re at the refined peak
  double neg_im = 0;   // interpolated -Im at the refined peak
  double score = 0;    // smoothed -Im value used for ranking
};

struct Quadratic {
  double a = 0, b = 0, c = 0;
  double eval(double x) const { return (a * x + b) * x + c; }
};

// Least-squares quadratic through a handful of samples (x centered by the
// caller for conditioning).
bool quad_ls(const std::vector<double>& x, const std::vector<double>& y,
             int from, int to, double x0, Quadratic& q) {
  const int m = to - from;
  if (m < 3) return false;
  double s1 = 0, sx = 0, sx2 = 0, sx3 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0;
  for (int i = from; i < to; ++i) {
    const double u = x[i] - x0;
    const double u2 = u * u;
    s1 += 1;
    sx += u;
    sx2 += u2;
    sx3 += u2 * u;
    sx4 += u2 * u2;
    sy += y[i];
    sxy += u * y[i];
    sx2y += u2 * y[i];
  }
  Eigen::Matrix3d m3;
  m3 << sx4, sx3, sx2, sx3, sx2, sx, sx2, sx, s1;
  const Eigen::Vector3d rhs(sx2y, sxy, sy);
  const Eigen::Vector3d sol = m3.fullPivLu().solve(rhs);
  if (!sol.allFinite()) return false;
  q.a = sol(0);
  q.b = sol(1);
  q.c = sol(2);
  return true;
}

// Local quadratic refinement in log-omega around raw index p: vertex of a
// least-squares parabola over up to five samples, with the Re readout from
// a parallel quadratic over the same window.
PeakCandidate refine_extremum(const std::vector<double>& lw,
                              const std::vector<double>& re,
                              const std::vector<double>& negim, int p,
                              double score, bool maximize,
                              int halfwidth = 2) {
  PeakCandidate c;
  c.index = p;
  c.score = score;
  c.log_omega = lw[p];
  c.neg_im = negim[p];
  c.re = re[p];
  const int n = static_cast<int>(lw.size());
  const int from = std::max(0, p - halfwidth);
  const int to = std::min(n, p + halfwidth + 1);
  Quadratic qy, qr;
  if (!quad_ls(lw, negim, from, to, lw[p], qy) ||
      !quad_ls(lw, re, from, to, lw[p], qr)) {
    return c;
  }
  if ((maximize && qy.a >= 0) || (!maximize && qy.a <= 0)) return c;
  double xv = -qy.b / (2.0 * qy.a);
  xv = std::clamp(xv, lw[from] - lw[p], lw[to - 1] - lw[p]);
  c.log_omega = lw[p] + xv;
  c.neg_im = qy.eval(xv);
  c.re = qr.eval(xv);
  return c;
}

PeakCandidate refine_peak(const std::vector<double>& lw,
                          const std::vector<double>& re,
                          const std::vector<double>& negim, int p,
                          double score) {
  return refine_extremum(lw, re, negim, p, score, true);
}

// Strict local maxima of the smoothed curve, plateau-aware: a run of equal
// values counts as one maximum when both neighbouring values are smaller.
// Returns one representative index per run (the raw maximum within it).
std::vector<int> plateau_maxima(const std::vector<double>& smooth,
                                const std::vector<double>& raw) {
  const int n = static_cast<int>(smooth.size());
  std::vector<int> peaks;
  int a = 0;
  while (a < n) {
    int b = a;
    while (b + 1 < n && smooth[b + 1] == smooth[a]) ++b;
    if (a > 0 && b < n - 1 && smooth[a - 1] < smooth[a] &&
        smooth[b + 1] < smooth[a]) {
      int rep = a;
      for (int i = a; i <= b; ++i) {
        if (raw[i] > raw[rep]) rep = i;
      }
      peaks.push_back(rep);
    }
    a = b + 1;
  }
  return peaks;
}

}  // namespace

namespace {

std::vector<double> median3(const std::vector<double>& y) {
  std::vector<double> out(y);
  for (int i = 1; i + 1 < static_cast<int>(y.size()); ++i) {
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    out[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  return out;
}

struct ZarcGuess {
  double r = 0, q = 0, phi = 0, omega_c = 0;
  bool ok = false;
};

// Peak-value readout of a single depressed arc: at its characteristic
// frequency Re = R/2 and -Im = (R/2) tan(pi phi / 4).
ZarcGuess read_arc(const PeakCandidate& c) {
  ZarcGuess g;
  if (!(c.re > 0) || !(c.neg_im > 0)) return g;
  g.omega_c = std::exp(c.log_omega);
  g.r = 2.0 * c.re;
  g.phi = (4.0 / kPi) * std::atan(2.0 * c.neg_im / g.r);
  if (!(g.phi > 0)) return g;
  g.q = 1.0 / (std::pow(g.omega_c, std::min(g.phi, 1.0)) * g.r);
  g.ok = g.q > 0 && std::isfinite(g.q);
  return g;
}

// Largest interior maximum of curve (after median smoothing), refined by a
// parabola through the raw samples.
bool strongest_peak(const std::vector<double>& lw,
                    const std::vector<double>& re,
                    const std::vector<double>& negim, PeakCandidate& out) {
  const std::vector<double> smooth = median3(negim);
  auto peaks = plateau_maxima(smooth, negim);
  if (peaks.empty()) return false;
  int best = peaks[0];
  for (int p : peaks) {
    if (smooth[p] > smooth[best]) best = p;
  }
  if (!(negim[best] > 0)) return false;
  out = refine_peak(lw, re, negim, best, smooth[best]);
  return true;
}

}  // namespace

MfInit init_mf(const ImpedanceSpectrum& sp, const LfInit& lf,
               const HfInit& hf) {
  const int n = sp.size();
  if (n < 5) throw ArgumentError("too few points for mid-frequency analysis");

  std::vector<double> lw(n), re(n), negim(n);
  for (int i = 0; i < n; ++i) {
    const auto& p = sp.points[i];
    const Complex zmf = p.z() - z_warburg(lf.q_w0, p.omega()) -
                        z_hf(hf.q_hf0, hf.phi_hf0, p.omega()) - hf.r_s0;
    lw[i] = std::log(p.omega());
    re[i] = zmf.real();
    negim[i] = -zmf.imag();
  }
  // 3-point moving median knocks out isolated noise spikes.
  const std::vector<double> smooth = median3(negim);

  MfInit out;
  auto peaks = plateau_maxima(smooth, negim);
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return smooth[a] > smooth[b]; });

  PeakCandidate hi, lo;
  if (peaks.size() >= 2) {
    PeakCandidate c0 = refine_peak(lw, re, negim, peaks[0], smooth[peaks[0]]);
    PeakCandidate c1 = refine_peak(lw, re, negim, peaks[1], smooth[peaks[1]]);
    if (c0.log_omega < c1.log_omega) std::swap(c0, c1);
    hi = c0;
    lo = c1;
  } else {
    // Fewer than two separated maxima: split the arc at its -Im minimum and
    // read a single-Zarc descriptor from each half.
    out.fallback = true;
    out.notes.push_back("mf fallback: fewer than two separated maxima");
    int imin = 1;
    for (int i = 1; i + 1 < n; ++i) {
      if (smooth[i] < smooth[imin]) imin = i;
    }
    const auto half_peak = [&](int from, int to, PeakCandidate& c) -> bool {
      if (to - from < 3) return false;
      int p = from;
      for (int i = from; i < to; ++i) {
        if (negim[i] > negim[p]) p = i;
      }
      if (!(negim[p] > 0)) return false;
      c = refine_peak(lw, re, negim, p, negim[p]);
      return true;
    };
    PeakCandidate chi, clo;
    const bool has_hi = half_peak(imin, n, chi);
    const bool has_lo = half_peak(0, imin + 1, clo);
    if (!has_hi && !has_lo) {
      throw PeakDetectionError("no usable mid-frequency arc found");
    }
    const double scale = std::max(1e-300, std::abs(lf.r_sigma));
    if (has_hi) {
      hi = chi;
    } else {
      hi.log_omega = lw[std::max(0, imin)];
      hi.re = 5e-4 * scale;
      hi.neg_im = hi.re * std::tan(kPi * 0.9 / 4.0);
      out.notes.push_back("mf fallback: high-frequency half has no arc");
    }
    if (has_lo) {
      lo = clo;
    } else {
      lo.log_omega = lw[std::min(n - 1, imin)];
      lo.re = 2.0 * hi.re + 5e-4 * scale;
      lo.neg_im = 5e-4 * scale;
      out.notes.push_back("mf fallback: low-frequency half has no arc");
    }
  }

  // First pass: literal peak readout. The low-frequency arc sits on top of
  // the first arc's DC resistance, so its Re readout is offset by R_1.
  ZarcGuess g1 = read_arc(hi);
  if (!g1.ok) throw PeakDetectionError("non-positive R_1 from arc peak");
  PeakCandidate lo_off = lo;
  lo_off.re = lo.re - g1.r;
  ZarcGuess g2 = read_arc(lo_off);
  if (!g2.ok) {
    g2.r = 1e-3 * g1.r;
    g2.phi = 0.9;
    g2.omega_c = std::exp(lo.log_omega);
    g2.q = 1.0 / (std::pow(g2.omega_c, g2.phi) * g2.r);
    g2.ok = true;
    out.notes.push_back("mf: clamped non-positive R_2 estimate");
  }

  if (!out.fallback) {
    // The second arc's tail shifts the first arc's -Im peak and inflates
    // its readouts; re-read arc 1 on the curve with the current arc-2 model
    // subtracted (the peak equations are exact for an isolated arc).
    const auto model_phi = [](double phi) {
      return std::clamp(phi, 0.05, 1.0);
    };
    PeakCandidate c2_deflated = lo;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> rec(n), nic(n);
      for (int i = 0; i < n; ++i) {
        const Complex z2 =
            z_zarc(g2.r, g2.q, model_phi(g2.phi), std::exp(lw[i]));
        rec[i] = re[i] - z2.real();
        nic[i] = negim[i] + z2.imag();
      }
      PeakCandidate c1;
      if (strongest_peak(lw, rec, nic, c1)) {
        const ZarcGuess t = read_arc(c1);
        if (t.ok) g1 = t;
      }
      if (pass > 0) break;
      // One improved-arc-1 update of the arc-2 guess keeps the deflation
      // from feeding back a poor first estimate.
      std::vector<double> re2(n), ni2(n);
      for (int i = 0; i < n; ++i) {
        const Complex z1 =
            z_zarc(g1.r, g1.q, model_phi(g1.phi), std::exp(lw[i]));
        re2[i] = re[i] - z1.real();
        ni2[i] = negim[i] + z1.imag();
      }
      PeakCandidate c2;
      if (strongest_peak(lw, re2, ni2, c2)) {
        const ZarcGuess t = read_arc(c2);
        if (t.ok) {
          g2 = t;
          c2_deflated = c2;
        }
      }
    }

    // The printed form of the R_2 readout subtracts the R_1 estimate, which
    // injects that estimate's noise twice over. The -Im valley between the
    // arcs reads the same quantity (the first arc's DC resistance plus the
    // shared subtraction offsets) from the same curve, so differencing two
    // Re readouts of the raw curve cancels the common part.
    const int ilo = std::min(lo.index, hi.index);
    const int ihi = std::max(lo.index, hi.index);
    if (ihi - ilo >= 2) {
      int v = ilo + 1;
      for (int i = ilo + 1; i < ihi; ++i) {
        if (smooth[i] < smooth[v]) v = i;
      }
      const PeakCandidate cv =
          refine_extremum(lw, re, negim, v, smooth[v], /*maximize=*/false);
      // The raw -Im peak sits below the arc's characteristic frequency
      // (pulled by the first arc's tail) and the deflation-located peak a
      // little above it; the Re readouts err to opposite sides, so take
      // their midpoint.
      double peak_re = lo.re;
      int j = lo.index;
      for (int i = 0; i < n; ++i) {
        if (std::abs(lw[i] - c2_deflated.log_omega) <
            std::abs(lw[j] - c2_deflated.log_omega)) {
          j = i;
        }
      }
      Quadratic qr;
      if (quad_ls(lw, re, std::max(0, j - 2), std::min(n, j + 3), lw[j], qr)) {
        const double re_defl = qr.eval(c2_deflated.log_omega - lw[j]);
        peak_re = 0.5 * (lo.re + re_defl);
      }
      const double r2_anchored = 2.0 * (peak_re - cv.re);
      if (r2_anchored > 0) {
        g2.r = r2_anchored;
        g2.phi = (4.0 / kPi) * std::atan(2.0 * lo.neg_im / g2.r);
        g2.omega_c = std::exp(lo.log_omega);
        if (g2.phi > 0) {
          g2.q = 1.0 / (std::pow(g2.omega_c, std::min(g2.phi, 1.0)) * g2.r);
        } else {
          g2 = read_arc(lo_off);
        }
      }
    }
    if (g1.omega_c < g2.omega_c) std::swap(g1, g2);
  }

  out.omega_c1 = g1.omega_c;
  out.omega_c2 = g2.omega_c;
  out.r_10 = g1.r;
  out.phi_10 = g1.phi;
  out.q_10 = g1.q;
  out.r_20 = g2.r;
  out.phi_20 = g2.phi;
  out.q_20 = g2.q;
  return out;
}

namespace {

void nudge_exponents(EcmParams& p, std::vector<std::string>& notes) {
  const auto note = [&](const char* what) {
    notes.push_back(std::string("nudged ") + what + " into its domain");
  };
  if (p.phi_hf >= 0) {
    p.phi_hf = -1e-6;
    note("phi_HF");
  } else if (p.phi_hf < -1) {
    p.phi_hf = -1.0;
    note("phi_HF");
  }
  for (auto* phi : {&p.phi_1, &p.phi_2}) {
    if (*phi <= 0) {
      *phi = 1e-6;
      note("phi_i");
    } else if (*phi > 1) {
      *phi = 1.0;
      note("phi_i");
    }
  }
}

}  // namespace

std::string InitReport::to_json() const {
  nlohmann::json j;
  double a[kNumParams];
  theta0.to_array(a);
  for (int i = 0; i < kNumParams; ++i) j["theta0"][EcmParams::names()[i]] = a[i];
  j["theta0_vector"] = std::vector<double>(a, a + kNumParams);
  j["n_lf"] = n_lf;
  j["n_hf"] = n_hf;
  j["k_lf"] = k_lf;
  j["n_lf_intercept"] = n_lf_intercept;
  j["k_hf"] = k_hf;
  j["n_hf_intercept"] = n_hf_intercept;
  j["omega_c1"] = omega_c1;
  j["omega_c2"] = omega_c2;
  j["notes"] = notes;
  return j.dump(2);
}

InitReport initialize_all(const ImpedanceSpectrum& spectrum,
                          const NoiseModel& model) {
  ImpedanceSpectrum sp = spectrum;
  sp.sort_by_omega();

  const LineFit lf_line = fit_asymptote_line(sp, SpectrumEnd::low_freq, model);
  const LineFit hf_line =
      fit_asymptote_line(sp, SpectrumEnd::high_freq, model);
  const LfInit lf = init_lf(sp, lf_line);
  const HfInit hf = init_hf(sp, hf_line);
  const MfInit mf = init_mf(sp, lf, hf);

  InitReport rep;
  rep.n_lf = lf_line.n_points;
  rep.n_hf = hf_line.n_points;
  rep.k_lf = lf_line.k;
  rep.n_lf_intercept = lf_line.n;
  rep.k_hf = hf_line.k;
  rep.n_hf_intercept = hf_line.n;
  rep.omega_c1 = mf.omega_c1;
  rep.omega_c2 = mf.omega_c2;
  for (int i : lf.excluded) {
    rep.notes.push_back("lf: excluded point " + std::to_string(i) +
                        " (non-Warburg geometry)");
  }
  rep.notes.insert(rep.notes.end(), hf.notes.begin(), hf.notes.end());
  rep.notes.insert(rep.notes.end(), mf.notes.begin(), mf.notes.end());

  EcmParams& t = rep.theta0;
  t.r_s = hf.r_s0;
  t.q_hf = hf.q_hf0;
  t.phi_hf = hf.phi_hf0;
  t.r_1 = mf.r_10;
  t.q_1 = mf.q_10;
  t.phi_1 = mf.phi_10;
  t.r_2 = mf.r_20;
  t.q_2 = mf.q_20;
  t.phi_2 = mf.phi_20;
  t.q_w = lf.q_w0;
  nudge_exponents(t, rep.notes);
  t.validate();
  return rep;
}

}  // namespace eis
