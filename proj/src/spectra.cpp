#include "magnoise/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace magnoise {

namespace {

void validate_custom(const CustomSpectrum& c) {
  if (c.omega.size() != c.S.size())
    throw std::invalid_argument("CustomSpectrum: omega and S column lengths differ");
  if (c.omega.size() < 2) throw std::invalid_argument("CustomSpectrum: need at least two rows");
  for (Eigen::Index i = 0; i < c.omega.size(); ++i) {
    if (!(c.omega[i] > 0.0))
      throw std::invalid_argument("CustomSpectrum: omega must be positive (table is one-sided in |omega|)");
    if (i > 0 && !(c.omega[i] > c.omega[i - 1]))
      throw std::invalid_argument("CustomSpectrum: omega must be strictly increasing");
    if (!(c.S[i] >= 0.0)) throw std::invalid_argument("CustomSpectrum: S >= 0 violated");
  }
}

double interp_custom(const CustomSpectrum& c, double omega) {
  const double w = std::abs(omega);
  const double* lo = c.omega.data();
  const double* hi = lo + c.omega.size();
  if (w < *lo || w > *(hi - 1))
    throw std::out_of_range("CustomSpectrum: omega outside the tabulated range");
  const double* it = std::lower_bound(lo, hi, w);
  if (*it == w) return c.S[it - lo];
  const Eigen::Index i1 = it - lo;  // first index with omega >= w, and omega[i1] > w here
  const Eigen::Index i0 = i1 - 1;
  const double w0 = c.omega[i0], w1 = c.omega[i1];
  const double s0 = c.S[i0], s1 = c.S[i1];
  if (s0 > 0.0 && s1 > 0.0) {
    const double f = (std::log(w) - std::log(w0)) / (std::log(w1) - std::log(w0));
    return std::exp((1.0 - f) * std::log(s0) + f * std::log(s1));
  }
  // Zero endpoints cannot be interpolated in log space; fall back to linear.
  const double f = (w - w0) / (w1 - w0);
  return (1.0 - f) * s0 + f * s1;
}

}  // namespace

void validate(const NoiseSpectrum& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WhiteNoise>) {
          if (!(s.A >= 0.0)) throw std::invalid_argument("WhiteNoise: A >= 0 violated");
        } else if constexpr (std::is_same_v<T, FlickerNoise>) {
          if (!(s.K >= 0.0)) throw std::invalid_argument("FlickerNoise: K >= 0 violated");
          if (!(s.alpha >= 0.0 && s.alpha <= 2.0))
            throw std::invalid_argument("FlickerNoise: alpha in [0, 2] violated");
          if (!(s.I > 0.0)) throw std::invalid_argument("FlickerNoise: I > 0 violated");
          if (!(s.d > 0.0)) throw std::invalid_argument("FlickerNoise: d > 0 violated");
        } else {
          validate_custom(s);
        }
      },
      spec);
}

double evaluate_psd(const NoiseSpectrum& spec, double omega) {
  return std::visit(
      [omega](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WhiteNoise>) {
          return s.A * s.A;
        } else if constexpr (std::is_same_v<T, FlickerNoise>) {
          if (omega == 0.0 && s.alpha > 0.0)
            throw std::domain_error("FlickerNoise: divergent PSD at DC (omega = 0)");
          return constants::mu0 * s.K * s.I * s.I /
                 (2.0 * std::numbers::pi * s.d * s.d * std::pow(std::abs(omega), s.alpha));
        } else {
          return interp_custom(s, omega);
        }
      },
      spec);
}

NormalizedSpectrum normalize(const NoiseSpectrum& spec, const DerivedQuantities& dq) {
  if (!(dq.omega0 > 0.0)) throw std::invalid_argument("normalize: omega0 > 0 required");
  validate(spec);
  NormalizedSpectrum n;
  n.spec = spec;
  n.omega0 = dq.omega0;
  if (const auto* w = std::get_if<WhiteNoise>(&spec)) {
    n.ktilde = w->A;
    n.alpha = 0.0;
  } else if (const auto* f = std::get_if<FlickerNoise>(&spec)) {
    n.alpha = f->alpha;
    n.ktilde = std::sqrt(constants::mu0 * f->K * f->I * f->I /
                         (2.0 * std::numbers::pi * f->d * f->d * std::pow(dq.omega0, f->alpha)));
  } else {
    n.alpha = std::numeric_limits<double>::quiet_NaN();
    n.ktilde = std::numeric_limits<double>::quiet_NaN();
  }
  return n;
}

CustomSpectrum load_custom_table(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("load_custom_table: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_custom_table: empty file " + csv_path);
  // Header row is required; reject a file whose first row parses as numbers.
  {
    std::istringstream probe(line);
    double x;
    char comma;
    if (probe >> x >> comma) throw std::runtime_error("load_custom_table: missing header row in " + csv_path);
  }
  std::vector<double> w, s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b))
      throw std::runtime_error("load_custom_table: malformed row '" + line + "'");
    w.push_back(std::stod(a));
    s.push_back(std::stod(b));
  }
  CustomSpectrum c;
  c.omega = Eigen::Map<Eigen::ArrayXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  c.S = Eigen::Map<Eigen::ArrayXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  validate_custom(c);
  return c;
}

}  // namespace magnoise
