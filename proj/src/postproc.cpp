#include "vibeam/postproc.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>

#include <fftw3.h>

#include "vibeam/util.hpp"

namespace vibeam {

double rms(const Vec& samples) {
  if (samples.size() == 0) throw ValidationError("rms of empty sample set");
  return std::sqrt(samples.squaredNorm() / samples.size());
}

double rms(const TimeSeries& series, const std::string& channel) {
  return rms(Vec(series.column(channel)));
}

namespace {

// First upward zero-phase time of sin(omega t + phase) at or after t0.
double anchor_time(double t0, double omega, double phase) {
  double k = std::ceil((omega * t0 + phase) / (2.0 * M_PI) - 1e-12);
  return (2.0 * M_PI * k - phase) / omega;
}

}  // namespace

PeriodAmplitudes per_period_amplitudes(const TimeSeries& series, const std::string& channel,
                                       double omega) {
  if (omega <= 0.0) throw ValidationError("excitation frequency must be positive");
  const Vec x = series.column(channel);
  const double period = 2.0 * M_PI / omega;
  double phase = 0.0;
  if (auto it = series.meta.find("phase"); it != series.meta.end()) phase = it->second;
  const double t_start = anchor_time(series.t[0], omega, phase);
  const double t_last = series.t[series.n_samples() - 1];
  const int n_periods = static_cast<int>(std::floor((t_last - t_start) / period + 1e-9));
  if (n_periods < 2) throw ValidationError("series must span at least two excitation periods");

  PeriodAmplitudes out;
  out.periods = n_periods;
  out.min = std::numeric_limits<double>::infinity();
  out.max = 0.0;
  double sum = 0.0;
  int idx = 0;
  for (int p = 0; p < n_periods; ++p) {
    double t_hi = t_start + (p + 1) * period;
    double peak = 0.0;
    bool seen = false;
    while (idx < series.n_samples() && series.t[idx] < t_hi) {
      if (series.t[idx] >= t_start) {
        peak = std::max(peak, std::abs(x[idx]));
        seen = true;
      }
      ++idx;
    }
    if (!seen) continue;
    out.min = std::min(out.min, peak);
    out.max = std::max(out.max, peak);
    sum += peak;
  }
  out.mean = sum / n_periods;
  return out;
}

Demodulation demodulate_fundamental(const TimeSeries& series, const std::string& channel,
                                    double omega) {
  if (omega <= 0.0) throw ValidationError("excitation frequency must be positive");
  const Vec x = series.column(channel);
  const double period = 2.0 * M_PI / omega;
  const double span = series.t[series.n_samples() - 1] - series.t[0];
  const int n_periods = static_cast<int>(std::floor(span / period + 1e-9));
  if (n_periods < 1) throw ValidationError("series must span at least one excitation period");
  const double t_end = series.t[0] + n_periods * period;

  double i_sin = 0.0, i_cos = 0.0;
  long n = 0;
  for (int k = 0; k < series.n_samples() && series.t[k] < t_end; ++k) {
    i_sin += x[k] * std::sin(omega * series.t[k]);
    i_cos += x[k] * std::cos(omega * series.t[k]);
    ++n;
  }
  i_sin *= 2.0 / n;
  i_cos *= 2.0 / n;
  Demodulation out;
  out.amplitude = std::hypot(i_sin, i_cos);
  out.phase = std::atan2(i_cos, i_sin);
  return out;
}

ActivityStats contact_activity(const TimeSeries& series) {
  const int n = series.n_samples();
  ActivityStats out;
  out.active.assign(n, 0);

  if (series.has_channel("active")) {
    Vec a = series.column("active");
    for (int i = 0; i < n; ++i) out.active[i] = a[i] != 0.0 ? 1 : 0;
  } else {
    bool found = false;
    for (int p = 0;; ++p) {
      std::string gap_name = "gap_n_" + std::to_string(p);
      if (!series.has_channel(gap_name)) break;
      auto it = series.meta.find("g0_" + std::to_string(p));
      double g0 = it != series.meta.end() ? it->second : 0.0;
      Vec g = series.column(gap_name);
      for (int i = 0; i < n; ++i)
        if (g[i] + g0 <= 0.0) out.active[i] = 1;
      found = true;
    }
    if (!found) throw ValidationError("no activity or gap channels in series");
  }

  long n_active = 0;
  for (char a : out.active) n_active += a;
  out.fraction_active = static_cast<double>(n_active) / n;

  // active intervals
  std::vector<std::pair<int, int>> intervals;
  for (int i = 0; i < n;) {
    if (!out.active[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && out.active[j]) ++j;
    intervals.emplace_back(i, j - 1);
    i = j;
  }
  out.impacts = static_cast<int>(intervals.size());
  if (intervals.empty()) return out;

  double half_period = 0.0;
  if (auto it = series.meta.find("omega"); it != series.meta.end() && it->second > 0.0)
    half_period = M_PI / it->second;

  ImpactCluster current{series.t[intervals[0].first], series.t[intervals[0].second], 1};
  for (std::size_t k = 1; k < intervals.size(); ++k) {
    double gap = series.t[intervals[k].first] - series.t[intervals[k - 1].second];
    if (half_period > 0.0 && gap <= half_period) {
      current.t_end = series.t[intervals[k].second];
      current.impacts += 1;
    } else {
      out.clusters.push_back(current);
      current = {series.t[intervals[k].first], series.t[intervals[k].second], 1};
    }
  }
  out.clusters.push_back(current);
  return out;
}

Spectrogram wavelet_spectrogram(const TimeSeries& series, const std::string& channel,
                                double f_min_hz, double f_max_hz, int n_freqs) {
  const int n = series.n_samples();
  const double dt = series.dt();
  const double nyquist = 0.5 / dt;
  if (f_min_hz <= 0.0 || f_max_hz <= f_min_hz) throw ValidationError("bad frequency range");
  if (f_max_hz > nyquist) throw ValidationError("frequency range exceeds Nyquist limit");
  if (n_freqs < 2) throw ValidationError("need at least two frequency bins");

  const Vec x = series.column(channel);
  int m = 1;
  while (m < 2 * n) m <<= 1;  // zero padding against wrap-around

  std::vector<double> in(m, 0.0);
  for (int i = 0; i < n; ++i) in[i] = x[i];
  std::vector<std::complex<double>> spec_half(m / 2 + 1);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(m, in.data(),
                                       reinterpret_cast<fftw_complex*>(spec_half.data()),
                                       FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  Spectrogram out;
  out.t = series.t;
  out.freqs_hz.resize(n_freqs);
  out.log10_mag.resize(n_freqs, n);
  const double log_lo = std::log(f_min_hz), log_hi = std::log(f_max_hz);
  const double omega0 = 6.0;  // Morlet center frequency parameter

  std::vector<std::complex<double>> prod(m), w(m);
  fftw_plan inv = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(prod.data()),
                                   reinterpret_cast<fftw_complex*>(w.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE);

  for (int fi = 0; fi < n_freqs; ++fi) {
    double f = std::exp(log_lo + (log_hi - log_lo) * fi / (n_freqs - 1));
    out.freqs_hz[fi] = f;
    double scale = omega0 / (2.0 * M_PI * f);
    double norm = std::sqrt(2.0 * M_PI * scale / dt) * std::pow(M_PI, -0.25);
    std::fill(prod.begin(), prod.end(), std::complex<double>(0.0, 0.0));
    // analytic wavelet: positive frequencies only
    for (int k = 1; k <= m / 2; ++k) {
      double omega_k = 2.0 * M_PI * k / (m * dt);
      double arg = scale * omega_k - omega0;
      double window = norm * std::exp(-0.5 * arg * arg);
      prod[k] = spec_half[k] * window;
    }
    fftw_execute(inv);
    for (int i = 0; i < n; ++i) {
      double mag = std::abs(w[i]) / m;
      out.energy += mag * mag;
      out.log10_mag(fi, i) = std::log10(std::max(mag, 1e-300));
    }
  }
  fftw_destroy_plan(inv);
  return out;
}

void write_spectrogram(const std::string& path_prefix, const Spectrogram& spec) {
  {
    std::ofstream out(path_prefix + "_freqs.csv");
    if (!out) throw ValidationError("cannot write " + path_prefix + "_freqs.csv");
    for (Eigen::Index i = 0; i < spec.freqs_hz.size(); ++i)
      out << format_double(spec.freqs_hz[i]) << "\n";
  }
  {
    std::ofstream out(path_prefix + "_times.csv");
    if (!out) throw ValidationError("cannot write " + path_prefix + "_times.csv");
    for (Eigen::Index i = 0; i < spec.t.size(); ++i) out << format_double(spec.t[i]) << "\n";
  }
  std::ofstream out(path_prefix + "_log10mag.csv");
  if (!out) throw ValidationError("cannot write " + path_prefix + "_log10mag.csv");
  for (Eigen::Index i = 0; i < spec.log10_mag.rows(); ++i) {
    for (Eigen::Index j = 0; j < spec.log10_mag.cols(); ++j) {
      if (j) out << ",";
      out << format_double(spec.log10_mag(i, j));
    }
    out << "\n";
  }
}

}  // namespace vibeam
