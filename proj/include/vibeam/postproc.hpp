#pragma once

#include "vibeam/time_series.hpp"

namespace vibeam {

double rms(const Vec& samples);
double rms(const TimeSeries& series, const std::string& channel);

struct PeriodAmplitudes {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  int periods = 0;
};

/// Zero-to-peak amplitude per excitation period; extremes and average over
/// the periods. Partitioning is anchored at excitation zero phase; the
/// trailing partial period is dropped.
PeriodAmplitudes per_period_amplitudes(const TimeSeries& series, const std::string& channel,
                                       double omega);

struct Demodulation {
  double amplitude = 0.0;
  double phase = 0.0;  // rad, x ~ A sin(omega t + phase)
};

/// Synchronous demodulation at `omega` over the largest whole number of
/// periods in the record.
Demodulation demodulate_fundamental(const TimeSeries& series, const std::string& channel,
                                    double omega);

struct ImpactCluster {
  double t_start = 0.0;
  double t_end = 0.0;
  int impacts = 0;  // distinct active intervals merged into this cluster
};

struct ActivityStats {
  double fraction_active = 0.0;
  int impacts = 0;
  std::vector<ImpactCluster> clusters;
  std::vector<char> active;  // per-sample boolean signal
};

/// Activity signal and impact-cluster segmentation. Consecutive active
/// intervals separated by less than half an excitation period belong to one
/// cluster. Uses the "active" channel when present, otherwise derives the
/// signal from the per-pair normal gap channels plus the clearance metadata.
ActivityStats contact_activity(const TimeSeries& series);

struct Spectrogram {
  Vec freqs_hz;      // log-spaced
  Vec t;
  Mat log10_mag;     // n_freqs x n_samples
  double energy = 0.0;  // sum of |W|^2 over the map (linear scale)
};

/// Continuous wavelet transform with the analytic Morlet mother wavelet
/// (center frequency parameter 6), magnitudes in log10.
Spectrogram wavelet_spectrogram(const TimeSeries& series, const std::string& channel,
                                double f_min_hz, double f_max_hz, int n_freqs);

void write_spectrogram(const std::string& path_prefix, const Spectrogram& spec);

}  // namespace vibeam
