#pragma once

#include <string>
#include <vector>

#include "dpse/signal.hpp"

namespace dpse {

/// Reported for exact (zero-residual) matches.
inline constexpr double kSiSdrCapDb = 140.0;

/// Scale-invariant SDR in dB. With zero_mean both signals are centred first.
double si_sdr(const std::vector<double>& estimate, const std::vector<double>& reference,
              bool zero_mean = false);
double si_sdr(const Waveform& estimate, const Waveform& reference, bool zero_mean = false);

struct MetricReport {
  std::string name;
  double input_si_sdr = 0.0;
  double si_sdr = 0.0;
  double delta = 0.0;
};

MetricReport evaluate_pair(const Waveform& noisy, const Waveform& enhanced, const Waveform& clean,
                           bool zero_mean = false);

struct SummaryStat {
  double mean = 0.0;
  /// 1.96 * sample standard deviation / sqrt(n); 0 for n < 2.
  double half_width = 0.0;
  std::size_t n = 0;
};

SummaryStat summarize(const std::vector<double>& values);

struct AggregateReport {
  SummaryStat input_si_sdr;
  SummaryStat si_sdr;
  SummaryStat delta;
};

AggregateReport aggregate(const std::vector<MetricReport>& reports);

/// One "key=value" line per field.
std::string format_report(const MetricReport& r);
std::string format_aggregate(const AggregateReport& a);

/// {"files": [{name, input_si_sdr, si_sdr, delta}...],
///  "aggregate": {field: {mean, half_width, n}}, "meta": {...}}
std::string reports_to_json(const std::vector<MetricReport>& reports,
                            const std::vector<std::pair<std::string, std::string>>& meta = {});

}  // namespace dpse
