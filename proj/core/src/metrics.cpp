#include "dpse/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dpse {

double si_sdr(const std::vector<double>& estimate, const std::vector<double>& reference,
              bool zero_mean) {
  if (estimate.size() != reference.size()) {
    throw std::invalid_argument("si_sdr: estimate and reference lengths differ");
  }
  if (reference.empty()) throw std::invalid_argument("si_sdr: empty signals");
  double me = 0.0;
  double mr = 0.0;
  if (zero_mean) {
    const auto n = static_cast<double>(reference.size());
    me = std::accumulate(estimate.begin(), estimate.end(), 0.0) / n;
    mr = std::accumulate(reference.begin(), reference.end(), 0.0) / n;
  }
  double er = 0.0;
  double rr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    er += (estimate[i] - me) * (reference[i] - mr);
    rr += (reference[i] - mr) * (reference[i] - mr);
  }
  if (!(rr > 0.0)) throw std::invalid_argument("si_sdr: reference has zero energy");
  const double alpha = er / rr;
  double target = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * (reference[i] - mr);
    const double e = (estimate[i] - me) - s;
    target += s * s;
    residual += e * e;
  }
  if (residual == 0.0) return kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::min(kSiSdrCapDb, 10.0 * std::log10(target / residual));
}

double si_sdr(const Waveform& estimate, const Waveform& reference, bool zero_mean) {
  return si_sdr(estimate.samples, reference.samples, zero_mean);
}

MetricReport evaluate_pair(const Waveform& noisy, const Waveform& enhanced, const Waveform& clean,
                           bool zero_mean) {
  MetricReport r;
  r.input_si_sdr = si_sdr(noisy, clean, zero_mean);
  r.si_sdr = si_sdr(enhanced, clean, zero_mean);
  r.delta = r.si_sdr - r.input_si_sdr;
  return r;
}

SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.half_width = 1.96 * sd / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

AggregateReport aggregate(const std::vector<MetricReport>& reports) {
  std::vector<double> in, out, d;
  for (const auto& r : reports) {
    in.push_back(r.input_si_sdr);
    out.push_back(r.si_sdr);
    d.push_back(r.delta);
  }
  return {summarize(in), summarize(out), summarize(d)};
}

std::string format_report(const MetricReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  if (!r.name.empty()) os << "file=" << r.name << '\n';
  os << "input_si_sdr=" << r.input_si_sdr << '\n'
     << "si_sdr=" << r.si_sdr << '\n'
     << "delta=" << r.delta << '\n';
  return os.str();
}

std::string format_aggregate(const AggregateReport& a) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  auto line = [&](const char* key, const SummaryStat& s) {
    os << key << "_mean=" << s.mean << '\n' << key << "_half_width=" << s.half_width << '\n';
  };
  os << "n=" << a.si_sdr.n << '\n';
  line("input_si_sdr", a.input_si_sdr);
  line("si_sdr", a.si_sdr);
  line("delta", a.delta);
  return os.str();
}

std::string reports_to_json(const std::vector<MetricReport>& reports,
                            const std::vector<std::pair<std::string, std::string>>& meta) {
  using nlohmann::json;
  json files = json::array();
  for (const auto& r : reports) {
    files.push_back({{"name", r.name},
                     {"input_si_sdr", r.input_si_sdr},
                     {"si_sdr", r.si_sdr},
                     {"delta", r.delta}});
  }
  const auto agg = aggregate(reports);
  auto stat = [](const SummaryStat& s) {
    return json{{"mean", s.mean}, {"half_width", s.half_width}, {"n", s.n}};
  };
  json m = json::object();
  for (const auto& [k, v] : meta) m[k] = v;
  json doc = {{"files", files},
              {"aggregate",
               {{"input_si_sdr", stat(agg.input_si_sdr)},
                {"si_sdr", stat(agg.si_sdr)},
                {"delta", stat(agg.delta)}}},
              {"meta", m}};
  return doc.dump(2) + "\n";
}

}  // namespace dpse
