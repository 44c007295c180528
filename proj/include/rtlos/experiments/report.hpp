#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/experiments/runner.hpp"
#include "rtlos/experiments/stats.hpp"

namespace rtlos::experiments {

// All numeric output goes through one fixed format so reruns are byte-identical.
inline void fixed(std::ostream& out, int digits = 6) { out << std::fixed << std::setprecision(digits); }

inline void write_outcomes_csv(std::ostream& out, const std::vector<ReplicationOutcome>& reps,
                               const std::vector<phc::FacilityConfig>& facilities) {
  fixed(out);
  out << "replication,facility,name";
  for (auto n : kMetricNames) out << ',' << n;
  out << ",outpatients,beta,decisions\n";
  for (const auto& r : reps)
    for (std::size_t f = 0; f < r.facilities.size(); ++f) {
      out << r.replication << ',' << f << ',' << facilities[f].name;
      for (double v : r.facilities[f].values) out << ',' << v;
      out << ',' << r.facilities[f].outpatients << ',' << r.beta << ',' << r.decisions << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const Summary& s, const std::vector<phc::FacilityConfig>& facilities) {
  fixed(out);
  out << "scope,metric,mean,sd,n\n";
  for (std::size_t f = 0; f < s.facility.size(); ++f)
    for (std::size_t m = 0; m < kMetricCount; ++m)
      out << facilities[f].name << ',' << kMetricNames[m] << ',' << s.facility[f][m].mean << ','
          << s.facility[f][m].sd << ',' << s.facility[f][m].n << '\n';
  if (s.facility.size() >= 2)
    for (std::size_t m = 0; m < kMetricCount; ++m)
      out << "delta_net," << kMetricNames[m] << ',' << s.delta[m].mean << ',' << s.delta[m].sd << ','
          << s.delta[m].n << '\n';
  out << "network,beta," << s.beta.mean << ',' << s.beta.sd << ',' << s.beta.n << '\n';
}

inline std::string cell(const MeanSd& v, int digits = 3, const char* unit = "") {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v.mean << unit << " (" << v.sd << ")";
  return out.str();
}

// Markdown table: one row per metric, one column per facility plus Delta_net.
inline void write_summary_md(std::ostream& out, const std::string& title, const Summary& s,
                             const std::vector<phc::FacilityConfig>& facilities) {
  out << "## " << title << "\n\n"
      << "Mean (SD) over " << s.replications << " replications.\n\n| Outcome |";
  for (const auto& f : facilities) out << ' ' << f.name << " |";
  if (facilities.size() >= 2) out << " Delta_net |";
  out << "\n|---|";
  for (std::size_t f = 0; f < facilities.size(); ++f) out << "---|";
  if (facilities.size() >= 2) out << "---|";
  out << '\n';
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    out << "| " << kMetricNames[m] << " |";
    for (std::size_t f = 0; f < s.facility.size(); ++f) out << ' ' << cell(s.facility[f][m]) << " |";
    if (facilities.size() >= 2) out << ' ' << cell(s.delta[m], 2, "%") << " |";
    out << '\n';
  }
  out << "| beta (%) | " << cell(s.beta, 2) << " |";
  for (std::size_t f = 1; f < facilities.size(); ++f) out << " |";
  if (facilities.size() >= 2) out << " |";
  out << "\n\n";
}

inline void write_lambda_trace_csv(std::ostream& out, const rthfa::LambdaCalibration& c,
                                   const std::vector<phc::FacilityConfig>& facilities, double t0_days) {
  fixed(out);
  out << "window,day";
  for (const auto& f : facilities) out << ",lambda_" << f.name << ",arrivals_" << f.name;
  out << ",converged\n";
  for (std::size_t i = 0; i < c.trace.front().size(); ++i) {
    out << i << ',' << static_cast<double>(i) * t0_days;
    for (std::size_t f = 0; f < c.trace.size(); ++f) {
      out << ',' << c.trace[f][i] << ',';
      if (i > 0) out << c.arrivals[f][i - 1];
    }
    out << ',' << (c.converged && i + 1 == c.trace.front().size() ? 1 : 0) << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points,
                            const std::vector<phc::FacilityConfig>& facilities) {
  fixed(out);
  out << "compliance,delta_rho_doc,delta_rho_doc_sd,delta_w_opd,delta_w_opd_sd,delta_los,delta_los_sd";
  for (const auto& f : facilities) out << ",los_" << f.name;
  out << ",beta\n";
  for (const auto& p : points) {
    const auto& s = p.result.summary;
    const auto rho = static_cast<std::size_t>(Metric::RhoDoc);
    const auto w = static_cast<std::size_t>(Metric::WOpd);
    const auto los = static_cast<std::size_t>(Metric::Los);
    out << p.compliance << ',' << s.delta[rho].mean << ',' << s.delta[rho].sd << ',' << s.delta[w].mean << ','
        << s.delta[w].sd << ',' << s.delta[los].mean << ',' << s.delta[los].sd;
    for (const auto& f : s.facility) out << ',' << f[los].mean;
    out << ',' << s.beta.mean << '\n';
  }
}

inline void write_accuracy_csv(std::ostream& out, const AccuracyReport& r) {
  fixed(out, 4);
  out << "table,stratum,train,test,knn_mape,aqt_mape\n";
  auto rows = [&out](const char* table, const std::vector<AccuracyRow>& v) {
    for (const auto& row : v) {
      out << table << ',' << row.stratum << ',' << row.train << ',' << row.test << ',';
      if (row.knn) out << *row.knn;
      out << ',';
      if (row.aqt) out << *row.aqt;
      out << '\n';
    }
  };
  rows("flow", r.flow);
  rows("station", r.station);
}

inline void write_accuracy_md(std::ostream& out, const AccuracyReport& r) {
  out << "## Predictor accuracy (MAPE, %)\n\n| Kind | Stratum | Test rows | Sim-ML (KNN) | AQT |\n|---|---|---|---|---|\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << *v;
    return s.str();
  };
  for (const auto* v : {&r.flow, &r.station})
    for (const auto& row : *v)
      out << "| " << (v == &r.flow ? "flow" : "station") << " | " << row.stratum << " | " << row.test << " | "
          << opt(row.knn) << " | " << opt(row.aqt) << " |\n";
  out << '\n';
}

struct SummaryRow {
  std::string scope;
  std::string metric;
  std::string mean;
  std::string sd;
  std::string n;
};

inline std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "scope,metric,mean,sd,n") throw ConfigError("not a summary.csv file");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = simml::detail::split_csv(line);
    if (cells.size() != 5) throw ConfigError("malformed summary.csv row '" + line + "'");
    rows.push_back({cells[0], cells[1], cells[2], cells[3], cells[4]});
  }
  return rows;
}

// One markdown section per summary file.
inline void write_report_md(std::ostream& out, const std::vector<std::pair<std::string, std::vector<SummaryRow>>>& parts) {
  out << "# RT-LOS experiment report\n\n";
  for (const auto& [title, rows] : parts) {
    out << "## " << title << "\n\n| Scope | Metric | Mean | SD | n |\n|---|---|---|---|---|\n";
    for (const auto& r : rows)
      out << "| " << r.scope << " | " << r.metric << " | " << r.mean << " | " << r.sd << " | " << r.n << " |\n";
    out << '\n';
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write '" + path + "'");
  return out;
}

}  // namespace rtlos::experiments
