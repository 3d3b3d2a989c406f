#include "coordfeas/run_output.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <variant>

#include "coordfeas/version.hpp"
#include "json.hpp"

namespace coordfeas {

namespace {

void put_number(std::ostream& os, double v) {
  if (std::isnan(v)) return;  // blank cell
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

std::vector<std::string> csv_columns(const Scenario& s) {
  std::vector<std::string> cols{"t"};
  for (size_t v = 0; v < s.kinds.size(); ++v) {
    const std::string idx = std::to_string(v);
    cols.push_back("x_" + idx);
    cols.push_back("y_" + idx);
    cols.push_back("theta_" + idx);
    if (std::holds_alternative<CarLike>(s.kinds[v])) cols.push_back("phi_" + idx);
  }
  for (size_t v = 0; v < s.kinds.size(); ++v) {
    for (int l = 1; l <= control_dim(s.kinds[v]); ++l) {
      cols.push_back("u_" + std::to_string(v) + "_" + std::to_string(l));
    }
  }
  const std::vector<std::string> layout = residual_layout(s);
  for (const std::string& name : layout) cols.push_back("g_" + name);
  for (const std::string& name : layout) cols.push_back("a_" + name);
  for (int l = 1; l <= s.weight_columns(); ++l) {
    cols.push_back("w_" + std::to_string(l));
  }
  return cols;
}

void write_csv(std::ostream& os, const Scenario& s, const TrajectoryLog& log) {
  const std::vector<std::string> cols = csv_columns(s);
  for (size_t k = 0; k < cols.size(); ++k) {
    if (k != 0) os << ',';
    os << cols[k];
  }
  os << '\n';

  for (const Sample& smp : log.samples) {
    put_number(os, smp.t);
    for (int k = 0; k < smp.p.size(); ++k) {
      os << ',';
      put_number(os, smp.p(k));
    }
    for (const Vec& u : smp.controls) {
      for (int k = 0; k < u.size(); ++k) {
        os << ',';
        put_number(os, u(k));
      }
    }
    for (const double g : smp.residuals) {
      os << ',';
      put_number(os, g);
    }
    for (const std::uint8_t flag : smp.active) {
      os << ',' << (flag ? '1' : '0');
    }
    for (int k = 0; k < smp.weights.size(); ++k) {
      os << ',';
      put_number(os, smp.weights(k));
    }
    os << '\n';
  }
}

std::string report_json(const Scenario& s, const TrajectoryLog& log,
                        double wall_seconds, const std::string& digest) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["digest"] = digest;
  doc["status"] = log.completed ? "completed" : "aborted";
  doc["feasibility"] = status_name(log.last_status);
  doc["message"] = log.message;
  doc["samples"] = log.samples.size();
  doc["wall_seconds"] = wall_seconds;

  int activate = 0, deactivate = 0, reselect = 0;
  for (const Event& e : log.events) {
    switch (e.kind) {
      case EventKind::Activate: ++activate; break;
      case EventKind::Deactivate: ++deactivate; break;
      case EventKind::Reselect: ++reselect; break;
    }
  }
  doc["events"] = {{"activate", activate},
                   {"deactivate", deactivate},
                   {"reselect", reselect},
                   {"total", log.events.size()}};

  nlohmann::json ranges = nlohmann::json::object();
  if (!log.samples.empty()) {
    const std::vector<std::string> layout = residual_layout(s);
    for (size_t slot = 0; slot < layout.size(); ++slot) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const Sample& smp : log.samples) {
        lo = std::min(lo, smp.residuals[slot]);
        hi = std::max(hi, smp.residuals[slot]);
      }
      ranges["g_" + layout[slot]] = {{"min", lo}, {"max", hi}};
    }
  }
  doc["residuals"] = std::move(ranges);
  return doc.dump(2) + "\n";
}

}  // namespace coordfeas
