#pragma once

// Time series containers shared by the solver, the observers and the harness.

#include <aclab/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace aclab {

/// Column-named numeric table; rows are appended, columns may appear late
/// (older rows are back-filled with NaN).
class Table {
 public:
  void begin_row() { rows_.emplace_back(columns_.size(), std::numeric_limits<double>::quiet_NaN()); }

  void set(const std::string& name, double value) {
    if (rows_.empty()) throw UsageError("Table::set before begin_row");
    auto c = column_index(name);
    if (!c) {
      columns_.push_back(name);
      for (auto& r : rows_) r.push_back(std::numeric_limits<double>::quiet_NaN());
      c = columns_.size() - 1;
    }
    rows_.back()[*c] = value;
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<std::string>& columns() const { return columns_; }
  bool has(const std::string& name) const { return column_index(name).has_value(); }

  std::vector<double> column(const std::string& name) const {
    auto c = column_index(name);
    if (!c) throw UsageError("unknown column '" + name + "'");
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[*c]);
    return out;
  }

  double at(std::size_t row, const std::string& name) const {
    auto c = column_index(name);
    if (!c) throw UsageError("unknown column '" + name + "'");
    return rows_.at(row)[*c];
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    char buf[40];
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", r[c]);
        os << (c ? "," : "") << buf;
      }
      os << '\n';
    }
  }

 private:
  std::optional<std::size_t> column_index(const std::string& name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns_.begin());
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Output of a solver run: snapshot series (column "t" first) plus per-step
/// monitor tables keyed by monitor name.
struct RunRecord {
  std::string config_echo;
  Table snapshots;
  std::map<std::string, Table> step_series;

  std::vector<double> times() const { return snapshots.empty() ? std::vector<double>{} : snapshots.column("t"); }

  void begin_snapshot(double t) {
    if (!snapshots.empty()) {
      const double last = snapshots.at(snapshots.size() - 1, "t");
      if (!(t > last)) throw UsageError("snapshot times must be strictly increasing");
    }
    snapshots.begin_row();
    snapshots.set("t", t);
  }
};

/// Trapezoid rule in time over the samples, clipped to [t1, t2] with linear
/// interpolation at the window ends.
inline double window_integral(const std::vector<double>& t, const std::vector<double>& v, double t1, double t2) {
  if (t.size() != v.size() || t.empty()) throw UsageError("window_integral: empty or mismatched series");
  if (!(t1 < t2)) throw UsageError("window_integral: need t1 < t2");
  const double slack = 1e-9 * std::max(1.0, std::abs(t.back()));
  if (t1 < t.front() - slack || t2 > t.back() + slack) throw UsageError("window outside record");
  auto interp = [&](double s) {
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double a = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return v[k - 1] + a * (v[k] - v[k - 1]);
  };
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(t1, interp(t1));
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] > t1 && t[k] < t2) pts.emplace_back(t[k], v[k]);
  pts.emplace_back(t2, interp(t2));
  double sum = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    sum += 0.5 * (pts[k].first - pts[k - 1].first) * (pts[k].second + pts[k - 1].second);
  return sum;
}

}  // namespace aclab
