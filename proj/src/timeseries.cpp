#include "netreduce/timeseries.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "netreduce/json_io.hpp"

namespace netreduce {

std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::ode:
      return "ode";
    case SeriesKind::ssa:
      return "ssa";
    case SeriesKind::tau:
      return "tau";
    case SeriesKind::cle:
      return "cle";
    case SeriesKind::external:
      return "external";
  }
  return "external";
}

SeriesKind series_kind_from_string(const std::string& s) {
  if (s == "ode") return SeriesKind::ode;
  if (s == "ssa") return SeriesKind::ssa;
  if (s == "tau") return SeriesKind::tau;
  if (s == "cle") return SeriesKind::cle;
  if (s == "external") return SeriesKind::external;
  throw std::invalid_argument("unknown series kind '" + s + "'");
}

void TimeSeries::validate() const {
  if (static_cast<std::size_t>(states.rows()) != times.size())
    throw std::invalid_argument("time series: record count mismatch");
  if (static_cast<std::size_t>(states.cols()) != species.size())
    throw std::invalid_argument("time series: species count mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("time series: times must be strictly increasing");
  if (!states.allFinite()) throw std::invalid_argument("time series: non-finite state");
}

Eigen::VectorXd time_average(const TimeSeries& ts) {
  const auto d = static_cast<Eigen::Index>(ts.num_species());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  if (ts.num_records() < 2) {
    if (ts.num_records() == 1) return ts.state(0);
    return acc;
  }
  const bool piecewise_constant = ts.kind == SeriesKind::ssa;
  double total = 0.0;
  for (std::size_t i = 1; i < ts.num_records(); ++i) {
    const double h = ts.dt(i);
    const auto prev = ts.states.row(static_cast<Eigen::Index>(i - 1));
    if (piecewise_constant)
      acc += h * prev.transpose();
    else
      acc += 0.5 * h * (prev + ts.states.row(static_cast<Eigen::Index>(i))).transpose();
    total += h;
  }
  return acc / total;
}

TimeSeries concatenate(const TimeSeries& a, const TimeSeries& b) {
  if (a.species != b.species) throw std::invalid_argument("concatenate: species mismatch");
  if (a.times.empty()) return b;
  if (b.times.empty()) return a;
  if (b.times.front() != a.times.back()) throw std::invalid_argument("concatenate: b must start at a's end");
  TimeSeries out = a;
  out.times.insert(out.times.end(), b.times.begin() + 1, b.times.end());
  out.states.conservativeResize(static_cast<Eigen::Index>(out.times.size()), a.states.cols());
  out.states.bottomRows(b.states.rows() - 1) = b.states.bottomRows(b.states.rows() - 1);
  return out;
}

TimeSeries align_series(const TimeSeries& ts, const std::vector<std::string>& species) {
  if (ts.species == species) return ts;
  std::vector<Eigen::Index> cols;
  std::string missing;
  for (const std::string& name : species) {
    auto it = std::find(ts.species.begin(), ts.species.end(), name);
    if (it == ts.species.end()) {
      missing += (missing.empty() ? "" : ", ") + name;
      continue;
    }
    cols.push_back(static_cast<Eigen::Index>(it - ts.species.begin()));
  }
  if (!missing.empty()) throw std::invalid_argument("time series lacks species: " + missing);
  TimeSeries out = ts;
  out.species = species;
  out.states.resize(ts.states.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.states.col(static_cast<Eigen::Index>(k)) = ts.states.col(cols[k]);
  return out;
}

TimeSeries window(const TimeSeries& ts, double t_start) {
  if (ts.times.empty() || !(t_start < ts.times.back())) throw std::invalid_argument("window start beyond the series");
  if (t_start <= ts.times.front()) return ts;
  const auto first = static_cast<std::size_t>(std::lower_bound(ts.times.begin(), ts.times.end(), t_start) - ts.times.begin());
  TimeSeries out = ts;
  const bool exact = ts.times[first] == t_start;
  const std::size_t n = ts.num_records() - first + (exact ? 0 : 1);
  out.times.assign(ts.times.begin() + static_cast<std::ptrdiff_t>(first), ts.times.end());
  out.states.resize(static_cast<Eigen::Index>(n), ts.states.cols());
  if (!exact) {
    out.times.insert(out.times.begin(), t_start);
    const auto prev = ts.states.row(static_cast<Eigen::Index>(first - 1));
    if (ts.kind == SeriesKind::ssa) {
      out.states.row(0) = prev;
    } else {
      const double w = (t_start - ts.times[first - 1]) / (ts.times[first] - ts.times[first - 1]);
      out.states.row(0) = (1.0 - w) * prev + w * ts.states.row(static_cast<Eigen::Index>(first));
    }
  }
  out.states.bottomRows(static_cast<Eigen::Index>(ts.num_records() - first)) =
      ts.states.bottomRows(static_cast<Eigen::Index>(ts.num_records() - first));
  return out;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), end);
}

std::string to_csv(const TimeSeries& ts) {
  std::string out = "t";
  for (const std::string& s : ts.species) out += "," + s;
  out += "\n";
  for (std::size_t i = 0; i < ts.num_records(); ++i) {
    out += format_number(ts.times[i]);
    for (Eigen::Index k = 0; k < ts.states.cols(); ++k) {
      out += ",";
      out += format_number(ts.states(static_cast<Eigen::Index>(i), k));
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ') {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("csv line " + std::to_string(line) + ": malformed number '" + s + "'");
  return v;
}

}  // namespace

TimeSeries from_csv(const std::string& text, SeriesKind kind) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  auto header = split(line);
  if (header.empty() || header[0] != "t") throw std::invalid_argument("csv: header must start with 't'");
  TimeSeries ts;
  ts.kind = kind;
  ts.species.assign(header.begin() + 1, header.end());
  std::vector<double> flat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto parts = split(line);
    if (parts.size() != header.size())
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": wrong number of columns");
    ts.times.push_back(parse_double(parts[0], lineno));
    for (std::size_t k = 1; k < parts.size(); ++k) flat.push_back(parse_double(parts[k], lineno));
  }
  ts.states = Eigen::Map<StateMatrix>(flat.data(), static_cast<Eigen::Index>(ts.times.size()),
                                      static_cast<Eigen::Index>(ts.species.size()));
  ts.validate();
  return ts;
}

void write_csv(const std::string& path, const TimeSeries& ts) { write_text_file(path, to_csv(ts)); }

TimeSeries read_csv(const std::string& path, SeriesKind kind) { return from_csv(read_text_file(path), kind); }

}  // namespace netreduce
