#include "spin1/timeseries.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace spin1 {

void TimeSeries::add_channel(const std::string& name) {
  if (has_channel(name)) throw std::invalid_argument("duplicate channel: " + name);
  channels.emplace_back(name, std::vector<double>{});
}

std::vector<double>& TimeSeries::channel(const std::string& name) {
  for (auto& [n, v] : channels)
    if (n == name) return v;
  throw std::out_of_range("no such channel: " + name);
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
  for (auto& [n, v] : channels)
    if (n == name) return v;
  throw std::out_of_range("no such channel: " + name);
}

bool TimeSeries::has_channel(const std::string& name) const {
  for (auto& [n, v] : channels)
    if (n == name) return true;
  return false;
}

void TimeSeries::push_row(double t, const std::vector<double>& values) {
  if (values.size() != channels.size())
    throw std::invalid_argument("push_row: value count mismatch");
  times.push_back(t);
  for (std::size_t i = 0; i < values.size(); ++i) channels[i].second.push_back(values[i]);
}

void TimeSeries::validate() const {
  for (const auto& [n, v] : channels)
    if (v.size() != times.size())
      throw std::runtime_error("TimeSeries: channel length mismatch in " + n);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::runtime_error("TimeSeries: times not strictly increasing");
}

void TimeSeries::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "t";
  for (const auto& [n, v] : channels) f << "," << n;
  f << "\n";
  f << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    f << times[i];
    for (const auto& [n, v] : channels) f << "," << v[i];
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

TimeSeries TimeSeries::read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path);
  TimeSeries ts;
  {
    std::stringstream ss(line);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
      if (first) {
        if (tok != "t") throw std::runtime_error("csv must start with column t: " + path);
        first = false;
      } else {
        ts.add_channel(tok);
      }
    }
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != ts.channels.size() + 1)
      throw std::runtime_error("csv row width mismatch: " + path);
    ts.push_row(row[0], std::vector<double>(row.begin() + 1, row.end()));
  }
  return ts;
}

}  // namespace spin1
