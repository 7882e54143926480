#pragma once

// Sampled observable trajectories. Times are in units of 1/gamma, energies in
// gamma; channels are real-valued and share the time grid.

#include <string>
#include <vector>

namespace spin1 {

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> channels;

  void add_channel(const std::string& name);
  std::vector<double>& channel(const std::string& name);
  const std::vector<double>& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
  std::size_t size() const { return times.size(); }

  // Append one sample; values must match the channel order.
  void push_row(double t, const std::vector<double>& values);

  void validate() const;  // equal lengths, strictly increasing times

  // Comma-separated, header row "t,<channel>,..." with full precision.
  void write_csv(const std::string& path) const;
  static TimeSeries read_csv(const std::string& path);
};

}  // namespace spin1
