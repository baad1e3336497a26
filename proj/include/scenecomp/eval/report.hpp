#pragma once

#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scenecomp {

// Named scalar results, kept in insertion order for stable text output.
struct MetricReport {
  std::vector<std::pair<std::string, double>> entries;

  void set(const std::string& name, double value) {
    for (auto& [k, v] : entries)
      if (k == name) {
        v = value;
        return;
      }
    entries.emplace_back(name, value);
  }

  bool has(const std::string& name) const {
    for (const auto& [k, v] : entries)
      if (k == name) return true;
    return false;
  }

  double get(const std::string& name) const {
    for (const auto& [k, v] : entries)
      if (k == name) return v;
    throw std::out_of_range("metric not present: " + name);
  }

  std::string to_text() const {
    std::ostringstream os;
    os << std::setprecision(9);
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    return os.str();
  }

  void merge(const MetricReport& other, const std::string& prefix = "") {
    for (const auto& [k, v] : other.entries) set(prefix + k, v);
  }
};

}  // namespace scenecomp
