#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fg {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "floquet-gauge/report/1";

struct Check {
  enum class Comparison { AtMost, AtLeast };

  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::AtMost;
  bool passed = false;
  /// Informational checks are reported but never decide the verdict.
  bool assertable = true;
  std::string grid;
  std::string note;
};

struct Report {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  Json data = Json::object();

  Check& add(std::string check_name, double value, double tolerance, std::string grid = {}, std::string note = {});
  Check& add_at_least(std::string check_name, double value, double threshold, std::string grid = {},
                      std::string note = {});
  Check& add_info(std::string check_name, double value, double tolerance, std::string grid = {},
                  std::string note = {});

  /// True when every assertable check passed.
  bool passed() const;
  const Check* find(const std::string& check_name) const;
  Json to_json() const;
};

Json matrix_to_json(const std::vector<double>& row_major, std::size_t n);

}  // namespace fg
