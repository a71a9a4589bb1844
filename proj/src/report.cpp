#include "report.hpp"

#include <cmath>

namespace fg {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Check& Report::add(std::string check_name, double value, double tolerance, std::string grid, std::string note) {
  Check c;
  c.name = std::move(check_name);
  c.value = value;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && value <= tolerance;
  c.grid = std::move(grid);
  c.note = std::move(note);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& Report::add_at_least(std::string check_name, double value, double threshold, std::string grid,
                            std::string note) {
  Check& c = add(std::move(check_name), value, threshold, std::move(grid), std::move(note));
  c.comparison = Check::Comparison::AtLeast;
  c.passed = !std::isnan(value) && value >= threshold;
  return c;
}

Check& Report::add_info(std::string check_name, double value, double tolerance, std::string grid, std::string note) {
  Check& c = add(std::move(check_name), value, tolerance, std::move(grid), std::move(note));
  c.assertable = false;
  return c;
}

bool Report::passed() const {
  for (const auto& c : checks)
    if (c.assertable && !c.passed) return false;
  return true;
}

const Check* Report::find(const std::string& check_name) const {
  for (const auto& c : checks)
    if (c.name == check_name) return &c;
  return nullptr;
}

Json Report::to_json() const {
  Json j;
  j["schema"] = kReportSchema;
  j["name"] = name;
  j["passed"] = passed();
  Json list = Json::array();
  for (const auto& c : checks) {
    Json e;
    e["name"] = c.name;
    e["value"] = number(c.value);
    e["tolerance"] = number(c.tolerance);
    e["comparison"] = c.comparison == Check::Comparison::AtMost ? "<=" : ">=";
    e["passed"] = c.passed;
    e["assertable"] = c.assertable;
    if (!c.grid.empty()) e["grid"] = c.grid;
    if (!c.note.empty()) e["note"] = c.note;
    list.push_back(std::move(e));
  }
  j["checks"] = std::move(list);
  j["warnings"] = warnings;
  j["data"] = data;
  return j;
}

Json matrix_to_json(const std::vector<double>& row_major, std::size_t n) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(number(row_major[i * n + j]));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fg
