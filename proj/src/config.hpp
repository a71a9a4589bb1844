#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gauge.hpp"
#include "report.hpp"
#include "riccati.hpp"

namespace fg {

inline constexpr const char* kConfigSchema = "floquet-gauge/config/1";

/// Configuration error naming the offending JSON pointer.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : Error(ErrorCode::Config, (pointer.empty() ? std::string("/") : pointer) + ": " + message),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Integrator fields given in the config; unset fields keep the command's
/// defaults.
struct IntegratorOverrides {
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  std::optional<double> max_step;
  std::optional<double> step;
  std::optional<std::size_t> max_steps;
  std::optional<IntegratorOptions::Method> method;

  IntegratorOptions apply(IntegratorOptions base) const;
};

struct RiccatiConfig {
  bool matrix = false;
  // Scalar mode.
  std::string f, g, h;
  double y0 = 0.0;
  std::vector<std::string> alphas;
  // Matrix mode: row-major n x n blocks and Y0.
  std::array<std::vector<std::string>, 4> blocks;
  SquareMatrix y0_matrix;
};

/// Validated system description. Expression strings are checked to parse and
/// to use only t, x1..xn (nonlinear terms) and declared params.
struct SystemConfig {
  std::string name;
  std::size_t dimension = 0;
  /// Row-major n x n expression strings; empty when absent.
  std::vector<std::string> matrix;
  std::optional<std::vector<std::string>> nonlinear;
  std::optional<double> period;
  ParamMap params;
  std::optional<std::array<double, 2>> span;
  IntegratorOverrides integrator;
  std::optional<std::vector<std::string>> gauge_p;
  std::optional<SquareMatrix> target_b;
  std::optional<SquareMatrix> p0;
  std::optional<std::vector<double>> x0;
  std::optional<RiccatiConfig> riccati;

  /// A(t) with params bound; throws ConfigError("/matrix") when absent.
  TimeMatrix system_matrix() const;
  /// Gauge P(t); throws ConfigError("/gauge/P") when absent.
  TimeMatrix gauge_matrix() const;
  NonlinearTerm nonlinear_term() const;
  ScalarRiccati scalar_riccati() const;
  MatrixRiccati matrix_riccati() const;
  std::vector<Expression> alpha_expressions() const;
};

/// `overrides` are "name=value" strings replacing or adding params before
/// validation.
SystemConfig parse_config(const Json& doc, const std::vector<std::string>& overrides = {});
/// Reads and parses a JSON file. I/O and JSON syntax errors are ConfigErrors.
SystemConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Splits "name=value"; throws ConfigError("/params") when malformed.
std::pair<std::string, std::string> split_assignment(const std::string& kv);

}  // namespace fg
