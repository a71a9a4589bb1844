#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gauge.hpp"
#include "report.hpp"
#include "riccati.hpp"

namespace fg {

/// Parameter overrides for a gallery example. Time-dependent parameters
/// (omega, R) are expression strings in `expressions`; a number given for
/// one of them is accepted as a constant function.
struct ExampleParams {
  ParamMap numbers;
  std::map<std::string, std::string, std::less<>> expressions;
};

struct ParamInfo {
  enum class Kind { Number, Expression, Derived };
  std::string name;
  Kind kind = Kind::Number;
  /// Default value for Number and Expression, defining formula for Derived.
  std::string default_value;
  std::string description;
};

struct ExampleInfo {
  std::string name;
  /// rotating-frame, so2, su2 or riccati.
  std::string topic;
  std::string title;
  std::size_t dimension = 0;
  std::vector<ParamInfo> params;
};

/// Fully instantiated example.
///
/// `p_known` and `b_known` are the derived ground truth in the library
/// convention x = P y. Stated forms that differ from the ground truth sit in
/// the `*_stated` fields; stated gauges act as new = P_stated old.
struct ExampleSpec {
  std::string name;
  std::string topic;
  std::string title;
  std::size_t dimension = 0;
  /// Resolved parameters: defaults filled in, derived values added.
  ExampleParams params;
  Interval domain{};
  TimeMatrix a;
  std::optional<NonlinearTerm> nonlinear;
  std::optional<TimeMatrix> p_known;
  std::optional<SquareMatrix> b_known;
  std::optional<TimeMatrix> a_stated;
  std::optional<TimeMatrix> p_stated;
  std::optional<SquareMatrix> b_stated;
  /// Stated form of the non-autonomous matrix of the SU(2) examples.
  std::optional<TimeMatrix> k_stated;
  /// Scalar Riccati equation behind a riccati example, its solve span and the
  /// stated transformed constant-coefficient equation.
  std::optional<ScalarRiccati> riccati;
  std::array<double, 2> riccati_span{};
  std::optional<RiccatiCoefficients> transformed;
  std::vector<std::string> notes;
};

/// example1 ... example9 in order.
const std::vector<ExampleInfo>& list_examples();
/// Throws Error(NotFound) for an unknown name.
const ExampleInfo& example_info(std::string_view name);

/// Throws Error(NotFound) for an unknown name and Error(InvalidArgument) or
/// Error(Domain) for bad parameters (eta = 0, k0 = 0, beta = 0, R(t) <= 0).
ExampleSpec build_example(std::string_view name, const ExampleParams& params = {});

/// Runs every applicable check. `tol` bounds the constancy of the pushed
/// matrix and the readback of transformed coefficients; checks that are exact
/// by construction carry fixed roundoff thresholds, Riccati end-to-end checks
/// use 1e-6. Comparisons against stated forms that are known to differ are
/// informational. Numerical failures inside a check become failed checks.
Report verify_example(const ExampleSpec& spec, double tol = 1e-8);
Report verify_example(std::string_view name, const ExampleParams& params = {}, double tol = 1e-8);

/// [[cos a, -sin a], [sin a, cos a]].
SquareMatrix rotation(double angle);
/// Y0 = I and the three generators of the real 4-dimensional representation.
std::array<SquareMatrix, 4> su2_basis();

/// beta(t) = beta0 + integral of omega from 0 to t on [0, t_end], tolerance
/// 1e-10 at nodes and between them. Dimension 1 trajectory.
Trajectory integrate_angle(const Expression& omega, double beta0, double t_end);

/// "x' = f + g x + h x^2" with zero terms dropped.
std::string riccati_equation_text(const RiccatiCoefficients& c);

}  // namespace fg
