#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <string>

#include "floquet_gauge.h"

namespace {

const double pi = std::numbers::pi;

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fg_capi_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(fg_version()) > 0);
  CHECK(std::string(fg_status_name(FG_OK)) == "ok");
  CHECK(std::string(fg_status_name(FG_ERR_NO_REAL_LOGARITHM)) == "no_real_logarithm");
}

TEST_CASE("expressions") {
  fg_expr* e = nullptr;
  REQUIRE(fg_expr_parse("k*sin(t) + x1^2", &e) == FG_OK);
  const char* names[] = {"k"};
  const double values[] = {2.0};
  const double state[] = {3.0};
  double v = 0.0;
  CHECK(fg_expr_eval(e, 0.5, state, 1, names, values, 1, &v) == FG_OK);
  CHECK(v == doctest::Approx(2 * std::sin(0.5) + 9).epsilon(1e-15));

  CHECK(fg_expr_eval(e, 0.5, state, 1, nullptr, nullptr, 0, &v) == FG_ERR_UNBOUND_SYMBOL);
  CHECK(std::strlen(fg_last_error()) > 0);

  fg_expr* d = nullptr;
  REQUIRE(fg_expr_differentiate(e, "t", &d) == FG_OK);
  CHECK(fg_expr_eval(d, 0.5, state, 1, names, values, 1, &v) == FG_OK);
  CHECK(v == doctest::Approx(2 * std::cos(0.5)));
  CHECK(std::strlen(fg_expr_text(d)) > 0);
  fg_expr_free(d);
  fg_expr_free(e);

  fg_expr* bad = nullptr;
  CHECK(fg_expr_parse("sin(t", &bad) == FG_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(fg_expr_parse(nullptr, &bad) == FG_ERR_INVALID_ARGUMENT);
  fg_expr_free(nullptr);
}

TEST_CASE("time matrices") {
  const char* entries[] = {"a*t", "1", "sin(t)", "0"};
  const char* names[] = {"a"};
  const double values[] = {3.0};
  fg_tmatrix* m = nullptr;
  REQUIRE(fg_tmatrix_parse(2, entries, names, values, 1, &m) == FG_OK);
  CHECK(fg_tmatrix_size(m) == 2);
  double out[4];
  REQUIRE(fg_tmatrix_value(m, 2.0, out) == FG_OK);
  CHECK(out[0] == 6.0);
  CHECK(out[2] == std::sin(2.0));
  REQUIRE(fg_tmatrix_derivative(m, 2.0, out) == FG_OK);
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(std::cos(2.0)));
  fg_tmatrix_free(m);

  CHECK(fg_tmatrix_parse(2, entries, nullptr, nullptr, 0, &m) == FG_ERR_UNBOUND_SYMBOL);
  CHECK(fg_tmatrix_parse(0, entries, nullptr, nullptr, 0, &m) == FG_ERR_DIMENSION);
}

TEST_CASE("floquet decomposition") {
  const char* entries[] = {"1", "cos(t)", "-cos(t)", "1"};
  fg_tmatrix* a = nullptr;
  REQUIRE(fg_tmatrix_parse(2, entries, nullptr, nullptr, 0, &a) == FG_OK);
  fg_floquet* d = nullptr;
  REQUIRE(fg_floquet_decompose(a, 2 * pi, &d) == FG_OK);
  CHECK(fg_floquet_size(d) == 2);
  CHECK(fg_floquet_doubled(d) == 0);
  CHECK(fg_floquet_effective_period(d) == doctest::Approx(2 * pi));
  double b[4];
  REQUIRE(fg_floquet_B(d, b) == FG_OK);
  CHECK(std::abs(b[0] - 1) < 1e-6);
  CHECK(std::abs(b[1]) < 1e-6);
  double re[2], im[2];
  REQUIRE(fg_floquet_multipliers(d, re, im) == FG_OK);
  for (int i = 0; i < 2; ++i) {
    CHECK(re[i] == doctest::Approx(std::exp(2 * pi)).epsilon(1e-8));
    CHECK(std::abs(im[i]) < 1e-6);
  }
  double p[4];
  REQUIRE(fg_floquet_P(d, 1.0, p) == FG_OK);
  CHECK(std::abs(p[0] - std::cos(std::sin(1.0))) < 1e-8);
  double mono[4];
  REQUIRE(fg_floquet_monodromy(d, mono) == FG_OK);
  CHECK(mono[0] == doctest::Approx(std::exp(2 * pi)).epsilon(1e-8));

  fg_report* r = nullptr;
  REQUIRE(fg_floquet_verify(d, a, 1e-6, &r) == FG_OK);
  CHECK(fg_report_passed(r) == 1);
  CHECK(std::string(fg_report_json(r)).find("\"floquet-gauge/report/1\"") != std::string::npos);
  fg_report_free(r);
  fg_floquet_free(d);
  fg_tmatrix_free(a);

  const char* aperiodic[] = {"t"};
  REQUIRE(fg_tmatrix_parse(1, aperiodic, nullptr, nullptr, 0, &a) == FG_OK);
  CHECK(fg_floquet_decompose(a, 1.0, &d) == FG_ERR_APERIODIC);
  fg_tmatrix_free(a);
}

TEST_CASE("riccati") {
  fg_riccati* s = nullptr;
  REQUIRE(fg_riccati_solve("1", "0", "1", 0.0, 0.0, 1.0, 0, &s) == FG_OK);
  double y = 0.0;
  REQUIRE(fg_riccati_value(s, 1.0, &y) == FG_OK);
  CHECK(std::abs(y - std::tan(1.0)) < 1e-8);
  fg_riccati_free(s);

  REQUIRE(fg_riccati_solve("1", "0", "1", 0.0, 0.0, 2.0, 0, &s) == FG_OK);
  CHECK(fg_riccati_stopped_at_pole(s) == 1);
  fg_riccati_free(s);

  REQUIRE(fg_riccati_solve("1", "0", "1", 0.0, 0.0, 2.0, 1, &s) == FG_OK);
  CHECK(fg_riccati_stopped_at_pole(s) == 0);
  size_t count = 0;
  double poles[4];
  REQUIRE(fg_riccati_poles(s, poles, 4, &count) == FG_OK);
  REQUIRE(count == 1);
  CHECK(std::abs(poles[0] - pi / 2) < 1e-6);
  CHECK(fg_riccati_poles(s, nullptr, 0, &count) == FG_OK);
  CHECK(count == 1);
  fg_riccati_free(s);

  CHECK(fg_riccati_solve("1", "0", "0", 0.0, 0.0, 1.0, 0, &s) == FG_ERR_DOMAIN);
}

TEST_CASE("gallery") {
  REQUIRE(fg_example_count() == 9);
  CHECK(std::string(fg_example_name(0)) == "example1");
  CHECK(fg_example_name(9) == nullptr);
  fg_report* r = nullptr;
  REQUIRE(fg_example_verify("example8", 1e-8, &r) == FG_OK);
  CHECK(fg_report_passed(r) == 1);
  CHECK(std::string(fg_report_json(r)).find("\"example8\"") != std::string::npos);
  fg_report_free(r);
  CHECK(fg_example_verify("example0", 1e-8, &r) == FG_ERR_NOT_FOUND);
}

TEST_CASE("run") {
  const auto out = scratch("run");
  fg_run_options opts;
  fg_run_options_init(&opts);
  opts.out = out.c_str();
  opts.example = "example9";
  opts.threads = 1;
  char message[256];
  CHECK(fg_run("examples", &opts, message, sizeof message) == 0);
  CHECK(std::string(message) == "examples: 1/1 passed");
  CHECK(std::filesystem::exists(out / "summary.json"));
  CHECK(std::filesystem::exists(out / "example9.json"));

  char tiny[5];
  CHECK(fg_run("examples", &opts, tiny, sizeof tiny) == 0);
  CHECK(std::string(tiny) == "exam");

  opts.example = "example42";
  CHECK(fg_run("examples", &opts, nullptr, 0) == 2);
  CHECK(std::string(fg_last_error()).find("example42") != std::string::npos);

  fg_run_options_init(&opts);
  opts.out = out.c_str();
  CHECK(fg_run("floquet", &opts, message, sizeof message) == 2);
  CHECK(fg_run("bogus", &opts, message, sizeof message) == 2);
  CHECK(fg_run("floquet", nullptr, message, sizeof message) == 2);
  std::filesystem::remove_all(out);
}
