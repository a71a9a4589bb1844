#include "floquet_gauge.h"

#include <cstring>
#include <optional>
#include <string>

#include "commands.hpp"
#include "floquet.hpp"
#include "gallery.hpp"

#ifndef FG_VERSION
#define FG_VERSION "0.0.0"
#endif

struct fg_expr {
  fg::Expression e;
  std::string text;
};

struct fg_tmatrix {
  fg::TimeMatrix m;
};

struct fg_floquet {
  fg::FloquetDecomposition d;
};

struct fg_riccati {
  fg::RiccatiSolution s;
};

struct fg_report {
  fg::Report r;
  std::string json;
};

namespace {

thread_local std::string last_error;

fg_status status_for(fg::ErrorCode c) {
  using fg::ErrorCode;
  switch (c) {
    case ErrorCode::Parse: return FG_ERR_PARSE;
    case ErrorCode::UnboundSymbol: return FG_ERR_UNBOUND_SYMBOL;
    case ErrorCode::Domain: return FG_ERR_DOMAIN;
    case ErrorCode::Dimension: return FG_ERR_DIMENSION;
    case ErrorCode::NearSingular: return FG_ERR_NEAR_SINGULAR;
    case ErrorCode::NoRealLogarithm: return FG_ERR_NO_REAL_LOGARITHM;
    case ErrorCode::Integration: return FG_ERR_INTEGRATION;
    case ErrorCode::OutOfRange: return FG_ERR_OUT_OF_RANGE;
    case ErrorCode::Aperiodic: return FG_ERR_APERIODIC;
    case ErrorCode::Config: return FG_ERR_CONFIG;
    case ErrorCode::InvalidArgument: return FG_ERR_INVALID_ARGUMENT;
    case ErrorCode::NotFound: return FG_ERR_NOT_FOUND;
    case ErrorCode::Convergence: return FG_ERR_CONVERGENCE;
  }
  return FG_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
fg_status guard(F&& body) {
  try {
    body();
    return FG_OK;
  } catch (const fg::Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return FG_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return FG_ERR_INTERNAL;
  }
}

fg_status null_argument(const char* name) {
  last_error = std::string(name) + " must not be NULL";
  return FG_ERR_INVALID_ARGUMENT;
}

fg::ParamMap param_map(const char* const* names, const double* values, size_t count) {
  fg::ParamMap p;
  if (count > 0 && (!names || !values)) throw fg::Error(fg::ErrorCode::InvalidArgument, "parameter arrays must not be NULL");
  for (size_t i = 0; i < count; ++i) {
    if (!names[i]) throw fg::Error(fg::ErrorCode::InvalidArgument, "parameter name must not be NULL");
    p[names[i]] = values[i];
  }
  return p;
}

void copy_matrix(const fg::SquareMatrix& m, double* out) { std::memcpy(out, m.data(), m.values().size() * sizeof(double)); }

fg_status wrap_report(fg::Report r, fg_report** out) {
  auto* h = new fg_report{std::move(r), {}};
  h->json = h->r.to_json().dump(2);
  *out = h;
  return FG_OK;
}

}  // namespace

extern "C" {

const char* fg_version(void) { return FG_VERSION; }

const char* fg_last_error(void) { return last_error.c_str(); }

const char* fg_status_name(fg_status status) {
  switch (status) {
    case FG_OK: return "ok";
    case FG_ERR_PARSE: return "parse";
    case FG_ERR_UNBOUND_SYMBOL: return "unbound_symbol";
    case FG_ERR_DOMAIN: return "domain";
    case FG_ERR_DIMENSION: return "dimension";
    case FG_ERR_NEAR_SINGULAR: return "near_singular";
    case FG_ERR_NO_REAL_LOGARITHM: return "no_real_logarithm";
    case FG_ERR_INTEGRATION: return "integration";
    case FG_ERR_OUT_OF_RANGE: return "out_of_range";
    case FG_ERR_APERIODIC: return "aperiodic";
    case FG_ERR_CONFIG: return "config";
    case FG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case FG_ERR_NOT_FOUND: return "not_found";
    case FG_ERR_CONVERGENCE: return "convergence";
    case FG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

fg_status fg_expr_parse(const char* source, fg_expr** out) {
  if (!source) return null_argument("source");
  if (!out) return null_argument("out");
  return guard([&] {
    fg::Expression e = fg::parse(source);
    *out = new fg_expr{e, fg::to_string(e)};
  });
}

fg_status fg_expr_eval(const fg_expr* e, double t, const double* state, size_t state_len,
                       const char* const* param_names, const double* param_values, size_t param_count,
                       double* out) {
  if (!e) return null_argument("e");
  if (!out) return null_argument("out");
  if (state_len > 0 && !state) return null_argument("state");
  return guard([&] {
    const fg::ParamMap params = param_map(param_names, param_values, param_count);
    fg::Environment env;
    env.time = t;
    env.state = std::span<const double>(state, state_len);
    env.params = &params;
    *out = fg::eval(e->e, env);
  });
}

fg_status fg_expr_differentiate(const fg_expr* e, const char* symbol, fg_expr** out) {
  if (!e) return null_argument("e");
  if (!symbol) return null_argument("symbol");
  if (!out) return null_argument("out");
  return guard([&] {
    fg::Expression d = fg::differentiate(e->e, symbol);
    *out = new fg_expr{d, fg::to_string(d)};
  });
}

const char* fg_expr_text(const fg_expr* e) { return e ? e->text.c_str() : ""; }

void fg_expr_free(fg_expr* e) { delete e; }

fg_status fg_tmatrix_parse(size_t n, const char* const* entries, const char* const* param_names,
                           const double* param_values, size_t param_count, fg_tmatrix** out) {
  if (!entries) return null_argument("entries");
  if (!out) return null_argument("out");
  return guard([&] {
    if (n == 0) throw fg::Error(fg::ErrorCode::Dimension, "matrix size must be positive");
    std::vector<std::string> text;
    for (size_t i = 0; i < n * n; ++i) {
      if (!entries[i]) throw fg::Error(fg::ErrorCode::InvalidArgument, "matrix entry must not be NULL");
      text.emplace_back(entries[i]);
    }
    *out = new fg_tmatrix{fg::TimeMatrix::parse(n, text, param_map(param_names, param_values, param_count))};
  });
}

size_t fg_tmatrix_size(const fg_tmatrix* m) { return m ? m->m.size() : 0; }

fg_status fg_tmatrix_value(const fg_tmatrix* m, double t, double* out) {
  if (!m) return null_argument("m");
  if (!out) return null_argument("out");
  return guard([&] { copy_matrix(m->m.value(t), out); });
}

fg_status fg_tmatrix_derivative(const fg_tmatrix* m, double t, double* out) {
  if (!m) return null_argument("m");
  if (!out) return null_argument("out");
  return guard([&] { copy_matrix(m->m.derivative(t), out); });
}

void fg_tmatrix_free(fg_tmatrix* m) { delete m; }

fg_status fg_floquet_decompose(const fg_tmatrix* a, double period, fg_floquet** out) {
  if (!a) return null_argument("a");
  if (!out) return null_argument("out");
  return guard([&] { *out = new fg_floquet{fg::floquet_decompose(a->m, period)}; });
}

size_t fg_floquet_size(const fg_floquet* d) { return d ? d->d.B.size() : 0; }

int fg_floquet_doubled(const fg_floquet* d) { return d && d->d.doubled ? 1 : 0; }

double fg_floquet_effective_period(const fg_floquet* d) { return d ? d->d.effective_period() : 0.0; }

fg_status fg_floquet_B(const fg_floquet* d, double* out) {
  if (!d) return null_argument("d");
  if (!out) return null_argument("out");
  copy_matrix(d->d.B, out);
  return FG_OK;
}

fg_status fg_floquet_P(const fg_floquet* d, double t, double* out) {
  if (!d) return null_argument("d");
  if (!out) return null_argument("out");
  return guard([&] { copy_matrix(d->d.P.value(t), out); });
}

fg_status fg_floquet_monodromy(const fg_floquet* d, double* out) {
  if (!d) return null_argument("d");
  if (!out) return null_argument("out");
  copy_matrix(d->d.monodromy, out);
  return FG_OK;
}

fg_status fg_floquet_multipliers(const fg_floquet* d, double* re, double* im) {
  if (!d) return null_argument("d");
  if (!re || !im) return null_argument("re/im");
  const auto& ev = d->d.multipliers.eigenvalues;
  for (size_t i = 0; i < ev.size(); ++i) {
    re[i] = ev[i].real();
    im[i] = ev[i].imag();
  }
  return FG_OK;
}

fg_status fg_floquet_verify(const fg_floquet* d, const fg_tmatrix* a, double tol, fg_report** out) {
  if (!d) return null_argument("d");
  if (!a) return null_argument("a");
  if (!out) return null_argument("out");
  return guard([&] { wrap_report(fg::verify_decomposition(d->d, a->m, tol), out); });
}

void fg_floquet_free(fg_floquet* d) { delete d; }

fg_status fg_riccati_solve(const char* f, const char* g, const char* h, double y0, double t0, double t1,
                           int continue_through_poles, fg_riccati** out) {
  if (!f || !g || !h) return null_argument("f/g/h");
  if (!out) return null_argument("out");
  return guard([&] {
    fg::RiccatiOptions opts;
    opts.continue_through_poles = continue_through_poles != 0;
    *out = new fg_riccati{fg::solve_scalar(fg::ScalarRiccati::parse(f, g, h, y0), {t0, t1}, opts)};
  });
}

fg_status fg_riccati_value(const fg_riccati* s, double t, double* out) {
  if (!s) return null_argument("s");
  if (!out) return null_argument("out");
  return guard([&] { *out = s->s.value(t); });
}

int fg_riccati_stopped_at_pole(const fg_riccati* s) { return s && s->s.stopped_at_pole() ? 1 : 0; }

fg_status fg_riccati_poles(const fg_riccati* s, double* out, size_t capacity, size_t* count) {
  if (!s) return null_argument("s");
  if (!count) return null_argument("count");
  if (capacity > 0 && !out) return null_argument("out");
  const auto& p = s->s.poles();
  *count = p.size();
  for (size_t i = 0; i < p.size() && i < capacity; ++i) out[i] = p[i];
  return FG_OK;
}

void fg_riccati_free(fg_riccati* s) { delete s; }

size_t fg_example_count(void) { return fg::list_examples().size(); }

const char* fg_example_name(size_t index) {
  const auto& all = fg::list_examples();
  return index < all.size() ? all[index].name.c_str() : nullptr;
}

fg_status fg_example_verify(const char* name, double tol, fg_report** out) {
  if (!name) return null_argument("name");
  if (!out) return null_argument("out");
  return guard([&] { wrap_report(fg::verify_example(name, {}, tol), out); });
}

int fg_report_passed(const fg_report* r) { return r && r->r.passed() ? 1 : 0; }

const char* fg_report_json(const fg_report* r) { return r ? r->json.c_str() : ""; }

void fg_report_free(fg_report* r) { delete r; }

void fg_run_options_init(fg_run_options* opts) {
  if (opts) *opts = fg_run_options{};
}

int fg_run(const char* command, const fg_run_options* opts, char* message, size_t message_size) {
  fg::CommandResult res;
  if (!command || !opts) {
    res.exit_code = fg::kExitConfigError;
    res.message = "command and options must not be NULL";
  } else {
    fg::CommandOptions o;
    if (opts->config) o.config = opts->config;
    if (opts->out) o.out = opts->out;
    if (opts->tol > 0.0) o.tol = opts->tol;
    if (opts->dense > 0) o.dense = opts->dense;
    o.continue_through_poles = opts->continue_through_poles != 0;
    for (size_t i = 0; i < opts->param_count; ++i)
      if (opts->params && opts->params[i]) o.params.emplace_back(opts->params[i]);
    if (opts->example) o.example = opts->example;
    if (opts->threads > 0) o.threads = opts->threads;
    res = fg::run_command(command, o);
  }
  if (res.exit_code != fg::kExitOk) last_error = res.message;
  if (message && message_size > 0) {
    const size_t n = std::min(message_size - 1, res.message.size());
    std::memcpy(message, res.message.data(), n);
    message[n] = '\0';
  }
  return res.exit_code;
}

}  // extern "C"
