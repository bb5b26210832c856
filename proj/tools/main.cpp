// branchwave command line: travelling waves, PDE fronts, Evans winding numbers and closed forms.
// Talks to the library only through the C interface.

#include "branchwave/branchwave.h"

#include "CLI11.hpp"
#include "csv.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

// Stable exit statuses.
enum Exit : int {
  exit_ok = 0,
  exit_failed = 1,
  exit_regime = 2,
  exit_blow_up = 3,
  exit_resolution = 4,
  exit_usage = 64,
};

class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

[[noreturn]] void usage(const std::string& what) { throw CommandError(exit_usage, what); }

int exit_for(bw_status s) {
  switch (s) {
    case BW_OK: return exit_ok;
    case BW_ERR_INVALID_ARGUMENT:
    case BW_ERR_SHAPE:
    case BW_ERR_DOMAIN:
    case BW_ERR_NOT_UNSTABLE: return exit_usage;
    case BW_ERR_NEGATIVITY:
    case BW_ERR_OSCILLATORY_REGIME: return exit_regime;
    case BW_ERR_BLOW_UP: return exit_blow_up;
    case BW_ERR_RESOLUTION: return exit_resolution;
    default: return exit_failed;
  }
}

void check(bw_status s, const std::string& what) {
  if (s != BW_OK) throw CommandError(exit_for(s), what + ": " + bw_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using WavePtr = std::unique_ptr<bw_wave, Deleter<bw_wave, bw_wave_destroy>>;
using SeriesPtr = std::unique_ptr<bw_series, Deleter<bw_series, bw_series_destroy>>;
using SpectralPtr = std::unique_ptr<bw_spectral, Deleter<bw_spectral, bw_spectral_destroy>>;
using WindingPtr = std::unique_ptr<bw_winding, Deleter<bw_winding, bw_winding_destroy>>;
using VerifyPtr = std::unique_ptr<bw_verify, Deleter<bw_verify, bw_verify_destroy>>;

// JSON has no NaN; missing values become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double to_number(const std::string& text, const std::string& what) {
  try {
    return csvio::parse(trim(text));
  } catch (const std::exception&) {
    usage("cannot read " + what + " from '" + text + "'");
  }
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

// "a:b:c" into three numbers.
std::array<double, 3> triple(const std::string& s, const std::string& what) {
  const auto parts = split_on(s, ':');
  if (parts.size() != 3) usage(what + " must look like x:y:z, got '" + s + "'");
  return {to_number(parts[0], what), to_number(parts[1], what), to_number(parts[2], what)};
}

std::string fmt(double v, int prec = 6) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::string fmt_json(const json& v, const std::string& missing = "n/a") {
  return v.is_null() ? missing : fmt(v.get<double>());
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw CommandError(exit_failed, "cannot write " + path);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- wave

struct WaveArgs {
  double c = 2.0;
  double r = 0.0;
  std::vector<double> i_minus{2.0};
  double a0 = std::numeric_limits<double>::quiet_NaN();
  double i0 = std::numeric_limits<double>::quiet_NaN();
  double seed_eps = 0.0;
  double z_budget = 0.0;
  std::string out = "wave";
  bool json_out = false;
};

csvio::Table profile_table(const bw_wave* w) {
  const std::size_t n = bw_wave_size(w);
  csvio::Table t;
  t.header = {"z", "a", "b", "i"};
  t.columns.assign(4, std::vector<double>(n));
  check(bw_wave_samples(w, t.columns[0].data(), t.columns[1].data(), t.columns[2].data(), t.columns[3].data()),
        "profile samples");
  return t;
}

std::string number_tag(double v) {
  std::string s = fmt(v, 10);
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

json wave_entry(const WaveArgs& a, double im, const bw_shoot_options& opts, const std::string& csv_path, int& code) {
  const double ic = bw_minimal_inactive_limit(a.c);
  json e;
  e["i_minus"] = im;
  if (!(im > 1.0)) usage("--i-minus must exceed 1 (the wave leaves an unstable fixed point), got " + fmt(im));

  bw_wave* raw = nullptr;
  double a_min = 0.0;
  const bw_status s = bw_wave_shoot(a.c, a.r, im, &opts, &raw, &a_min);
  WavePtr w(raw);
  const bool outside = im > 2.0 - ic + 1e-12;
  if (s == BW_ERR_NEGATIVITY || (s == BW_OK && outside)) {
    std::string msg = "i_minus = " + fmt(im) + " exceeds 2 - i_c = " + fmt(2.0 - ic) + " at c = " + fmt(a.c) +
                      ": the limit at +inf would fall below i_c, where the rest state is a spiral sink and no "
                      "non-negative, non-constant travelling wave exists (oscillatory regime)";
    if (s == BW_ERR_NEGATIVITY) msg += "; shooting confirmed it, a dipped to " + fmt(a_min, 3);
    e["error"] = msg;
    e["status"] = "oscillatory-regime";
    if (s == BW_ERR_NEGATIVITY) e["a_min"] = a_min;
    code = std::max(code, static_cast<int>(exit_regime));
    return e;
  }
  check(s, "shooting at i_minus = " + fmt(im));

  bw_wave_summary sum{};
  bw_wave_report rep{};
  check(bw_wave_summary_get(w.get(), &sum), "summary");
  check(bw_wave_verify(w.get(), &rep), "verification");
  csvio::write_file(csv_path, profile_table(w.get()));

  double mu_minus_ref = std::numeric_limits<double>::quiet_NaN(), mu_plus_ref = mu_minus_ref;
  bw_decay_rate(sum.i_minus_inf, a.c, &mu_minus_ref);
  bw_decay_rate(sum.i_plus_inf, a.c, &mu_plus_ref);

  e["limits"] = {{"i_minus_inf", sum.i_minus_inf},
                 {"i_plus_inf", sum.i_plus_inf},
                 {"expected_i_plus_inf", bw_limit_symmetry(im)},
                 {"sum_residual", rep.limit_sum_residual},
                 {"i_c", ic}};
  e["residuals"] = {{"mass_1", rep.mass_res1},
                    {"mass_2", rep.mass_res2},
                    {"mass_3", rep.mass_res3},
                    {"total_mass", rep.total_mass},
                    {"first_max_rel_error", rep.first_max_rel_error}};
  e["rates"] = {{"mu_minus", sum.mu_minus},
                {"mu_minus_expected", num(mu_minus_ref)},
                {"mu_minus_rel_error", num(rep.mu_minus_rel_error)},
                {"mu_plus", num(sum.mu_plus)},
                {"mu_plus_expected", num(mu_plus_ref)},
                {"mu_plus_rel_error", num(rep.mu_plus_rel_error)},
                {"critical_tail", sum.critical_tail != 0},
                {"tail_exponent", num(sum.tail_exponent)}};
  e["flags"] = {{"i_monotone", rep.i_monotone != 0},
                {"a_nonnegative", rep.a_nonnegative != 0},
                {"single_maximum", rep.single_maximum != 0}};
  e["shooting"] = {{"a_max", sum.a_max}, {"i_at_max", sum.i_at_max}, {"z_used", sum.z_used},
                   {"converged", sum.converged != 0}};
  e["passed"] = rep.passed != 0;
  e["profile"] = csv_path;
  if (!rep.passed) code = std::max(code, static_cast<int>(exit_failed));
  return e;
}

int cmd_wave_from_max(const WaveArgs& a, const bw_shoot_options& opts) {
  if (std::isnan(a.a0) || std::isnan(a.i0)) usage("--a0 and --i0 must be given together");
  double bound = 0.0;
  check(bw_a_star(a.i0, a.c, a.r, &bound), "a_star");
  bw_wave* raw = nullptr;
  const bw_status s = bw_wave_from_max(a.c, a.r, a.a0, a.i0, &opts, &raw);
  WavePtr w(raw);
  if (s == BW_ERR_NEGATIVITY) {
    std::cerr << "a0 = " << fmt(a.a0) << " lies above a_star(i0) = " << fmt(bound)
              << " and the orbit left the non-negative cone: " << bw_last_error() << '\n';
    return exit_regime;
  }
  check(s, "shot from the maximum");
  bw_wave_summary sum{};
  check(bw_wave_summary_get(w.get(), &sum), "summary");
  const std::string csv_path = a.out + ".csv";
  csvio::write_file(csv_path, profile_table(w.get()));
  const double predicted = bw_i_plus_infinity(a.a0, a.i0, a.c, a.r);
  const double err = std::abs(sum.i_plus_inf - predicted);
  const bool passed = err < 1e-4 && sum.converged;

  json j;
  j["c"] = a.c;
  j["r"] = a.r;
  j["limits"] = {{"a0", a.a0}, {"i0", a.i0}, {"a_star", bound}, {"i_plus_inf", sum.i_plus_inf},
                 {"predicted_i_plus_inf", predicted}, {"i_c", bw_minimal_inactive_limit(a.c)}};
  j["residuals"] = {{"limit_error", err}};
  j["rates"] = json::object();
  j["passed"] = passed;
  j["profile"] = csv_path;
  write_json_file(a.out + ".json", j);
  if (a.json_out)
    std::cout << j.dump(2) << '\n';
  else
    std::cout << "from (a0, i0) = (" << fmt(a.a0) << ", " << fmt(a.i0) << "): i_plus = " << fmt(sum.i_plus_inf, 10)
              << ", formula " << fmt(predicted, 10) << ", error " << fmt(err, 3) << (passed ? "  ok" : "  FAIL")
              << '\n';
  return passed ? exit_ok : exit_failed;
}

int cmd_wave(const WaveArgs& a) {
  if (!(a.c > 0.0)) usage("--c must be positive");
  if (!(a.r >= 0.0)) usage("--r must be non-negative");
  bw_shoot_options opts{a.seed_eps, a.z_budget};
  if (!std::isnan(a.a0) || !std::isnan(a.i0)) return cmd_wave_from_max(a, opts);
  if (a.i_minus.empty()) usage("--i-minus needs at least one value");

  int code = exit_ok;
  json waves = json::array();
  for (double im : a.i_minus) {
    const std::string csv_path = a.i_minus.size() == 1 ? a.out + ".csv" : a.out + "_i" + number_tag(im) + ".csv";
    waves.push_back(wave_entry(a, im, opts, csv_path, code));
  }

  json report;
  if (waves.size() == 1) {
    report = waves[0];
  } else {
    report["waves"] = waves;
  }
  report["c"] = a.c;
  report["r"] = a.r;
  write_json_file(a.out + ".json", report);

  if (a.json_out) {
    std::cout << report.dump(2) << '\n';
  } else {
    for (const auto& e : waves) {
      if (e.contains("error")) {
        std::cerr << "i_minus " << fmt(e["i_minus"].get<double>()) << ": " << e["error"].get<std::string>() << '\n';
        continue;
      }
      std::cout << "i_minus " << fmt(e["i_minus"].get<double>()) << ": i_plus "
                << fmt(e["limits"]["i_plus_inf"].get<double>(), 8) << ", sum residual "
                << fmt(e["limits"]["sum_residual"].get<double>(), 3) << ", mu_minus "
                << fmt(e["rates"]["mu_minus"].get<double>()) << ", worst mass residual "
                << fmt(std::max({e["residuals"]["mass_1"].get<double>(), e["residuals"]["mass_2"].get<double>(),
                                 e["residuals"]["mass_3"].get<double>()}),
                       3)
                << (e["passed"].get<bool>() ? "  ok" : "  FAIL") << "  -> " << e["profile"].get<std::string>()
                << '\n';
    }
  }
  return code;
}

// ---------------------------------------------------------------- pde

struct PdeArgs {
  double r = 0.0;
  std::string grid = "2001:-100:100";
  double t_end = 20.0;
  double snapshot_dt = 0.5;
  std::string ic = "gaussian";
  double amplitude = 0.5;
  double width = 1.0;
  std::string ic_file;
  double level = 0.0;
  double threshold = 0.1;
  std::string window;
  std::string series_format = "csv";
  std::string out = "pde";
  bool json_out = false;
};

struct Initial {
  std::size_t n = 0;
  double x_min = 0.0, x_max = 0.0;
  std::vector<double> A, I;
};

Initial initial_condition(const PdeArgs& a) {
  Initial ini;
  if (a.ic == "file") {
    if (a.ic_file.empty()) usage("--ic file needs --ic-file PATH");
    csvio::Table t;
    try {
      t = csvio::read_file(a.ic_file);
      ini.A = t.column("A");
      ini.I = t.column("I");
    } catch (const std::exception& e) {
      usage(std::string("initial data: ") + e.what());
    }
    const auto& x = t.column("x");
    ini.n = x.size();
    if (ini.n < 16) usage("initial data needs at least 16 rows");
    ini.x_min = x.front();
    ini.x_max = x.back();
    const double dx = (ini.x_max - ini.x_min) / static_cast<double>(ini.n - 1);
    for (std::size_t k = 0; k < ini.n; ++k)
      if (std::abs(x[k] - (ini.x_min + static_cast<double>(k) * dx)) > 1e-9 * std::max(1.0, std::abs(x[k])))
        usage("initial data must sit on a uniform grid");
    return ini;
  }

  const auto g = triple(a.grid, "--grid");
  if (!(g[0] >= 16) || g[0] != std::floor(g[0])) usage("--grid point count must be an integer >= 16");
  ini.n = static_cast<std::size_t>(g[0]);
  ini.x_min = g[1];
  ini.x_max = g[2];
  if (!(ini.x_max > ini.x_min)) usage("--grid needs xmin < xmax");
  const double dx = (ini.x_max - ini.x_min) / static_cast<double>(ini.n - 1);
  ini.A.assign(ini.n, 0.0);
  ini.I.assign(ini.n, 0.0);
  if (a.ic == "gaussian") {
    if (!(a.amplitude >= 0.0) || !(a.width > 0.0)) usage("--amplitude must be >= 0 and --width > 0");
    for (std::size_t k = 0; k < ini.n; ++k) {
      const double x = (ini.x_min + static_cast<double>(k) * dx) / a.width;
      ini.A[k] = a.amplitude * std::exp(-x * x);
    }
  } else if (a.ic == "steady") {
    if (!(a.level >= 0.0)) usage("--level must be non-negative");
    std::fill(ini.I.begin(), ini.I.end(), a.level);
  } else {
    usage("--ic must be gaussian, steady or file");
  }
  return ini;
}

int cmd_pde(const PdeArgs& a) {
  if (!(a.r >= 0.0)) usage("--r must be non-negative");
  if (!(a.t_end > 0.0) || !(a.snapshot_dt > 0.0)) usage("--t-end and --snapshot-dt must be positive");
  if (a.series_format != "csv" && a.series_format != "json") usage("--series-format must be csv or json");
  const Initial ini = initial_condition(a);

  double t1 = 0.5 * a.t_end, t2 = a.t_end;
  if (!a.window.empty()) {
    const auto parts = split_on(a.window, ':');
    if (parts.size() != 2) usage("--window must look like t1:t2");
    t1 = to_number(parts[0], "--window");
    t2 = to_number(parts[1], "--window");
  }

  bw_series* raw = nullptr;
  const bw_status status =
      bw_pde_simulate(ini.A.data(), ini.I.data(), ini.n, ini.x_min, ini.x_max, a.r, a.t_end, a.snapshot_dt, &raw);
  SeriesPtr s(raw);
  const std::string blow_msg = status == BW_ERR_BLOW_UP ? bw_last_error() : "";
  if (status != BW_OK && status != BW_ERR_BLOW_UP) check(status, "simulation");

  const std::size_t count = bw_series_count(s.get()), n = bw_series_grid_size(s.get());
  std::vector<double> x(n);
  check(bw_series_grid(s.get(), x.data()), "grid");
  std::vector<double> ts(count);
  std::vector<std::vector<double>> As(count, std::vector<double>(n)), Is(count, std::vector<double>(n));
  for (std::size_t k = 0; k < count; ++k) check(bw_series_snapshot(s.get(), k, &ts[k], As[k].data(), Is[k].data()), "snapshot");

  const std::string series_path = a.out + "_series." + a.series_format;
  if (a.series_format == "csv") {
    csvio::Table t;
    t.header = {"t", "x", "A", "I"};
    t.columns.resize(4);
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        t.columns[0].push_back(ts[k]);
        t.columns[1].push_back(x[j]);
        t.columns[2].push_back(As[k][j]);
        t.columns[3].push_back(Is[k][j]);
      }
    csvio::write_file(series_path, t);
  } else {
    json js;
    js["x"] = x;
    js["snapshots"] = json::array();
    for (std::size_t k = 0; k < count; ++k) js["snapshots"].push_back({{"t", ts[k]}, {"A", As[k]}, {"I", Is[k]}});
    write_json_file(series_path, js);
  }

  json report;
  report["r"] = a.r;
  report["grid"] = {{"n", n}, {"x_min", ini.x_min}, {"x_max", ini.x_max}};
  report["t_end"] = a.t_end;
  report["series"] = series_path;

  if (status == BW_ERR_BLOW_UP) {
    report["error"] = blow_msg;
    report["last_good_time"] = ts.back();
    write_json_file(a.out + ".json", report);
    std::cerr << "blow-up: " << blow_msg << "; " << count << " good snapshot(s) written to " << series_path << '\n';
    return exit_blow_up;
  }

  double max_change = 0.0;
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t j = 0; j < n; ++j)
      max_change = std::max({max_change, std::abs(As[k][j] - As[0][j]), std::abs(Is[k][j] - Is[0][j])});

  json fronts = json::array();
  bool any_front = false;
  for (std::size_t k = 0; k < count; ++k) {
    double xf = 0.0;
    check(bw_series_front(s.get(), k, a.threshold, &xf), "front");
    any_front = any_front || std::isfinite(xf);
    fronts.push_back({{"t", ts[k]}, {"x", num(xf)}});
  }

  int code = exit_ok;
  json c_est = nullptr, residual = nullptr, plateau = nullptr, mass = nullptr;
  std::string note;
  if (any_front) {
    double c = 0.0, res = 0.0;
    const bw_status sp = bw_series_speed(s.get(), a.threshold, t1, t2, &c, &res);
    if (sp == BW_OK) {
      c_est = c;
      residual = res;
    } else {
      note = bw_last_error();
      if (sp == BW_ERR_CONTAMINATED) code = exit_failed;
      else if (sp != BW_ERR_DOMAIN && sp != BW_ERR_INVALID_ARGUMENT) check(sp, "speed");
      else usage("speed window: " + note);
    }
    double level = 0.0;
    if (bw_series_plateau(s.get(), count - 1, a.threshold, &level) == BW_OK) plateau = level;
  } else {
    note = "A stays below the front threshold; no front to track";
  }
  double mb = 0.0;
  if (bw_series_mass_balance(s.get(), &mb) == BW_OK) mass = mb;

  report["c_est"] = c_est;
  report["window"] = {t1, t2};
  report["residual"] = residual;
  report["plateau"] = plateau;
  report["max_change"] = max_change;
  report["mass_balance_residual"] = mass;
  report["threshold"] = a.threshold;
  report["fronts"] = fronts;
  if (!note.empty()) report["note"] = note;
  write_json_file(a.out + ".json", report);

  if (a.json_out) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << "snapshots " << count << " on " << n << " points -> " << series_path << '\n';
    std::cout << "c_est " << fmt_json(c_est) << " over [" << fmt(t1) << ", " << fmt(t2) << "], fit residual "
              << fmt_json(residual) << '\n';
    std::cout << "plateau I " << fmt_json(plateau) << ", max change " << fmt(max_change, 3) << ", mass balance "
              << fmt_json(mass) << '\n';
    if (!note.empty()) std::cout << "note: " << note << '\n';
  }
  return code;
}

// ---------------------------------------------------------------- evans

struct EvansArgs {
  double c = 2.0;
  double r = 0.0;
  std::string contour = "1e-3:1000:48";
  double L = 0.0;
  bool self_test = false;
  std::string out = "evans";
  bool json_out = false;
};

int cmd_evans(const EvansArgs& a) {
  const auto spec = triple(a.contour, "--contour");
  if (!(spec[0] > 0.0) || !(spec[1] > spec[0])) usage("--contour needs 0 < rmin < rmax");
  if (!(spec[2] >= 2) || spec[2] != std::floor(spec[2])) usage("--contour point count must be an integer >= 2");
  const auto base_n = static_cast<std::size_t>(spec[2]);

  std::vector<double> re, im;
  SpectralPtr setup;
  if (a.self_test) {
    for (std::size_t k = 0; k < base_n; ++k) {
      const double th = 2.0 * std::acos(-1.0) * static_cast<double>(k) / static_cast<double>(base_n);
      re.push_back(0.5 + std::cos(th));
      im.push_back(std::sin(th));
    }
    re.push_back(re.front());
    im.push_back(im.front());
  } else {
    if (!(a.c > 0.0)) usage("--c must be positive");
    std::size_t count = 0;
    check(bw_contour(spec[0], spec[1], base_n, nullptr, nullptr, 0, &count), "contour");
    re.resize(count);
    im.resize(count);
    check(bw_contour(spec[0], spec[1], base_n, re.data(), im.data(), count, &count), "contour");
    bw_spectral* raw = nullptr;
    check(bw_spectral_create(a.c, a.r, a.L, &raw), "spectral setup");
    setup.reset(raw);
  }

  bw_winding* raw_w = nullptr;
  check(bw_winding_run(setup.get(), re.data(), im.data(), re.size(), &raw_w), "winding number");
  WindingPtr w(raw_w);

  const std::size_t m = bw_winding_sample_count(w.get());
  csvio::Table t;
  t.header = {"re_gamma", "im_gamma", "re_E", "im_E"};
  t.columns.assign(4, std::vector<double>(m));
  check(bw_winding_samples(w.get(), t.columns[0].data(), t.columns[1].data(), t.columns[2].data(), t.columns[3].data()),
        "samples");
  const std::string csv_path = a.out + ".csv";
  csvio::write_file(csv_path, t);

  const int winding = bw_winding_number(w.get());
  const int expected = a.self_test ? 1 : 0;
  json report;
  report["winding"] = winding;
  report["expected"] = expected;
  report["max_arg_step"] = bw_winding_max_step(w.get());
  report["deviation"] = bw_winding_deviation(w.get());
  report["refinement_depth"] = bw_winding_depth(w.get());
  report["samples"] = m;
  if (a.self_test) {
    report["map"] = "identity on |gamma - 0.5| = 1";
  } else {
    report["c"] = a.c;
    report["r"] = a.r;
    report["L"] = bw_spectral_length(setup.get());
    report["contour"] = {{"r_min", spec[0]}, {"r_max", spec[1]}, {"base_n", base_n}};
    report["caveats"] = {
        "zeros with |gamma| < r_min or |gamma| > r_max are outside the contour and not detected",
        "a zero winding number is numerical evidence of spectral stability in the weighted space, not a proof"};
  }
  report["values"] = csv_path;
  write_json_file(a.out + ".json", report);

  if (a.json_out) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << "winding " << winding << " (expected " << expected << "), deviation "
              << fmt(bw_winding_deviation(w.get()), 3) << ", max arg step " << fmt(bw_winding_max_step(w.get()), 3)
              << ", " << m << " samples -> " << csv_path << '\n';
  }
  return winding == expected ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- formulas

struct FormulaArgs {
  double c = 2.0;
  double r = 0.0;
  std::string general;
  bool json_out = false;
};

bw_general_params parse_general(const std::string& text) {
  bw_general_params g{1.0, 1.0, 0.0, 1.0};
  for (const auto& item : split_on(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) usage("--general entries look like rS=1, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    const double v = to_number(item.substr(eq + 1), key);
    if (key == "rS") g.r_S = v;
    else if (key == "rA") g.r_A = v;
    else if (key == "rI") g.r_I = v;
    else if (key == "D") g.D = v;
    else usage("unknown --general key '" + key + "' (expected rS, rA, rI, D)");
  }
  return g;
}

json normalized_formulas(double c, double r) {
  const double ic = bw_minimal_inactive_limit(c);
  json j;
  j["c"] = c;
  j["r"] = r;
  j["i_c"] = ic;
  j["c_min"] = 2.0;
  json limits = json::array();
  for (double im : {1.2, 1.5, 1.8, 2.0 - ic}) {
    if (im > 2.0 - ic + 1e-12 || im <= 1.0) continue;
    double mu_m = NAN, mu_p = NAN;
    bw_decay_rate(im, c, &mu_m);
    bw_decay_rate(bw_limit_symmetry(im), c, &mu_p);
    limits.push_back({{"i_minus_inf", im}, {"i_plus_inf", bw_limit_symmetry(im)}, {"mu_minus", num(mu_m)},
                      {"mu_plus", num(mu_p)}});
  }
  j["limits"] = limits;
  json stars = json::array();
  for (int k = 0; k < 5; ++k) {
    const double i0 = ic + (1.0 - ic) * k / 5.0;
    double as = NAN, al = NAN;
    bw_a_star(i0, c, r, &as);
    bw_alpha_threshold(i0, c, r, &al);
    stars.push_back({{"i0", i0}, {"alpha", num(al)}, {"a_star", num(as)}});
  }
  j["a_star"] = stars;
  return j;
}

int cmd_formulas(const FormulaArgs& a) {
  if (!(a.c > 0.0)) usage("--c must be positive");
  json report;
  if (!a.general.empty()) {
    const bw_general_params g = parse_general(a.general);
    double r = 0.0;
    bw_scaling sc{};
    check(bw_normalize(&g, &r, &sc), "normalization");
    bw_general_predictions pr{};
    check(bw_general_predictions_eval(&g, a.c, &pr), "predictions");
    const double i_minus = pr.limit_sum - pr.i_c;
    double mu_m = NAN, mu_p = NAN;
    bw_general_decay_rate(&g, a.c, i_minus, &mu_m);
    bw_general_decay_rate(&g, a.c, pr.i_c, &mu_p);
    report["general"] = {{"rS", g.r_S}, {"rA", g.r_A}, {"rI", g.r_I}, {"D", g.D}, {"c", a.c}};
    report["i_c"] = pr.i_c;
    report["limit_sum"] = pr.limit_sum;
    report["c_min"] = pr.c_min;
    report["rates"] = {{"i_minus_inf", i_minus}, {"i_plus_inf", pr.i_c}, {"mu_minus", num(mu_m)},
                       {"mu_plus", num(mu_p)}};
    report["scaling"] = {{"time_factor", sc.time_factor},
                         {"space_factor", sc.space_factor},
                         {"density_factor", sc.density_factor}};
    report["normalized"] = normalized_formulas(pr.c_normalized, r);
  } else {
    if (!(a.r >= 0.0)) usage("--r must be non-negative");
    report = normalized_formulas(a.c, a.r);
  }

  if (a.json_out) {
    std::cout << report.dump(2) << '\n';
    return exit_ok;
  }
  const json& nf = a.general.empty() ? report : report["normalized"];
  if (!a.general.empty()) {
    std::cout << "general system at c = " << fmt(a.c) << ": i_c = " << fmt(report["i_c"].get<double>())
              << ", i_- + i_+ = " << fmt(report["limit_sum"].get<double>()) << ", c_min = "
              << fmt(report["c_min"].get<double>()) << '\n';
    std::cout << "  rates of the critical wave: mu_- = " << fmt_json(report["rates"]["mu_minus"])
              << ", mu_+ = " << fmt_json(report["rates"]["mu_plus"]) << '\n';
    std::cout << "normalized: ";
  }
  std::cout << "c = " << fmt(nf["c"].get<double>()) << ", r = " << fmt(nf["r"].get<double>())
            << ": i_c = " << fmt(nf["i_c"].get<double>()) << ", minimal speed c_min = 2\n";
  std::cout << "  i_-inf     i_+inf     mu_-        mu_+\n";
  for (const auto& e : nf["limits"])
    std::printf("  %-10s %-10s %-11s %s\n", fmt_json(e["i_minus_inf"]).c_str(), fmt_json(e["i_plus_inf"]).c_str(),
                fmt_json(e["mu_minus"], "oscill.").c_str(), fmt_json(e["mu_plus"], "oscill.").c_str());
  std::cout << "  i0         alpha      a_star\n";
  for (const auto& e : nf["a_star"])
    std::printf("  %-10s %-10s %s\n", fmt_json(e["i0"]).c_str(), fmt_json(e["alpha"]).c_str(),
                fmt_json(e["a_star"]).c_str());
  return exit_ok;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::string> only;
  unsigned long long seed = 20240611ULL;
  std::vector<std::string> tol;
  bool json_out = false;
};

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : ",") + p;
  return s;
}

void print_line(int id, const char* tag, const char* title, int passed, const char* detail, double seconds,
                void* user) {
  if (*static_cast<bool*>(user)) return;
  std::printf("[%s] %2d %-12s %s (%.2fs)\n       %s\n", passed ? "PASS" : "FAIL", id, tag, title, seconds, detail);
  std::fflush(stdout);
}

int cmd_verify(const VerifyArgs& a) {
  std::vector<std::string> only;
  for (const auto& o : a.only)
    for (const auto& t : split_on(o, ','))
      if (!t.empty()) only.push_back(t);
  std::vector<std::string> tol;
  for (const auto& t : a.tol)
    for (const auto& p : split_on(t, ','))
      if (!p.empty()) tol.push_back(p);

  bool quiet = a.json_out;
  bw_verify* raw = nullptr;
  const std::string only_s = join(only), tol_s = join(tol);
  check(bw_verify_run(a.seed, only.empty() ? nullptr : only_s.c_str(), tol.empty() ? nullptr : tol_s.c_str(),
                      print_line, &quiet, &raw),
        "acceptance suite");
  VerifyPtr v(raw);

  std::vector<std::string> failing;
  json results = json::array();
  for (std::size_t k = 0; k < bw_verify_count(v.get()); ++k) {
    const bool ok = bw_verify_passed(v.get(), k) != 0;
    if (!ok) failing.emplace_back(bw_verify_tag(v.get(), k));
    results.push_back({{"tag", bw_verify_tag(v.get(), k)}, {"passed", ok}, {"detail", bw_verify_detail(v.get(), k)}});
  }
  if (a.json_out) {
    std::cout << json{{"seed", a.seed}, {"passed", failing.empty()}, {"results", results}}.dump(2) << '\n';
  } else if (failing.empty()) {
    std::cout << "all " << results.size() << " criteria passed\n";
  } else {
    std::cout << failing.size() << " of " << results.size() << " criteria failed: " << join(failing) << '\n';
  }
  return failing.empty() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- config

// Splices key=value lines from --config FILE into the arguments of the chosen subcommand,
// skipping keys that also appear on the command line.
std::vector<std::string> with_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) usage("--config needs a file");
      path = args[k + 1];
      args.erase(args.begin() + static_cast<long>(k), args.begin() + static_cast<long>(k) + 2);
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + static_cast<long>(k));
      break;
    }
  }
  if (path.empty()) return args;

  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t k = 0; k < args.size() && !sub; ++k)
    for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
      if (args[k] == s->get_name()) {
        sub = s;
        sub_pos = k;
        break;
      }
  if (!sub) usage("--config needs a subcommand to apply to");

  std::ifstream in(path);
  if (!in) usage("cannot read config file " + path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) usage(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) usage(path + ":" + std::to_string(lineno) + ": '" + key + "' is not an option of " + sub->get_name());
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& s) {
      return s == flag || s.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") extra.push_back(flag);
      else if (value != "false" && value != "0") usage(path + ":" + std::to_string(lineno) + ": flag '" + key + "' needs true or false");
      continue;
    }
    extra.push_back(flag);
    for (const auto& v : split_on(value, ' '))
      if (!v.empty()) extra.push_back(v);
  }
  args.insert(args.begin() + static_cast<long>(sub_pos) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Travelling waves of a branching-deposition front: shooting, PDE runs, Evans winding numbers",
               "branchwave"};
  app.set_version_flag("--version", std::string(bw_version()));
  app.require_subcommand(1);
  app.add_option("--config", "flat key=value file; command-line flags take precedence");

  WaveArgs wa;
  auto* wave = app.add_subcommand("wave", "shoot travelling waves and verify them");
  wave->add_option("--c", wa.c, "wave speed")->capture_default_str();
  wave->add_option("--r", wa.r, "direct production rate")->capture_default_str();
  wave->add_option("--i-minus", wa.i_minus, "inactive level behind the front (one or more)")->capture_default_str();
  wave->add_option("--a0", wa.a0, "start from the first maximum (a0, 0, i0) instead");
  wave->add_option("--i0", wa.i0, "inactive level at the first maximum");
  wave->add_option("--seed-eps", wa.seed_eps, "offset along the unstable direction (0 keeps the default)");
  wave->add_option("--z-budget", wa.z_budget, "pseudo-time budget (0 keeps the default)");
  wave->add_option("--out", wa.out, "output prefix for .csv and .json")->capture_default_str();
  wave->add_flag("--json", wa.json_out, "print the report as JSON");

  PdeArgs pa;
  auto* pde = app.add_subcommand("pde", "simulate the reaction-diffusion system");
  pde->add_option("--r", pa.r, "direct production rate")->capture_default_str();
  pde->add_option("--grid", pa.grid, "n:xmin:xmax")->capture_default_str();
  pde->add_option("--t-end", pa.t_end, "final time")->capture_default_str();
  pde->add_option("--snapshot-dt", pa.snapshot_dt, "snapshot interval")->capture_default_str();
  pde->add_option("--ic", pa.ic, "initial condition: gaussian, steady or file")->capture_default_str();
  pde->add_option("--amplitude", pa.amplitude, "Gaussian bump height")->capture_default_str();
  pde->add_option("--width", pa.width, "Gaussian bump width")->capture_default_str();
  pde->add_option("--ic-file", pa.ic_file, "CSV with columns x,A,I");
  pde->add_option("--level", pa.level, "inactive level for --ic steady")->capture_default_str();
  pde->add_option("--threshold", pa.threshold, "front threshold on A")->capture_default_str();
  pde->add_option("--window", pa.window, "t1:t2 for the speed fit (default second half of the run)");
  pde->add_option("--series-format", pa.series_format, "csv or json")->capture_default_str();
  pde->add_option("--out", pa.out, "output prefix")->capture_default_str();
  pde->add_flag("--json", pa.json_out, "print the report as JSON");

  EvansArgs ea;
  auto* evans = app.add_subcommand("evans", "winding number of the Evans function of the critical wave");
  evans->add_option("--c", ea.c, "wave speed")->capture_default_str();
  evans->add_option("--r", ea.r, "direct production rate")->capture_default_str();
  evans->add_option("--contour", ea.contour, "rmin:rmax:n, n points per contour piece")->capture_default_str();
  evans->add_option("--L", ea.L, "truncation half-length (0 keeps the default)");
  evans->add_flag("--self-test", ea.self_test, "wind the identity around a circle enclosing 0 instead");
  evans->add_option("--out", ea.out, "output prefix")->capture_default_str();
  evans->add_flag("--json", ea.json_out, "print the report as JSON");

  FormulaArgs fa;
  auto* formulas = app.add_subcommand("formulas", "closed-form limits, rates and thresholds");
  formulas->add_option("--c", fa.c, "wave speed")->capture_default_str();
  formulas->add_option("--r", fa.r, "direct production rate")->capture_default_str();
  formulas->add_option("--general", fa.general, "dimensional constants, e.g. rS=2,rA=4,rI=2,D=1");
  formulas->add_flag("--json", fa.json_out, "print JSON");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--only", va.only, "criterion tags, comma separated");
  verify->add_option("--seed", va.seed, "seed of the randomized checks")->capture_default_str();
  verify->add_option("--tol", va.tol, "tolerance override name=value");
  verify->add_flag("--json", va.json_out, "print JSON");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  }

  try {
    if (wave->parsed()) return cmd_wave(wa);
    if (pde->parsed()) return cmd_pde(pa);
    if (evans->parsed()) return cmd_evans(ea);
    if (formulas->parsed()) return cmd_formulas(fa);
    if (verify->parsed()) return cmd_verify(va);
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failed;
  }
  return exit_usage;
}
