#include "revlang/stdlib.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "revlang/parser.hpp"
#include "stdlib_assets.hpp"

namespace revlang {

namespace {

const char* asset_text(const std::string& file) {
  for (std::size_t i = 0; i < assets::kAssetCount; ++i) {
    if (file == assets::kAssets[i].name) return assets::kAssets[i].text;
  }
  throw RevError(ErrorKind::UnknownExample, "missing asset " + file);
}

Value vec(std::vector<double> xs) {
  std::vector<Value> out(xs.begin(), xs.end());
  return Array::vector(std::move(out));
}

Value mat(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Value> data;
  for (std::size_t i = 0; i < rows * cols; ++i) data.emplace_back(u(rng));
  return Array::matrix(rows, cols, std::move(data));
}

Value random_vec(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(rng);
  return vec(std::move(xs));
}

// Nudges magnitudes away from zero so logs and norms stay regular.
double nonzero(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::bernoulli_distribution sign(0.5);
  return sign(rng) ? u(rng) : -u(rng);
}

template <class R>
using State = std::vector<std::array<R, 3>>;

template <class R>
State<R> accelerations(const State<R>& x, const std::vector<R>& m, R G) {
  State<R> a(x.size(), std::array<R, 3>{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      std::array<R, 3> r{};
      R d = 0;
      for (int k = 0; k < 3; ++k) {
        r[k] = x[j][k] - x[i][k];
        d += r[k] * r[k];
      }
      R s = std::sqrt(d);
      R f = G * m[j] / (s * s * s);
      for (int k = 0; k < 3; ++k) a[i][k] += f * r[k];
    }
  }
  return a;
}

Value to_matrix(const State<double>& s) {
  std::vector<Value> data;
  for (const auto& col : s) {
    for (double c : col) data.emplace_back(c);
  }
  return Array::matrix(3, s.size(), std::move(data));
}

double column_entry(const Value& m, std::size_t col, int k) { return to_double(m.as<Array>().data[3 * col + k]); }

}  // namespace

const std::vector<ExampleInfo>& example_catalog() {
  static const std::vector<ExampleInfo> catalog = {
      {"multiplier", "multiplier.rnl", "multiplier"},
      {"complex_log", "complex_log.rnl", "complex_log"},
      {"i_affine", "i_affine.rnl", "i_affine"},
      {"i_umm", "i_umm.rnl", "i_umm"},
      {"mypower_log", "mypower_log.rnl", "mypower_log"},
      {"rrfib_corrected", "rrfib_corrected.rnl", "rrfib"},
      {"r_norm", "r_norm.rnl", "r_norm"},
      {"leapfrog_clean", "leapfrog_clean.rnl", "leapfrog_clean"},
      {"leapfrog_cumulative", "leapfrog_cumulative.rnl", "leapfrog_cumulative"},
  };
  return catalog;
}

const ExampleInfo& example_info(const std::string& name) {
  for (const auto& e : example_catalog()) {
    if (e.name == name) return e;
  }
  throw RevError(ErrorKind::UnknownExample, "no example named '" + name + "'");
}

std::string example_source(const std::string& name) { return asset_text(example_info(name).file); }

Program load_example(const std::string& name) {
  const ExampleInfo& info = example_info(name);
  Program p = parse_program(asset_text(info.file), "stdlib/" + info.file);
  auto diags = validate(p);
  if (!diags.empty()) throw SyntaxError(diags.front().rule + ": " + diags.front().message, diags.front().span);
  return p;
}

std::vector<Value> sample_inputs(const std::string& name, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const std::string& key = example_info(name).name;
  if (key == "multiplier") return {u(rng), u(rng), u(rng)};
  if (key == "complex_log") {
    return {Value(Complex(u(rng), u(rng))), Value(Complex(nonzero(rng, 0.3, 2.0), nonzero(rng, 0.3, 2.0)))};
  }
  if (key == "i_affine") return {random_vec(3, rng, -1, 1), mat(3, 4, rng, -1, 1), random_vec(3, rng, -1, 1), random_vec(4, rng, -1, 1)};
  if (key == "i_umm") return {mat(4, 3, rng, -1, 1), random_vec(6, rng, -3, 3)};
  if (key == "mypower_log") {
    std::uniform_real_distribution<double> base(0.5, 1.5);
    std::uniform_int_distribution<int> n(1, 6);
    return {0.0, base(rng), std::int64_t{n(rng)}};
  }
  if (key == "rrfib_corrected") {
    std::uniform_int_distribution<int> n(0, 12);
    return {std::int64_t{0}, std::int64_t{n(rng)}};
  }
  if (key == "r_norm") {
    std::vector<double> xs(5);
    for (auto& x : xs) x = nonzero(rng, 0.2, 2.0);
    return {0.0, 0.0, vec(std::move(xs))};
  }
  // Leapfrog: a perturbed two-body system for a few steps.
  SolarSystemConfig cfg = SolarSystemConfig::two_body();
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  State<double> x, v;
  std::vector<double> m;
  for (const auto& b : cfg.bodies) {
    std::array<double, 3> px = b.x, pv = b.v;
    for (int k = 0; k < 3; ++k) {
      px[k] += jitter(rng);
      pv[k] += jitter(rng);
    }
    x.push_back(px);
    v.push_back(pv);
    m.push_back(b.mass * (1.0 + jitter(rng)));
  }
  std::uniform_int_distribution<int> steps(1, 10);
  return {to_matrix(x), to_matrix(v), vec(m), cfg.G, cfg.dt, std::int64_t{steps(rng)}};
}

SolarSystemConfig SolarSystemConfig::two_body() {
  SolarSystemConfig cfg;
  // Wide circular orbit about the centre of mass. The horizon spans a small
  // arc, so no coordinate changes sign or binade along the way.
  const double m1 = 1.0, m2 = 1e-3, R = 100.0, phase = 0.7;
  const double omega = std::sqrt(cfg.G * (m1 + m2) / (R * R * R));
  const double r1 = m2 / (m1 + m2) * R, r2 = m1 / (m1 + m2) * R;
  const double c = std::cos(phase), s = std::sin(phase);
  cfg.bodies = {Body{m1, {-r1 * c, -r1 * s, 0.0}, {omega * r1 * s, -omega * r1 * c, 0.0}},
                Body{m2, {r2 * c, r2 * s, 0.0}, {-omega * r2 * s, omega * r2 * c, 0.0}}};
  return cfg;
}

void SolarSystemConfig::validate() const {
  if (!(dt > 0)) throw RevError(ErrorKind::InvalidArgument, "dt must be positive");
  if (steps < 0) throw RevError(ErrorKind::InvalidArgument, "steps must be non-negative");
  if (bodies.empty()) throw RevError(ErrorKind::InvalidArgument, "no bodies");
  for (const auto& b : bodies) {
    if (!(b.mass > 0)) throw RevError(ErrorKind::InvalidArgument, "masses must be positive");
  }
}

LeapfrogResult leapfrog_simulate(const SolarSystemConfig& cfg, LeapfrogVariant variant, Precision precision,
                                 const ExecOptions& base) {
  cfg.validate();
  const bool single = precision == Precision::Binary32;
  auto q = [single](double v) { return single ? round_to_float32(v) : v; };

  State<double> x, v;
  std::vector<double> m;
  for (const auto& b : cfg.bodies) {
    x.push_back({q(b.x[0]), q(b.x[1]), q(b.x[2])});
    v.push_back({q(b.v[0]), q(b.v[1]), q(b.v[2])});
    m.push_back(q(b.mass));
  }
  const double G = q(cfg.G), dt = q(cfg.dt);

  // v_{1/2} = v_0 + a_0 dt / 2, in the working precision.
  if (single) {
    State<float> xf(x.size());
    std::vector<float> mf(m.begin(), m.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < 3; ++k) xf[i][k] = static_cast<float>(x[i][k]);
    }
    auto a = accelerations<float>(xf, mf, static_cast<float>(G));
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        v[i][k] = static_cast<float>(static_cast<float>(v[i][k]) + a[i][k] * static_cast<float>(dt) / 2.0f);
      }
    }
  } else {
    auto a = accelerations<double>(x, m, G);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < 3; ++k) v[i][k] += a[i][k] * dt / 2.0;
    }
  }

  // Extended-precision reference from the same half-kicked state.
  State<long double> xr(x.size()), vr(x.size());
  std::vector<long double> mr(m.begin(), m.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      xr[i][k] = x[i][k];
      vr[i][k] = v[i][k];
    }
  }
  for (std::int64_t s = 0; s < cfg.steps; ++s) {
    for (std::size_t i = 0; i < xr.size(); ++i) {
      for (int k = 0; k < 3; ++k) xr[i][k] += vr[i][k] * static_cast<long double>(dt);
    }
    auto a = accelerations<long double>(xr, mr, G);
    for (std::size_t i = 0; i < xr.size(); ++i) {
      for (int k = 0; k < 3; ++k) vr[i][k] += a[i][k] * static_cast<long double>(dt);
    }
  }

  const std::string name = variant == LeapfrogVariant::Clean ? "leapfrog_clean" : "leapfrog_cumulative";
  Program prog = load_example(name);
  ExecOptions opts = base;
  opts.float32 = single;
  // Ancillas summing several squares uncompute to within a few binary32 ulps.
  if (single) opts.float_tolerance = std::max(opts.float_tolerance, kBinary32AncillaTolerance);
  Interpreter interp(prog, opts);
  std::vector<Value> args = {to_matrix(x), to_matrix(v), vec(m), G, dt, cfg.steps};
  auto out = interp.run(name, args);

  LeapfrogResult res;
  res.x = out[0];
  res.v = out[1];
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      long double diff = static_cast<long double>(column_entry(out[0], i, k)) - xr[i][k];
      res.reference_error = std::max(res.reference_error, static_cast<double>(std::fabs(diff)));
    }
  }
  auto back = interp.uncall(name, out);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      res.reversal_error = std::max(res.reversal_error, std::fabs(column_entry(back[0], i, k) - x[i][k]));
    }
  }
  return res;
}

std::vector<RoundoffRow> roundoff_experiment(const SolarSystemConfig& cfg, std::int64_t steps, Precision precision,
                                             int points) {
  if (steps < 0 || points < 1) throw RevError(ErrorKind::InvalidArgument, "steps and points must be positive");
  std::vector<RoundoffRow> rows;
  std::int64_t last = -1;
  for (int p = 1; p <= points; ++p) {
    const std::int64_t n = steps * p / points;
    if (n == last) continue;
    last = n;
    SolarSystemConfig c = cfg;
    c.steps = n;
    RoundoffRow row;
    row.steps = n;
    row.precision = precision == Precision::Binary32 ? 32 : 64;
    row.error_clean = leapfrog_simulate(c, LeapfrogVariant::Clean, precision).reversal_error;
    row.error_cumulative = leapfrog_simulate(c, LeapfrogVariant::Cumulative, precision).reversal_error;
    rows.push_back(row);
  }
  return rows;
}

std::string roundoff_csv(const std::vector<RoundoffRow>& rows) {
  std::ostringstream os;
  os << "steps,error_clean,error_cumulative,precision\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.steps << ',' << r.error_clean << ',' << r.error_cumulative << ',' << r.precision << '\n';
  }
  return os.str();
}

}  // namespace revlang
