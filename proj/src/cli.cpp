#include "revlang/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "revlang/autodiff.hpp"
#include "revlang/interpreter.hpp"
#include "revlang/parser.hpp"
#include "revlang/reverser.hpp"
#include "revlang/stdlib.hpp"
#include "revlang/tradeoff.hpp"

namespace revlang {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

[[noreturn]] void bad_literal(const std::string& text) {
  throw RevError(ErrorKind::InvalidArgument, "cannot read literal '" + text + "'");
}

// `a+bim`, `a-bim` or `bim`.
Complex parse_complex(const std::string& body) {
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      double re = 0, im = 0;
      if (!parse_real(body.substr(0, i), re)) bad_literal(body + "im");
      std::string rest = body.substr(i);
      if (rest == "+" || rest == "-") rest += "1";
      if (!parse_real(rest, im)) bad_literal(body + "im");
      return {re, im};
    }
  }
  double im = 0;
  std::string b = body.empty() || body == "+" || body == "-" ? body + "1" : body;
  if (!parse_real(b, im)) bad_literal(body + "im");
  return {0.0, im};
}

Value parse_array(const std::string& inner) {
  std::vector<std::vector<Value>> rows(1);
  std::string cur;
  auto flush = [&] {
    std::string t = trim(cur);
    if (!t.empty()) rows.back().push_back(parse_literal(t));
    cur.clear();
  };
  for (char c : inner) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else if (c == ';') {
      flush();
      rows.emplace_back();
    } else {
      cur += c;
    }
  }
  flush();
  if (rows.size() == 1) return Array::vector(std::move(rows[0]));
  const std::size_t cols = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != cols) throw RevError(ErrorKind::InvalidArgument, "ragged matrix literal");
  }
  std::vector<Value> data;
  for (std::size_t j = 0; j < cols; ++j) {
    for (const auto& r : rows) data.push_back(r[j]);
  }
  return Array::matrix(rows.size(), cols, std::move(data));
}

json grad_json(const Value& primal, const Value& grad) {
  switch (primal.kind()) {
    case Kind::Int:
    case Kind::Bool: return nullptr;
    case Kind::GVar: return grad_json(*primal.as<GVar>().x, grad);
    case Kind::Array: {
      const Array& p = primal.as<Array>();
      const Array* g = grad.is<Array>() ? &grad.as<Array>() : nullptr;
      auto at = [&](std::size_t i) { return g && i < g->data.size() ? grad_json(p.data[i], g->data[i]) : json(nullptr); };
      json out = json::array();
      if (p.rank() == 2) {
        for (std::size_t r = 0; r < p.shape[0]; ++r) {
          json row = json::array();
          for (std::size_t c = 0; c < p.shape[1]; ++c) row.push_back(at(c * p.shape[0] + r));
          out.push_back(row);
        }
      } else {
        for (std::size_t i = 0; i < p.data.size(); ++i) out.push_back(at(i));
      }
      return out;
    }
    case Kind::Record: {
      json out = json::object();
      const Record& p = primal.as<Record>();
      for (const auto& [name, v] : p.fields) {
        const Value* g = grad.is<Record>() ? grad.as<Record>().find(name) : nullptr;
        out[name] = g ? grad_json(v, *g) : json(nullptr);
      }
      return out;
    }
    default: return json::parse(value_json(grad));
  }
}

json to_json(const Value& v) { return json::parse(value_json(v)); }

json args_json(const std::vector<Value>& args) {
  json out = json::array();
  for (const auto& a : args) out.push_back(to_json(primal_of(a)));
  return out;
}

struct Loaded {
  Program program;
  std::string source;
};

// Reads, parses and validates; validation failures are reported as syntax
// errors so that they share exit code 2.
Loaded load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("FILE", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Loaded l{parse_program(ss.str(), path), ss.str()};
  auto diags = validate(l.program);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.rule + ": " + d.message + " at " + d.span.str();
    throw SyntaxError("validation failed: " + msg, diags.front().span);
  }
  return l;
}

const FunctionDef& find_function(const Program& p, const std::string& name) {
  for (const auto& f : p.functions) {
    if (f.name == name) return f;
  }
  throw RevError(ErrorKind::UnknownFunction, "no function named '" + name + "'");
}

std::vector<Value> parse_args(const std::string& text) {
  std::vector<Value> out;
  if (trim(text).empty()) return out;
  for (const auto& piece : split_args(text)) out.push_back(parse_literal(piece));
  return out;
}

std::size_t param_index(const FunctionDef& f, const std::string& key) {
  std::int64_t idx = 0;
  if (parse_int(key, idx) && idx >= 0 && static_cast<std::size_t>(idx) < f.params.size()) {
    return static_cast<std::size_t>(idx);
  }
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (f.params[i].name == key) return i;
  }
  throw RevError(ErrorKind::InvalidArgument, "'" + key + "' is not a parameter of " + f.name);
}

// ARG[:COMPONENT][=VALUE], ARG a parameter name or position.
Seed parse_seed(const FunctionDef& f, const std::string& text) {
  Seed s;
  std::string head = text;
  if (auto eq = text.find('='); eq != std::string::npos) {
    head = text.substr(0, eq);
    if (!parse_real(text.substr(eq + 1), s.value)) bad_literal(text);
  }
  if (auto colon = head.find(':'); colon != std::string::npos) {
    std::int64_t c = 0;
    if (!parse_int(head.substr(colon + 1), c) || c < 0) bad_literal(text);
    s.component = static_cast<std::size_t>(c);
    head = head.substr(0, colon);
  }
  s.arg = param_index(f, head);
  return s;
}

// Random trial inputs: Float-like leaves are jittered by up to 10 %.
Value jitter(const Value& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  switch (v.kind()) {
    case Kind::Float: return v.as<double>() * (1.0 + u(rng));
    case Kind::Complex: return Complex(v.as<Complex>().real() * (1.0 + u(rng)), v.as<Complex>().imag() * (1.0 + u(rng)));
    case Kind::Array: {
      Array a = v.as<Array>();
      for (auto& e : a.data) e = jitter(e, rng);
      return a;
    }
    case Kind::Record: {
      Record r = v.as<Record>();
      for (auto& f : r.fields) f.second = jitter(f.second, rng);
      return r;
    }
    default: return v;
  }
}

struct Common {
  std::string file;
  std::string fname;
  std::string args;
  bool no_invcheck = false;
  bool trace = false;
  std::int64_t max_steps = 100'000'000;
};

ExecOptions exec_options(const Common& c, std::ostream& err) {
  ExecOptions o;
  o.invcheck = !c.no_invcheck;
  o.trace = c.trace;
  o.trace_out = &err;
  o.show_out = &err;
  o.max_steps = c.max_steps;
  return o;
}

}  // namespace

Value parse_literal(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) bad_literal(raw);
  if (t.front() == '[') {
    if (t.back() != ']') bad_literal(raw);
    return parse_array(t.substr(1, t.size() - 2));
  }
  if (t == "true") return true;
  if (t == "false") return false;
  double d = 0;
  if (ends_with(t, "fx")) {
    if (!parse_real(t.substr(0, t.size() - 2), d)) bad_literal(raw);
    auto f = Fixed::from_double_checked(d);
    if (!f) throw RevError(ErrorKind::OverflowError, "'" + t + "' is outside the fixed-point range");
    return *f;
  }
  if (ends_with(t, "ul")) {
    if (!parse_real(t.substr(0, t.size() - 2), d) || !(d > 0) || !std::isfinite(d)) bad_literal(raw);
    return ULog::from_double(d);
  }
  if (ends_with(t, "im")) return parse_complex(t.substr(0, t.size() - 2));
  std::int64_t i = 0;
  if (parse_int(t, i)) return i;
  if (parse_real(t, d)) return d;
  bad_literal(raw);
}

std::vector<std::string> split_args(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string value_json(const Value& v) {
  std::function<json(const Value&)> conv = [&](const Value& x) -> json {
    switch (x.kind()) {
      case Kind::Int: return x.as<std::int64_t>();
      case Kind::Float: return x.as<double>();
      case Kind::Fixed: return x.as<Fixed>().to_double();
      case Kind::ULog: return x.as<ULog>().to_double();
      case Kind::Bool: return x.as<bool>();
      case Kind::Complex: return json{{"re", x.as<Complex>().real()}, {"im", x.as<Complex>().imag()}};
      case Kind::Dual: return json{{"v", x.as<Dual>().v}, {"d", x.as<Dual>().d}};
      case Kind::GVar: return json{{"x", conv(*x.as<GVar>().x)}, {"g", conv(*x.as<GVar>().g)}};
      case Kind::Record: {
        json out = json::object();
        for (const auto& [name, f] : x.as<Record>().fields) out[name] = conv(f);
        return out;
      }
      case Kind::Array: {
        const Array& a = x.as<Array>();
        json out = json::array();
        if (a.rank() == 2) {
          for (std::size_t r = 0; r < a.shape[0]; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < a.shape[1]; ++c) row.push_back(conv(a.data[c * a.shape[0] + r]));
            out.push_back(row);
          }
        } else {
          for (const auto& e : a.data) out.push_back(conv(e));
        }
        return out;
      }
    }
    return nullptr;
  };
  return conv(v).dump();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reversible language toolchain: run, invert, differentiate and benchmark .rnl programs", "revlang"};
  app.require_subcommand(1);
  Common c;
  app.add_flag("--no-invcheck", c.no_invcheck, "Skip reversibility checks");
  app.add_flag("--trace", c.trace, "Trace executed statements to stderr");
  app.add_option("--max-steps", c.max_steps, "Statement budget");

  auto* run_cmd = app.add_subcommand("run", "Run a function and print its arguments as JSON");
  run_cmd->add_option("file", c.file, "Source file")->required();
  run_cmd->add_option("-f,--function", c.fname, "Function name")->required();
  run_cmd->add_option("-a,--args", c.args, "Comma-separated argument literals");
  bool uncall_flag = false;
  run_cmd->add_flag("--uncall", uncall_flag, "Run the inverse instead");

  auto* inv_cmd = app.add_subcommand("invert", "Print the inverted program");
  inv_cmd->add_option("file", c.file, "Source file")->required();
  inv_cmd->add_option("-f,--function", c.fname, "Only this function");

  std::vector<std::string> seeds, wrt;
  auto* grad_cmd = app.add_subcommand("grad", "Gradient by reverse execution");
  auto* hess_cmd = app.add_subcommand("hessian", "Forward-over-reverse Hessian");
  for (auto* cmd : {grad_cmd, hess_cmd}) {
    cmd->add_option("file", c.file, "Source file")->required();
    cmd->add_option("-f,--function", c.fname, "Function name")->required();
    cmd->add_option("-a,--args", c.args, "Comma-separated argument literals");
    cmd->add_option("--seed", seeds, "Output cotangent ARG[:COMPONENT][=VALUE]; default ARG0:0=1");
    cmd->add_option("--wrt", wrt, "Arguments to differentiate against")->delimiter(',');
  }

  int trials = 20;
  bool as_json = false;
  std::uint64_t rng_seed = 1;
  auto* check_cmd = app.add_subcommand("check", "Run f then ~f on random trials");
  check_cmd->add_option("file", c.file, "Source file")->required();
  check_cmd->add_option("-f,--function", c.fname, "Function name")->required();
  check_cmd->add_option("-a,--args", c.args, "Template arguments; Float leaves are jittered per trial");
  check_cmd->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  check_cmd->add_option("--rng-seed", rng_seed, "Random seed");
  check_cmd->add_flag("--json", as_json, "JSON report");

  auto* bench_cmd = app.add_subcommand("bench", "Time-space tradeoff schedules");
  bench_cmd->require_subcommand(1);
  std::int64_t k = 2, n = 1, T = 10, d = 2;
  auto* bennett_cmd = bench_cmd->add_subcommand("bennett", "k-way Bennett schedule on k^n steps");
  bennett_cmd->add_option("-k", k, "Partition")->required();
  bennett_cmd->add_option("-n", n, "Recursion depth")->required();
  auto* tree_cmd = bench_cmd->add_subcommand("treeverse", "Binomial checkpointing");
  tree_cmd->add_option("-T", T, "Steps")->required();
  tree_cmd->add_option("-d", d, "Snapshots")->required();

  std::int64_t rsteps = 10'000;
  int precision = 64, points = 10;
  auto* round_cmd = app.add_subcommand("roundoff", "Leapfrog reversal error as CSV");
  round_cmd->add_option("--steps", rsteps, "Horizon")->check(CLI::NonNegativeNumber);
  round_cmd->add_option("--precision", precision, "32 or 64")->check(CLI::IsMember({32, 64}));
  round_cmd->add_option("--points", points, "Rows")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    const ExecOptions opts = exec_options(c, err);
    if (run_cmd->parsed()) {
      Loaded l = load_file(c.file);
      Interpreter interp(l.program, opts);
      auto args = parse_args(c.args);
      auto res = uncall_flag ? interp.uncall(c.fname, args) : interp.run(c.fname, args);
      out << json{{"args", args_json(res)}}.dump() << "\n";
    } else if (inv_cmd->parsed()) {
      Loaded l = load_file(c.file);
      if (c.fname.empty()) {
        out << pretty_print(invert_program(l.program));
      } else {
        out << pretty_print(invert_function(expand_routines(find_function(l.program, c.fname))));
      }
    } else if (grad_cmd->parsed() || hess_cmd->parsed()) {
      Loaded l = load_file(c.file);
      const FunctionDef& f = find_function(l.program, c.fname);
      GradRequest req;
      req.fname = c.fname;
      req.args = parse_args(c.args);
      for (const auto& s : seeds) req.seeds.push_back(parse_seed(f, s));
      for (const auto& w : wrt) req.wrt.push_back(param_index(f, w));
      GradResult g = gradient(l.program, req, opts);
      json grads = json::object();
      for (std::size_t i = 0; i < f.params.size() && i < g.gradients.size(); ++i) {
        bool wanted = req.wrt.empty() || std::count(req.wrt.begin(), req.wrt.end(), i) > 0;
        grads[f.params[i].name] = wanted ? grad_json(req.args[i], g.gradients[i]) : json(nullptr);
      }
      json doc{{"primal", args_json(g.outputs)}, {"grads", grads}};
      if (hess_cmd->parsed()) {
        HessianResult h = hessian(l.program, req, opts);
        doc["hessian"] = h.h;
        doc["asymmetry"] = h.asymmetry;
      }
      out << doc.dump() << "\n";
    } else if (check_cmd->parsed()) {
      Loaded l = load_file(c.file);
      std::mt19937_64 rng(rng_seed);
      std::vector<Value> base = parse_args(c.args);
      json failures = json::array();
      int passed = 0;
      double worst = 0.0;
      std::string first_error;
      for (int t = 0; t < trials; ++t) {
        std::vector<Value> a = base;
        if (t > 0) {
          for (auto& v : a) v = jitter(v, rng);
        }
        ReversibilityReport r = check_reversibility(l.program, c.fname, a, opts);
        worst = std::max(worst, r.max_deviation);
        if (r.ok) {
          ++passed;
        } else {
          std::string name = r.error ? std::string(error_name(*r.error)) : "ReversibilityMismatch";
          if (first_error.empty()) first_error = r.message.empty() ? name : r.message;
          failures.push_back({{"trial", t}, {"error", name}, {"message", r.message}});
        }
      }
      json doc{{"function", c.fname}, {"trials", trials}, {"passed", passed},
               {"failed", trials - passed}, {"max_deviation", worst}, {"failures", failures}};
      if (as_json) {
        out << doc.dump() << "\n";
      } else {
        out << c.fname << ": " << passed << "/" << trials << " trials reversible, max deviation " << worst << "\n";
      }
      if (passed != trials) {
        err << first_error << "\n";
        return kExitRuntime;
      }
    } else if (bennett_cmd->parsed()) {
      auto [steps_cf, peak_cf] = bennett_counts(k, n);
      std::int64_t len = 1;
      for (std::int64_t i = 0; i < n; ++i) len *= k;
      StepProgram<double> prog{len, [](std::int64_t, const double& s) { return 2.0 * s; }, 1.0};
      auto [final_state, cnt] = bennett_run(prog, k, 1, len);
      auto [tr, sr] = analytic_rev_cost(static_cast<double>(len), 1.0, static_cast<double>(k));
      json doc{{"scheme", "bennett"}, {"k", k}, {"n", n}, {"length", len},
               {"steps", cnt.forward_steps + cnt.inverse_steps}, {"peak", cnt.peak_states},
               {"analytic", {{"steps", steps_cf}, {"peak", peak_cf}, {"time", tr}, {"space", sr}}}};
      out << doc.dump() << "\n";
    } else if (tree_cmd->parsed()) {
      std::int64_t visits = 0;
      StepProgram<double> prog{T, [](std::int64_t, const double& s) { return s + 1.0; }, 0.0};
      auto [acc, cnt] = treeverse_run<double, std::int64_t>(
          prog, d, [](std::int64_t, const double&, std::int64_t a) { return a + 1; }, visits);
      const std::int64_t t = treeverse_sweeps(T, d);
      json doc{{"scheme", "treeverse"}, {"T", T}, {"d", d}, {"steps", cnt.forward_steps},
               {"peak", cnt.snapshots_peak}, {"backsteps", acc},
               {"analytic", {{"sweeps", t}, {"eta", eta(t, d)}, {"bound", t * T}}}};
      out << doc.dump() << "\n";
    } else if (round_cmd->parsed()) {
      auto rows = roundoff_experiment(SolarSystemConfig::two_body(), rsteps,
                                      precision == 32 ? Precision::Binary32 : Precision::Binary64, points);
      out << roundoff_csv(rows);
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SyntaxError& e) {
    err << e.what() << "\n";
    return kExitParse;
  } catch (const RevError& e) {
    err << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("revlang");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace revlang
