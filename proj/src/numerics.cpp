#include "revlang/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "revlang/errors.hpp"

namespace revlang {

namespace {

constexpr double kPi = 3.14159265358979323846;

Jac2 holomorphic(Complex w) {
  Jac2 j;
  j.m[0][0] = w.real();
  j.m[0][1] = -w.imag();
  j.m[1][0] = w.imag();
  j.m[1][1] = w.real();
  return j;
}

Jac2 real_row(double dre, double dim) {
  Jac2 j;
  j.m[0][0] = dre;
  j.m[0][1] = dim;
  return j;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

bool truthy(const Value& v) {
  switch (v.kind()) {
    case Kind::Bool: return v.as<bool>();
    case Kind::Int: return v.as<std::int64_t>() != 0;
    default: throw RevError(ErrorKind::TypeError, "expected a Bool, got " + std::string(kind_name(v.kind())));
  }
}

// Three-way comparison of real scalars; exact where both sides are discrete.
int compare_real(const Value& a0, const Value& b0) {
  const Value a = primal_of(a0);
  const Value b = primal_of(b0);
  auto sign = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  auto as_int = [](const Value& v) -> std::optional<std::int64_t> {
    if (v.kind() == Kind::Int) return v.as<std::int64_t>();
    if (v.kind() == Kind::Bool) return v.as<bool>() ? 1 : 0;
    return std::nullopt;
  };
  if (auto x = as_int(a), y = as_int(b); x && y) return sign(*x, *y);
  if (a.kind() == Kind::Fixed && b.kind() == Kind::Fixed) return sign(a.as<Fixed>().raw(), b.as<Fixed>().raw());
  if (a.kind() == Kind::ULog && b.kind() == Kind::ULog) {
    return sign(a.as<ULog>().raw_exponent(), b.as<ULog>().raw_exponent());
  }
  if (a.kind() == Kind::Complex || b.kind() == Kind::Complex) {
    throw RevError(ErrorKind::TypeError, "complex numbers are unordered");
  }
  return sign(to_double(a), to_double(b));
}

bool values_equal(const Value& a0, const Value& b0) {
  const Value a = primal_of(a0);
  const Value b = primal_of(b0);
  if (a.kind() == Kind::Complex || b.kind() == Kind::Complex) {
    auto c = [](const Value& v) { return v.kind() == Kind::Complex ? v.as<Complex>() : Complex(to_double(v), 0.0); };
    return c(a) == c(b);
  }
  return compare_real(a, b) == 0;
}

std::vector<ScalarFunction> build_registry() {
  std::vector<ScalarFunction> t;
  t.push_back({.name = "identity",
               .id = FnId::Identity,
               .arity = 1,
               .real = [](const Dual* x) { return x[0]; },
               .real_partials = [](const Dual*, Dual* o) { o[0] = 1.0; },
               .complex = [](const Complex* z) { return z[0]; },
               .complex_jacobian = [](const Complex*, Jac2* o) { o[0] = holomorphic(1.0); },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return x[0]; }});
  t.push_back(t.back());
  t.back().name = "convert";
  t.back().id = FnId::Convert;

  t.push_back({.name = "add",
               .id = FnId::Add,
               .arity = 2,
               .real = [](const Dual* x) { return x[0] + x[1]; },
               .real_partials = [](const Dual*, Dual* o) { o[0] = 1.0, o[1] = 1.0; },
               .complex = [](const Complex* z) { return z[0] + z[1]; },
               .complex_jacobian = [](const Complex*, Jac2* o) { o[0] = o[1] = holomorphic(1.0); },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return wrap_add(x[0], x[1]); }});
  t.push_back({.name = "sub",
               .id = FnId::Sub,
               .arity = 2,
               .real = [](const Dual* x) { return x[0] - x[1]; },
               .real_partials = [](const Dual*, Dual* o) { o[0] = 1.0, o[1] = -1.0; },
               .complex = [](const Complex* z) { return z[0] - z[1]; },
               .complex_jacobian = [](const Complex*, Jac2* o) { o[0] = holomorphic(1.0), o[1] = holomorphic(-1.0); },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return wrap_sub(x[0], x[1]); }});
  t.push_back({.name = "mul",
               .id = FnId::Mul,
               .arity = 2,
               .real = [](const Dual* x) { return x[0] * x[1]; },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = x[1], o[1] = x[0]; },
               .complex = [](const Complex* z) { return z[0] * z[1]; },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(z[1]), o[1] = holomorphic(z[0]); },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return wrap_mul(x[0], x[1]); }});
  t.push_back({.name = "div",
               .id = FnId::Div,
               .arity = 2,
               .real = [](const Dual* x) { return x[0] / x[1]; },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = Dual(1.0) / x[1], o[1] = -x[0] / (x[1] * x[1]); },
               .complex = [](const Complex* z) { return z[0] / z[1]; },
               .complex_jacobian =
                   [](const Complex* z, Jac2* o) {
                     o[0] = holomorphic(1.0 / z[1]);
                     o[1] = holomorphic(-z[0] / (z[1] * z[1]));
                   },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> {
                 if (x[1] == 0 || x[0] % x[1] != 0) return std::nullopt;
                 return x[0] / x[1];
               }});
  t.push_back({.name = "pow",
               .id = FnId::Pow,
               .arity = 2,
               .real = [](const Dual* x) { return pow(x[0], x[1]); },
               .real_partials =
                   [](const Dual* x, Dual* o) {
                     o[0] = x[1] * pow(x[0], x[1] - Dual(1.0));
                     o[1] = x[0].v > 0 ? pow(x[0], x[1]) * log(x[0]) : Dual(0.0);
                   },
               .complex = [](const Complex* z) { return std::pow(z[0], z[1]); },
               .complex_jacobian =
                   [](const Complex* z, Jac2* o) {
                     o[0] = holomorphic(z[1] * std::pow(z[0], z[1] - 1.0));
                     o[1] = holomorphic(std::pow(z[0], z[1]) * std::log(z[0]));
                   },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> {
                 if (x[1] < 0) return std::nullopt;
                 std::int64_t base = x[0], e = x[1], r = 1;
                 while (e > 0) {
                   if (e & 1) r = wrap_mul(r, base);
                   base = wrap_mul(base, base);
                   e >>= 1;
                 }
                 return r;
               }});
  t.push_back({.name = "neg",
               .id = FnId::Neg,
               .arity = 1,
               .real = [](const Dual* x) { return -x[0]; },
               .real_partials = [](const Dual*, Dual* o) { o[0] = -1.0; },
               .complex = [](const Complex* z) { return -z[0]; },
               .complex_jacobian = [](const Complex*, Jac2* o) { o[0] = holomorphic(-1.0); },
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return wrap_sub(0, x[0]); }});
  t.push_back({.name = "abs",
               .id = FnId::Abs,
               .arity = 1,
               .real = [](const Dual* x) { return abs(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = x[0].v < 0 ? -1.0 : 1.0; },
               .complex = [](const Complex* z) { return Complex(std::abs(z[0]), 0.0); },
               .complex_jacobian =
                   [](const Complex* z, Jac2* o) {
                     double r = std::abs(z[0]);
                     o[0] = real_row(z[0].real() / r, z[0].imag() / r);
                   },
               .complex_to_real = true,
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return x[0] < 0 ? -x[0] : x[0]; }});
  t.push_back({.name = "abs2",
               .id = FnId::Abs2,
               .arity = 1,
               .real = [](const Dual* x) { return x[0] * x[0]; },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = Dual(2.0) * x[0]; },
               .complex = [](const Complex* z) { return Complex(std::norm(z[0]), 0.0); },
               .complex_jacobian =
                   [](const Complex* z, Jac2* o) { o[0] = real_row(2.0 * z[0].real(), 2.0 * z[0].imag()); },
               .complex_to_real = true,
               .integer = [](const std::int64_t* x) -> std::optional<std::int64_t> { return wrap_mul(x[0], x[0]); }});
  t.push_back({.name = "sqrt",
               .id = FnId::Sqrt,
               .arity = 1,
               .real = [](const Dual* x) { return sqrt(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = Dual(1.0) / (Dual(2.0) * sqrt(x[0])); },
               .complex = [](const Complex* z) { return std::sqrt(z[0]); },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(0.5 / std::sqrt(z[0])); }});
  t.push_back({.name = "exp",
               .id = FnId::Exp,
               .arity = 1,
               .real = [](const Dual* x) { return exp(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = exp(x[0]); },
               .complex = [](const Complex* z) { return std::exp(z[0]); },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(std::exp(z[0])); }});
  t.push_back({.name = "log",
               .id = FnId::Log,
               .arity = 1,
               .real = [](const Dual* x) { return log(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = Dual(1.0) / x[0]; },
               .complex = [](const Complex* z) { return std::log(z[0]); },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(1.0 / z[0]); }});
  t.push_back({.name = "sin",
               .id = FnId::Sin,
               .arity = 1,
               .real = [](const Dual* x) { return sin(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = cos(x[0]); },
               .complex = [](const Complex* z) { return std::sin(z[0]); },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(std::cos(z[0])); }});
  t.push_back({.name = "cos",
               .id = FnId::Cos,
               .arity = 1,
               .real = [](const Dual* x) { return cos(x[0]); },
               .real_partials = [](const Dual* x, Dual* o) { o[0] = -sin(x[0]); },
               .complex = [](const Complex* z) { return std::cos(z[0]); },
               .complex_jacobian = [](const Complex* z, Jac2* o) { o[0] = holomorphic(-std::sin(z[0])); }});
  t.push_back({.name = "atan2",
               .id = FnId::Atan2,
               .arity = 2,
               .real = [](const Dual* x) { return atan2(x[0], x[1]); },
               .real_partials =
                   [](const Dual* x, Dual* o) {
                     Dual r2 = x[0] * x[0] + x[1] * x[1];
                     o[0] = x[1] / r2;
                     o[1] = -x[0] / r2;
                   }});
  t.push_back({.name = "angle",
               .id = FnId::Angle,
               .arity = 1,
               .real = [](const Dual* x) { return Dual(x[0].v < 0 ? kPi : 0.0); },
               .real_partials = [](const Dual*, Dual* o) { o[0] = 0.0; },
               .complex = [](const Complex* z) { return Complex(std::arg(z[0]), 0.0); },
               .complex_jacobian =
                   [](const Complex* z, Jac2* o) {
                     double r2 = std::norm(z[0]);
                     o[0] = real_row(-z[0].imag() / r2, z[0].real() / r2);
                   },
               .complex_to_real = true});

  auto pred = [&](std::string_view name, FnId id, std::size_t arity, bool (*p)(const Value*)) {
    ScalarFunction f{.name = name, .id = id, .arity = arity};
    f.predicate = p;
    t.push_back(f);
  };
  pred("eq", FnId::Eq, 2, [](const Value* x) { return values_equal(x[0], x[1]); });
  pred("ne", FnId::Ne, 2, [](const Value* x) { return !values_equal(x[0], x[1]); });
  pred("lt", FnId::Lt, 2, [](const Value* x) { return compare_real(x[0], x[1]) < 0; });
  pred("le", FnId::Le, 2, [](const Value* x) { return compare_real(x[0], x[1]) <= 0; });
  pred("gt", FnId::Gt, 2, [](const Value* x) { return compare_real(x[0], x[1]) > 0; });
  pred("ge", FnId::Ge, 2, [](const Value* x) { return compare_real(x[0], x[1]) >= 0; });
  pred("and", FnId::And, 2, [](const Value* x) { return truthy(x[0]) && truthy(x[1]); });
  pred("or", FnId::Or, 2, [](const Value* x) { return truthy(x[0]) || truthy(x[1]); });
  pred("not", FnId::Not, 1, [](const Value* x) { return !truthy(x[0]); });
  return t;
}

Dual to_dual(const Value& v) {
  if (v.kind() == Kind::Dual) return v.as<Dual>();
  return Dual(to_double(v));
}

Complex to_complex(const Value& v) {
  if (v.kind() == Kind::Complex) return v.as<Complex>();
  if (v.kind() == Kind::Dual) throw RevError(ErrorKind::TypeError, "cannot mix Dual and Complex");
  return Complex(to_double(v), 0.0);
}

Fixed to_fixed(const Value& r, const NumericOptions& opts) {
  switch (r.kind()) {
    case Kind::Fixed: return r.as<Fixed>();
    case Kind::Int: return Fixed::from_int(r.as<std::int64_t>());
    case Kind::Bool: return Fixed::from_int(r.as<bool>() ? 1 : 0);
    case Kind::Complex: throw RevError(ErrorKind::TypeError, "cannot add a Complex into a Fixed");
    default: {
      double d = to_double(r);
      if (opts.checked) {
        auto f = Fixed::from_double_checked(d);
        if (!f) throw RevError(ErrorKind::OverflowError, "value outside the Fixed range");
        return *f;
      }
      return Fixed::from_double(d);
    }
  }
}

ULog to_ulog(const Value& r) {
  if (r.kind() == Kind::ULog) return r.as<ULog>();
  if (r.kind() == Kind::Complex) throw RevError(ErrorKind::TypeError, "cannot convert a Complex to ULog");
  double d = to_double(r);
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw RevError(ErrorKind::DomainError, "ULog needs a positive finite value, got " + to_string(r));
  }
  return ULog::from_double(d);
}

std::int64_t to_int_operand(const Value& r, std::string_view what) {
  if (r.kind() == Kind::Int) return r.as<std::int64_t>();
  if (r.kind() == Kind::Bool) return r.as<bool>() ? 1 : 0;
  throw RevError(ErrorKind::TypeError,
                 std::string(what) + " needs an integer right-hand side, got " + std::string(kind_name(r.kind())));
}

double round_if(double v, bool f32) { return f32 ? round_to_float32(v) : v; }

// Cotangent components of a gradient value.
struct Cot {
  Dual re;
  Dual im;
};

Cot cot_of(const Value& g) {
  switch (g.kind()) {
    case Kind::Complex: return {g.as<Complex>().real(), g.as<Complex>().imag()};
    case Kind::Dual: return {g.as<Dual>(), 0.0};
    default: return {to_double(g), 0.0};
  }
}

Value store_cot(const Cot& c, const Value& primal, const Value& old_g) {
  if (primal.kind() == Kind::Complex) return Complex(c.re.v, c.im.v);
  if (old_g.kind() == Kind::Dual || primal.kind() == Kind::Dual || c.re.d != 0.0) return c.re;
  return c.re.v;
}

// g += sign * c for the gradient stored in a GVar argument.
void accumulate(Value& arg, const Cot& c, double sign) {
  if (arg.kind() != Kind::GVar) return;
  GVar& gv = arg.as<GVar>();
  Cot old = cot_of(*gv.g);
  Cot next{old.re + Dual(sign) * c.re, old.im + Dual(sign) * c.im};
  *gv.g = store_cot(next, *gv.x, *gv.g);
}

// Contributions J_i^T (gu, gv) of f's output cotangent to each operand.
std::vector<Cot> backprop(const ScalarFunction& f, std::span<const Value> primals, Dual gu, Dual gv) {
  const std::size_t n = primals.size();
  std::vector<Cot> out(n);
  bool complex_path = false;
  for (const auto& p : primals) complex_path |= p.kind() == Kind::Complex;
  if (complex_path) {
    if (!f.complex_jacobian) throw RevError(ErrorKind::MissingAdjoint, "no complex adjoint for '" + std::string(f.name) + "'");
    std::array<Complex, 3> z;
    std::array<Jac2, 3> j;
    for (std::size_t i = 0; i < n; ++i) z[i] = to_complex(primals[i]);
    f.complex_jacobian(z.data(), j.data());
    for (std::size_t i = 0; i < n; ++i) {
      out[i].re = Dual(j[i].m[0][0]) * gu + Dual(j[i].m[1][0]) * gv;
      out[i].im = Dual(j[i].m[0][1]) * gu + Dual(j[i].m[1][1]) * gv;
    }
    return out;
  }
  if (!f.real_partials) throw RevError(ErrorKind::MissingAdjoint, "no adjoint rule for '" + std::string(f.name) + "'");
  std::array<Dual, 3> x;
  std::array<Dual, 3> p;
  for (std::size_t i = 0; i < n; ++i) x[i] = to_dual(primals[i]);
  f.real_partials(x.data(), p.data());
  for (std::size_t i = 0; i < n; ++i) out[i] = {gu * p[i], 0.0};
  return out;
}

std::vector<Value> primals_of(std::span<const Value> args) {
  std::vector<Value> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(primal_of(a));
  return out;
}

Value negate(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return wrap_sub(0, v.as<std::int64_t>());
    case Kind::Fixed: return -v.as<Fixed>();
    case Kind::Float: return -v.as<double>();
    case Kind::Complex: return -v.as<Complex>();
    case Kind::Dual: return -v.as<Dual>();
    case Kind::GVar: {
      const GVar& g = v.as<GVar>();
      return Value::gvar(negate(*g.x), negate(*g.g));
    }
    default: throw RevError(ErrorKind::TypeError, "NEG on " + std::string(kind_name(v.kind())));
  }
}

Value step_by_one(const Value& v, bool up) {
  switch (v.kind()) {
    case Kind::Int: return up ? wrap_add(v.as<std::int64_t>(), 1) : wrap_sub(v.as<std::int64_t>(), 1);
    case Kind::Fixed: return up ? v.as<Fixed>() + Fixed::from_int(1) : v.as<Fixed>() - Fixed::from_int(1);
    case Kind::Float: return v.as<double>() + (up ? 1.0 : -1.0);
    case Kind::Dual: return v.as<Dual>() + Dual(up ? 1.0 : -1.0);
    case Kind::GVar: {
      const GVar& g = v.as<GVar>();
      return Value::gvar(step_by_one(*g.x, up), *g.g);
    }
    default: throw RevError(ErrorKind::TypeError, std::string(up ? "INC" : "DEC") + " on " + std::string(kind_name(v.kind())));
  }
}

Value xor_into(const Value& target, const Value& r) {
  switch (target.kind()) {
    case Kind::Int: return target.as<std::int64_t>() ^ to_int_operand(r, "xor");
    case Kind::Bool: return target.as<bool>() != (to_int_operand(r, "xor") != 0);
    default: throw RevError(ErrorKind::TypeError, "xor on " + std::string(kind_name(target.kind())));
  }
}

Value store_real_like(Dual r, const Value& like, bool any_dual, bool f32) {
  if (like.kind() == Kind::Dual || any_dual) return r;
  if (like.kind() == Kind::Float) return round_if(r.v, f32);
  throw RevError(ErrorKind::TypeError, "ROT on " + std::string(kind_name(like.kind())));
}

std::vector<Value> rotate(InstrKind kind, std::vector<Value> args, const NumericOptions& opts, bool adjoint) {
  if (adjoint) {
    for (auto& a : args) a = promote_gvar(std::move(a));
  }
  const Value pa = primal_of(args[0]);
  const Value pb = primal_of(args[1]);
  const Value pt = primal_of(args[2]);
  const bool any_dual = pa.kind() == Kind::Dual || pb.kind() == Kind::Dual || pt.kind() == Kind::Dual;
  Dual a = to_dual(pa), b = to_dual(pb), th = to_dual(pt);
  Dual phi = kind == InstrKind::Rot ? th : -th;
  Dual c = cos(phi), s = sin(phi);
  Value na = store_real_like(a * c - b * s, pa, any_dual, opts.float32);
  Value nb = store_real_like(a * s + b * c, pb, any_dual, opts.float32);
  if (adjoint && args[0].kind() == Kind::GVar && args[1].kind() == Kind::GVar) {
    Dual ga = cot_of(*args[0].as<GVar>().g).re;
    Dual gb = cot_of(*args[1].as<GVar>().g).re;
    double sigma = kind == InstrKind::Rot ? 1.0 : -1.0;
    accumulate(args[2], {ga * b - gb * a, 0.0}, sigma);
    GVar& A = args[0].as<GVar>();
    GVar& B = args[1].as<GVar>();
    *A.g = store_cot({ga * c - gb * s, 0.0}, na, *A.g);
    *B.g = store_cot({ga * s + gb * c, 0.0}, nb, *B.g);
    *A.x = std::move(na);
    *B.x = std::move(nb);
  } else {
    args[0] = std::move(na);
    args[1] = std::move(nb);
  }
  return args;
}

std::vector<Value> apply_update_plain(const PrimitiveInstr& in, std::vector<Value> args, const NumericOptions& opts) {
  std::span<const Value> ops(args.data() + 1, args.size() - 1);
  Value r = apply_function(*in.fn, ops);
  args[0] = combine_update(in.kind, args[0], r, opts);
  return args;
}

std::vector<Value> adjoint_update(const PrimitiveInstr& in, std::vector<Value> args, const NumericOptions& opts) {
  for (auto& a : args) a = promote_gvar(std::move(a));
  const std::vector<Value> ops = primals_of(std::span<const Value>(args.data() + 1, args.size() - 1));
  Value r = apply_function(*in.fn, ops);
  Value& t = args[0];
  if (t.kind() != Kind::GVar || in.kind == InstrKind::XorEq) {
    t = combine_update(in.kind, primal_of(t), r, opts);
    return args;
  }
  bool any_grad_operand = false;
  for (std::size_t i = 1; i < args.size(); ++i) any_grad_operand |= args[i].kind() == Kind::GVar;

  GVar& tg = t.as<GVar>();
  Cot gy = cot_of(*tg.g);
  switch (in.kind) {
    case InstrKind::PlusEq:
    case InstrKind::MinusEq: {
      if (any_grad_operand) {
        bool target_complex = tg.x->kind() == Kind::Complex;
        Dual gu = gy.re;
        Dual gv = target_complex ? gy.im : Dual(0.0);
        auto contrib = backprop(*in.fn, ops, gu, gv);
        double sign = in.kind == InstrKind::MinusEq ? 1.0 : -1.0;
        for (std::size_t i = 1; i < args.size(); ++i) accumulate(args[i], contrib[i - 1], sign);
      }
      *tg.x = combine_update(in.kind, *tg.x, r, opts);
      break;
    }
    case InstrKind::MulEq:
    case InstrKind::DivEq: {
      Dual rv = to_dual(r);
      Dual ya = to_dual(*tg.x);
      *tg.x = combine_update(in.kind, *tg.x, r, opts);
      Dual yb = to_dual(*tg.x);
      Dual factor;
      if (in.kind == InstrKind::DivEq) {
        factor = gy.re * yb;
        *tg.g = store_cot({gy.re * rv, 0.0}, *tg.x, *tg.g);
      } else {
        factor = gy.re * (-ya / rv);
        *tg.g = store_cot({gy.re / rv, 0.0}, *tg.x, *tg.g);
      }
      if (any_grad_operand) {
        auto contrib = backprop(*in.fn, ops, factor, 0.0);
        for (std::size_t i = 1; i < args.size(); ++i) accumulate(args[i], contrib[i - 1], 1.0);
      }
      break;
    }
    default: break;
  }
  return args;
}

std::vector<Value> run_primitive(InstrKind kind, std::vector<Value> args, const NumericOptions& opts, bool adjoint) {
  switch (kind) {
    case InstrKind::Swap: std::swap(args[0], args[1]); return args;
    case InstrKind::Neg: args[0] = negate(args[0]); return args;
    case InstrKind::Inc: args[0] = step_by_one(args[0], true); return args;
    case InstrKind::Dec: args[0] = step_by_one(args[0], false); return args;
    case InstrKind::Xor: args[0] = xor_into(args[0], primal_of(args[1])); return args;
    case InstrKind::Rot:
    case InstrKind::IRot: return rotate(kind, std::move(args), opts, adjoint);
    default: break;
  }
  throw RevError(ErrorKind::TypeError, "not a primitive instruction");
}

std::size_t expected_args(const PrimitiveInstr& in) {
  switch (in.kind) {
    case InstrKind::Swap:
    case InstrKind::Xor: return 2;
    case InstrKind::Rot:
    case InstrKind::IRot: return 3;
    case InstrKind::Neg:
    case InstrKind::Inc:
    case InstrKind::Dec: return 1;
    default: return in.fn ? in.fn->arity + 1 : 0;
  }
}

void check_instr(const PrimitiveInstr& in, const std::vector<Value>& args) {
  if (is_update(in.kind) && !in.fn) throw RevError(ErrorKind::UnknownFunction, "update without a function");
  if (args.size() != expected_args(in)) {
    throw RevError(ErrorKind::ArityMismatch, std::string(instr_name(in.kind)) + " expects " +
                                                 std::to_string(expected_args(in)) + " arguments, got " +
                                                 std::to_string(args.size()));
  }
}

}  // namespace

const std::vector<ScalarFunction>& registered_functions() {
  static const std::vector<ScalarFunction> registry = build_registry();
  return registry;
}

const ScalarFunction* find_function(std::string_view name) {
  for (const auto& f : registered_functions()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

bool is_expression_function(std::string_view name) {
  static constexpr std::array<std::string_view, 9> kHelpers = {"size", "length", "zeros", "ulog", "fixed",
                                                               "float", "complex", "real", "imag"};
  if (find_function(name)) return true;
  return std::find(kHelpers.begin(), kHelpers.end(), name) != kHelpers.end();
}

Value apply_function(const ScalarFunction& f, std::span<const Value> raw) {
  if (raw.size() != f.arity) {
    throw RevError(ErrorKind::ArityMismatch, "'" + std::string(f.name) + "' takes " + std::to_string(f.arity) +
                                                 " arguments, got " + std::to_string(raw.size()));
  }
  std::array<Value, 3> p;
  bool any_complex = false, any_dual = false, all_int = true, all_fixed_int = true, any_fixed = false;
  bool all_ulog = true;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    p[i] = raw[i].kind() == Kind::GVar ? primal_of(raw[i]) : raw[i];
    Kind k = p[i].kind();
    if (!is_scalar(k)) {
      throw RevError(ErrorKind::TypeError,
                     "'" + std::string(f.name) + "' applied to " + std::string(kind_name(k)));
    }
    any_complex |= k == Kind::Complex;
    any_dual |= k == Kind::Dual;
    all_int &= k == Kind::Int || k == Kind::Bool;
    all_fixed_int &= k == Kind::Int || k == Kind::Bool || k == Kind::Fixed;
    any_fixed |= k == Kind::Fixed;
    all_ulog &= k == Kind::ULog;
  }
  if (f.predicate) return f.predicate(p.data());

  if (all_int && f.integer) {
    std::array<std::int64_t, 3> x{};
    for (std::size_t i = 0; i < raw.size(); ++i) x[i] = to_int_operand(p[i], f.name);
    if (auto r = f.integer(x.data())) return *r;
  }
  if (all_fixed_int && any_fixed) {
    auto fx = [&](std::size_t i) { return to_fixed(p[i], {}); };
    switch (f.id) {
      case FnId::Identity:
      case FnId::Convert: return fx(0);
      case FnId::Add: return fx(0) + fx(1);
      case FnId::Sub: return fx(0) - fx(1);
      case FnId::Mul: return fx(0) * fx(1);
      case FnId::Neg: return -fx(0);
      default: break;
    }
  }
  if (all_ulog) {
    switch (f.id) {
      case FnId::Identity:
      case FnId::Convert: return p[0];
      case FnId::Mul: return p[0].as<ULog>() * p[1].as<ULog>();
      case FnId::Div: return p[0].as<ULog>() / p[1].as<ULog>();
      default: break;
    }
  }
  if (any_complex) {
    if (any_dual) throw RevError(ErrorKind::TypeError, "cannot mix Dual and Complex");
    if (!f.complex) throw RevError(ErrorKind::TypeError, "'" + std::string(f.name) + "' has no complex form");
    std::array<Complex, 3> z;
    for (std::size_t i = 0; i < raw.size(); ++i) z[i] = to_complex(p[i]);
    Complex r = f.complex(z.data());
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw RevError(ErrorKind::DomainError, "'" + std::string(f.name) + "' is singular here");
    }
    if (f.complex_to_real) return r.real();
    return r;
  }
  if (!f.real) throw RevError(ErrorKind::TypeError, "'" + std::string(f.name) + "' has no real form");
  std::array<Dual, 3> x;
  bool inputs_finite = true;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    x[i] = to_dual(p[i]);
    inputs_finite &= std::isfinite(x[i].v);
  }
  Dual r = f.real(x.data());
  if (inputs_finite && !std::isfinite(r.v)) {
    throw RevError(ErrorKind::DomainError, "'" + std::string(f.name) + "' is singular here");
  }
  if (any_dual) return r;
  return r.v;
}

bool is_update(InstrKind kind) {
  return kind == InstrKind::PlusEq || kind == InstrKind::MinusEq || kind == InstrKind::MulEq ||
         kind == InstrKind::DivEq || kind == InstrKind::XorEq;
}

std::string_view instr_name(InstrKind kind) {
  switch (kind) {
    case InstrKind::PlusEq: return "PlusEq";
    case InstrKind::MinusEq: return "MinusEq";
    case InstrKind::MulEq: return "MulEq";
    case InstrKind::DivEq: return "DivEq";
    case InstrKind::XorEq: return "XorEq";
    case InstrKind::Swap: return "SWAP";
    case InstrKind::Rot: return "ROT";
    case InstrKind::IRot: return "IROT";
    case InstrKind::Neg: return "NEG";
    case InstrKind::Inc: return "INC";
    case InstrKind::Dec: return "DEC";
    case InstrKind::Xor: return "XOR";
  }
  return "?";
}

std::optional<InstrKind> primitive_kind(std::string_view name) {
  if (name == "SWAP") return InstrKind::Swap;
  if (name == "ROT") return InstrKind::Rot;
  if (name == "IROT") return InstrKind::IRot;
  if (name == "NEG") return InstrKind::Neg;
  if (name == "INC") return InstrKind::Inc;
  if (name == "DEC") return InstrKind::Dec;
  if (name == "XOR") return InstrKind::Xor;
  return std::nullopt;
}

Value combine_update(InstrKind op, const Value& target, const Value& r0, const NumericOptions& opts) {
  const Value r = r0.kind() == Kind::GVar ? primal_of(r0) : r0;
  const bool plus = op == InstrKind::PlusEq;
  switch (op) {
    case InstrKind::PlusEq:
    case InstrKind::MinusEq:
      switch (target.kind()) {
        case Kind::Int: {
          std::int64_t x = to_int_operand(r, "integer update");
          return plus ? wrap_add(target.as<std::int64_t>(), x) : wrap_sub(target.as<std::int64_t>(), x);
        }
        case Kind::Fixed: {
          Fixed x = to_fixed(r, opts);
          Fixed t = target.as<Fixed>();
          if (opts.checked) {
            __int128 wide = static_cast<__int128>(t.raw()) + (plus ? 1 : -1) * static_cast<__int128>(x.raw());
            if (wide > std::numeric_limits<std::int64_t>::max() || wide < std::numeric_limits<std::int64_t>::min()) {
              throw RevError(ErrorKind::OverflowError, "Fixed update overflows");
            }
          }
          return plus ? t + x : t - x;
        }
        case Kind::Float: {
          if (r.kind() == Kind::Complex) throw RevError(ErrorKind::TypeError, "cannot add a Complex into a Float");
          if (r.kind() == Kind::Dual) {
            Dual t(target.as<double>());
            return plus ? t + r.as<Dual>() : t - r.as<Dual>();
          }
          double x = round_if(to_double(r), opts.float32);
          double t = target.as<double>();
          return round_if(plus ? t + x : t - x, opts.float32);
        }
        case Kind::Dual: {
          Dual x = to_dual(r);
          return plus ? target.as<Dual>() + x : target.as<Dual>() - x;
        }
        case Kind::Complex: {
          Complex x = to_complex(r);
          return plus ? target.as<Complex>() + x : target.as<Complex>() - x;
        }
        case Kind::ULog: throw RevError(ErrorKind::TypeError, "ULog supports only *= and /=");
        default:
          throw RevError(ErrorKind::TypeError, "cannot update a " + std::string(kind_name(target.kind())));
      }
    case InstrKind::MulEq:
    case InstrKind::DivEq: {
      if (target.kind() != Kind::ULog) {
        throw RevError(ErrorKind::TypeError,
                       "*= and /= need a ULog target, got " + std::string(kind_name(target.kind())));
      }
      ULog x = to_ulog(r);
      return op == InstrKind::MulEq ? target.as<ULog>() * x : target.as<ULog>() / x;
    }
    case InstrKind::XorEq: return xor_into(target, r);
    default: break;
  }
  throw RevError(ErrorKind::TypeError, "not an update instruction");
}

std::vector<Value> apply_instr(const PrimitiveInstr& instr, std::vector<Value> args, const NumericOptions& opts) {
  check_instr(instr, args);
  if (is_update(instr.kind)) return apply_update_plain(instr, std::move(args), opts);
  return run_primitive(instr.kind, std::move(args), opts, false);
}

PrimitiveInstr invert_instr(const PrimitiveInstr& instr) {
  PrimitiveInstr out = instr;
  switch (instr.kind) {
    case InstrKind::PlusEq: out.kind = InstrKind::MinusEq; break;
    case InstrKind::MinusEq: out.kind = InstrKind::PlusEq; break;
    case InstrKind::MulEq: out.kind = InstrKind::DivEq; break;
    case InstrKind::DivEq: out.kind = InstrKind::MulEq; break;
    case InstrKind::Rot: out.kind = InstrKind::IRot; break;
    case InstrKind::IRot: out.kind = InstrKind::Rot; break;
    case InstrKind::Inc: out.kind = InstrKind::Dec; break;
    case InstrKind::Dec: out.kind = InstrKind::Inc; break;
    default: break;
  }
  return out;
}

std::vector<Value> adjoint_instr(const PrimitiveInstr& instr, std::vector<Value> args, const NumericOptions& opts) {
  check_instr(instr, args);
  if (is_update(instr.kind)) return adjoint_update(instr, std::move(args), opts);
  return run_primitive(instr.kind, std::move(args), opts, true);
}

std::vector<Value> dispatch_instr(const PrimitiveInstr& instr, std::vector<Value> args, const NumericOptions& opts) {
  for (const auto& a : args) {
    if (a.kind() == Kind::GVar) return adjoint_instr(instr, std::move(args), opts);
  }
  return apply_instr(instr, std::move(args), opts);
}

Fixed fixed_roundtrip(Fixed v, Fixed w) { return (v + w) - w; }
ULog ulog_roundtrip(ULog v, ULog w) { return (v * w) / w; }

Value promote_gvar(Value v) {
  switch (v.kind()) {
    case Kind::Fixed:
    case Kind::Float:
    case Kind::Complex:
    case Kind::ULog:
    case Kind::Dual: {
      Value z = zero_cotangent(v);
      return Value::gvar(std::move(v), std::move(z));
    }
    case Kind::Array:
      for (auto& e : v.as<Array>().data) e = promote_gvar(std::move(e));
      return v;
    case Kind::Record:
      for (auto& f : v.as<Record>().fields) f.second = promote_gvar(std::move(f.second));
      return v;
    default: return v;
  }
}

namespace {

Value convert_like(const Value& r, const Value& like) {
  switch (like.kind()) {
    case Kind::Int: return to_int_operand(r, "bijector on Int");
    case Kind::Fixed: return to_fixed(r, {});
    case Kind::Float:
      if (r.kind() == Kind::Dual) return r;
      return to_double(r);
    case Kind::Dual: return to_dual(r);
    case Kind::Complex: return to_complex(r);
    case Kind::ULog: return to_ulog(r);
    default: throw RevError(ErrorKind::TypeError, "bijector on " + std::string(kind_name(like.kind())));
  }
}

Value scale_grad(const Value& g, double factor) {
  switch (g.kind()) {
    case Kind::Complex: return g.as<Complex>() * factor;
    case Kind::Dual: return g.as<Dual>() * Dual(factor);
    default: return to_double(g) * factor;
  }
}

}  // namespace

Value apply_bijector(std::string_view name, std::span<const Value> args, const Value& v, bool inverse) {
  if (v.kind() == Kind::GVar) {
    const GVar& g = v.as<GVar>();
    double slope = 1.0;
    if (name == "neg") {
      slope = -1.0;
    } else if (name == "mulconst") {
      slope = to_double(args[0]);
    }
    Value x = apply_bijector(name, args, *g.x, inverse);
    return Value::gvar(std::move(x), scale_grad(*g.g, inverse ? slope : 1.0 / slope));
  }
  if (name == "neg") return negate(v);
  if (name == "addconst") {
    const ScalarFunction& f = *find_function(inverse ? "sub" : "add");
    std::array<Value, 2> a{v, args[0]};
    return convert_like(apply_function(f, a), v);
  }
  if (name == "mulconst") {
    if (to_double(args[0]) == 0.0) throw RevError(ErrorKind::DomainError, "mulconst(0) is not invertible");
    if (v.kind() == Kind::Fixed || v.kind() == Kind::ULog) {
      throw RevError(ErrorKind::TypeError, "mulconst is not exactly invertible on " + std::string(kind_name(v.kind())));
    }
    const ScalarFunction& f = *find_function(inverse ? "div" : "mul");
    std::array<Value, 2> a{v, args[0]};
    Value r = apply_function(f, a);
    if (v.kind() == Kind::Int && r.kind() != Kind::Int) {
      throw RevError(ErrorKind::DomainError, "mulconst inverse leaves the integers");
    }
    return convert_like(r, v);
  }
  throw RevError(ErrorKind::UnknownFunction, "no bijector '" + std::string(name) + "'");
}

}  // namespace revlang
