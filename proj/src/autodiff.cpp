#include "revlang/autodiff.hpp"

#include <cmath>

namespace revlang {

namespace {

// Calls f(leaf, part) on every differentiable scalar in flattening order;
// part is -1 for real leaves and 0/1 for the parts of a Complex.
template <class V, class F>
void each_leaf(V& v, F&& f) {
  switch (v.kind()) {
    case Kind::Array:
      for (auto& e : v.template as<Array>().data) each_leaf(e, f);
      return;
    case Kind::Record:
      for (auto& fld : v.template as<Record>().fields) each_leaf(fld.second, f);
      return;
    case Kind::GVar: {
      const Value& x = *v.template as<GVar>().x;
      if (x.kind() == Kind::Complex) {
        f(v, 0);
        f(v, 1);
      } else if (is_differentiable_scalar(x.kind())) {
        f(v, -1);
      }
      return;
    }
    case Kind::Complex:
      f(v, 0);
      f(v, 1);
      return;
    default:
      if (is_differentiable_scalar(v.kind())) f(v, -1);
      return;
  }
}

double real_part(const Value& leaf, int part) {
  if (leaf.kind() == Kind::GVar) return real_part(*leaf.as<GVar>().x, part);
  if (part >= 0) {
    const Complex& z = leaf.as<Complex>();
    return part == 0 ? z.real() : z.imag();
  }
  return to_double(leaf);
}

Dual grad_part(const Value& g, int part) {
  switch (g.kind()) {
    case Kind::Complex: return part == 0 ? g.as<Complex>().real() : g.as<Complex>().imag();
    case Kind::Dual: return g.as<Dual>();
    default: return to_double(g);
  }
}

void add_grad(Value& g, int part, double val) {
  switch (g.kind()) {
    case Kind::Complex: g = g.as<Complex>() + (part == 0 ? Complex(val, 0) : Complex(0, val)); return;
    case Kind::Dual: g = g.as<Dual>() + Dual(val); return;
    default: g = to_double(g) + val; return;
  }
}

Value shifted(const Value& leaf, int part, double delta) {
  switch (leaf.kind()) {
    case Kind::Float: return leaf.as<double>() + delta;
    case Kind::Fixed: return Fixed::from_double(leaf.as<Fixed>().to_double() + delta);
    case Kind::ULog: {
      double x = leaf.as<ULog>().to_double() + delta;
      if (!(x > 0)) throw RevError(ErrorKind::DomainError, "perturbation leaves the ULog domain");
      return ULog::from_double(x);
    }
    case Kind::Dual: return Dual(leaf.as<Dual>().v + delta, leaf.as<Dual>().d);
    case Kind::Complex: return leaf.as<Complex>() + (part == 0 ? Complex(delta, 0) : Complex(0, delta));
    default: throw RevError(ErrorKind::TypeError, "cannot perturb a " + std::string(kind_name(leaf.kind())));
  }
}

void seed_outputs(std::vector<Value>& gvars, const std::vector<Seed>& seeds) {
  for (const Seed& s : seeds) {
    if (s.arg >= gvars.size()) {
      throw RevError(ErrorKind::InvalidArgument, "seed refers to argument " + std::to_string(s.arg + 1) +
                                                     " of " + std::to_string(gvars.size()));
    }
    std::size_t i = 0;
    bool placed = false;
    each_leaf(gvars[s.arg], [&](Value& leaf, int part) {
      if (i++ == s.component) {
        add_grad(*leaf.as<GVar>().g, part, s.value);
        placed = true;
      }
    });
    if (!placed) {
      throw RevError(ErrorKind::InvalidArgument, "argument " + std::to_string(s.arg + 1) + " has no component " +
                                                     std::to_string(s.component));
    }
  }
}

std::vector<Seed> seeds_of(const GradRequest& req) {
  if (!req.seeds.empty()) return req.seeds;
  return {Seed{}};
}

std::vector<std::size_t> wrt_of(const GradRequest& req) {
  if (!req.wrt.empty()) return req.wrt;
  std::vector<std::size_t> all(req.args.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

ExecOptions gradient_options(ExecOptions opts) {
  opts.gradient = true;
  return opts;
}

std::vector<Value> promote_all(std::vector<Value> vs) {
  for (auto& v : vs) v = promote_gvar(std::move(v));
  return vs;
}

std::vector<Dual> gradient_duals(const Value& gv) {
  std::vector<Dual> out;
  Value copy = gv;
  each_leaf(copy, [&](Value& leaf, int part) {
    if (leaf.kind() == Kind::GVar) {
      out.push_back(grad_part(*leaf.as<GVar>().g, part));
    } else {
      out.push_back(Dual(0.0));
    }
  });
  return out;
}

}  // namespace

std::size_t component_count(const Value& v) {
  std::size_t n = 0;
  Value copy = v;
  each_leaf(copy, [&](Value&, int) { ++n; });
  return n;
}

std::vector<double> flatten_components(const Value& v) {
  std::vector<double> out;
  Value copy = v;
  each_leaf(copy, [&](Value& leaf, int part) { out.push_back(real_part(leaf, part)); });
  return out;
}

std::vector<double> flatten_gradient(const Value& primal, const Value& gradient) {
  std::vector<double> out;
  // Walk primal and gradient trees in lockstep.
  auto walk = [&](auto&& self, const Value& pv, const Value& gv) -> void {
    switch (pv.kind()) {
      case Kind::Array:
        for (std::size_t i = 0; i < pv.as<Array>().size(); ++i) {
          self(self, pv.as<Array>().data[i], gv.as<Array>().data[i]);
        }
        return;
      case Kind::Record:
        for (std::size_t i = 0; i < pv.as<Record>().fields.size(); ++i) {
          self(self, pv.as<Record>().fields[i].second, gv.as<Record>().fields[i].second);
        }
        return;
      case Kind::GVar: self(self, *pv.as<GVar>().x, gv); return;
      case Kind::Complex:
        out.push_back(grad_part(gv, 0).v);
        out.push_back(grad_part(gv, 1).v);
        return;
      default:
        if (is_differentiable_scalar(pv.kind())) out.push_back(grad_part(gv, -1).v);
        return;
    }
  };
  walk(walk, primal, gradient);
  return out;
}

std::vector<Value> adjoint_pass(const Program& program, const std::string& fname, std::vector<Value> gvars,
                                bool inverse, const ExecOptions& opts) {
  Interpreter it(program, gradient_options(opts));
  return inverse ? it.uncall(fname, std::move(gvars)) : it.run(fname, std::move(gvars));
}

GradResult gradient(const Program& program, const GradRequest& req, const ExecOptions& opts) {
  GradResult r;
  r.outputs = Interpreter(program, opts).run(req.fname, req.args);
  std::vector<Value> gv = promote_all(r.outputs);
  seed_outputs(gv, seeds_of(req));
  std::vector<Value> back = adjoint_pass(program, req.fname, std::move(gv), true, opts);
  for (std::size_t i = 0; i < back.size(); ++i) {
    r.restored.push_back(primal_of(back[i]));
    r.gradients.push_back(gradient_of(back[i]));
    r.restoration_error = std::max(r.restoration_error, max_deviation(r.restored[i], req.args[i]));
  }
  for (std::size_t a : wrt_of(req)) {
    if (a >= back.size()) throw RevError(ErrorKind::InvalidArgument, "wrt index out of range");
    std::vector<double> f = flatten_gradient(r.restored[a], r.gradients[a]);
    r.flat.insert(r.flat.end(), f.begin(), f.end());
  }
  return r;
}

std::vector<double> finite_difference(const Program& program, const GradRequest& req, double h,
                                      const ExecOptions& opts) {
  if (!(h > 0)) throw RevError(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const std::vector<Seed> seeds = seeds_of(req);
  auto objective = [&](const std::vector<Value>& args) {
    std::vector<Value> out = Interpreter(program, opts).run(req.fname, args);
    double acc = 0.0;
    for (const Seed& s : seeds) {
      std::vector<double> c = flatten_components(out.at(s.arg));
      if (s.component >= c.size()) throw RevError(ErrorKind::InvalidArgument, "seed component out of range");
      acc += s.value * c[s.component];
    }
    return acc;
  };
  auto perturbed = [&](std::size_t arg, std::size_t comp, double delta, double& applied) {
    std::vector<Value> args = req.args;
    std::size_t i = 0;
    each_leaf(args[arg], [&](Value& leaf, int part) {
      if (i++ != comp) return;
      Value& target = leaf.kind() == Kind::GVar ? *leaf.as<GVar>().x : leaf;
      target = shifted(target, part, delta);
      applied = real_part(target, part);
    });
    return args;
  };
  std::vector<double> out;
  for (std::size_t a : wrt_of(req)) {
    if (a >= req.args.size()) throw RevError(ErrorKind::InvalidArgument, "wrt index out of range");
    std::size_t n = component_count(req.args[a]);
    for (std::size_t c = 0; c < n; ++c) {
      double hi = 0, lo = 0;
      std::vector<Value> plus = perturbed(a, c, h, hi);
      std::vector<Value> minus = perturbed(a, c, -h, lo);
      if (hi == lo) throw RevError(ErrorKind::InvalidArgument, "step is below the resolution of the argument");
      out.push_back((objective(plus) - objective(minus)) / (hi - lo));
    }
  }
  return out;
}

std::vector<std::vector<double>> jacobian(const Program& program, const std::string& fname,
                                          const std::vector<Value>& args, const ExecOptions& opts) {
  const std::vector<Value> outputs = Interpreter(program, opts).run(fname, args);
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < outputs.size(); ++a) {
    std::size_t n = component_count(outputs[a]);
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<Value> gv = promote_all(outputs);
      seed_outputs(gv, {Seed{a, c, 1.0}});
      std::vector<Value> back = adjoint_pass(program, fname, std::move(gv), true, opts);
      std::vector<double> row;
      for (const auto& b : back) {
        std::vector<double> f = flatten_gradient(primal_of(b), gradient_of(b));
        row.insert(row.end(), f.begin(), f.end());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

HessianResult hessian(const Program& program, const GradRequest& req, const ExecOptions& opts) {
  const std::vector<std::size_t> wrt = wrt_of(req);
  std::vector<std::pair<std::size_t, std::size_t>> cols;  // (arg, component)
  for (std::size_t a : wrt) {
    if (a >= req.args.size()) throw RevError(ErrorKind::InvalidArgument, "wrt index out of range");
    Value copy = req.args[a];
    std::size_t i = 0;
    each_leaf(copy, [&](Value& leaf, int) {
      const Value& x = leaf.kind() == Kind::GVar ? *leaf.as<GVar>().x : leaf;
      if (x.kind() != Kind::Float) {
        throw RevError(ErrorKind::TypeError, "Hessians are computed over Float components only, found " +
                                                 std::string(kind_name(x.kind())));
      }
      cols.emplace_back(a, i++);
    });
  }
  const std::size_t n = cols.size();
  HessianResult r;
  r.h.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    // Every Float leaf becomes a Dual; only column j carries a unit tangent.
    std::vector<Value> args = req.args;
    for (std::size_t a = 0; a < args.size(); ++a) {
      std::size_t i = 0;
      each_leaf(args[a], [&](Value& leaf, int) {
        if (leaf.kind() == Kind::Float) {
          bool hot = cols[j].first == a && cols[j].second == i;
          leaf = Dual(leaf.as<double>(), hot ? 1.0 : 0.0);
        }
        ++i;
      });
    }
    std::vector<Value> out = Interpreter(program, opts).run(req.fname, std::move(args));
    std::vector<Value> gv = promote_all(std::move(out));
    seed_outputs(gv, seeds_of(req));
    std::vector<Value> back = adjoint_pass(program, req.fname, std::move(gv), true, opts);
    std::size_t row = 0;
    for (std::size_t a : wrt) {
      for (const Dual& g : gradient_duals(back[a])) r.h[row++][j] = g.d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r.asymmetry = std::max(r.asymmetry, std::abs(r.h[i][j] - r.h[j][i]));
  }
  return r;
}

}  // namespace revlang
