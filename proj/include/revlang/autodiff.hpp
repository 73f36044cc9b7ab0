#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "revlang/interpreter.hpp"

namespace revlang {

/// Cotangent placed on one real component of an output argument. Components
/// are numbered in flattening order: array elements column-major, record
/// fields in order, Complex as (re, im); Int and Bool have none.
struct Seed {
  std::size_t arg = 0;
  std::size_t component = 0;
  double value = 1.0;
};

struct GradRequest {
  std::string fname;
  std::vector<Value> args;
  std::vector<Seed> seeds;       // empty: unit seed on component 0 of arg 0
  std::vector<std::size_t> wrt;  // empty: every argument
};

struct GradResult {
  std::vector<Value> outputs;     // forward results
  std::vector<Value> gradients;   // per argument, shaped like the argument
  std::vector<Value> restored;    // primal parts after the backward pass
  double restoration_error = 0.0; // max deviation of `restored` from the inputs
  std::vector<double> flat;       // gradients of the `wrt` arguments, flattened
};

/// Number of real differentiable components of a value.
std::size_t component_count(const Value& v);
/// Real differentiable components in flattening order.
std::vector<double> flatten_components(const Value& v);
/// Gradient components of a GVar tree, in the flattening order of its primal.
std::vector<double> flatten_gradient(const Value& primal, const Value& gradient);

/// Reverse pass through ~f with adjoint dispatch.
GradResult gradient(const Program& program, const GradRequest& req, const ExecOptions& opts = {});

/// Central differences of seedᵀ · outputs with step h, per component of the
/// `wrt` arguments. Quantized kinds divide by the perturbation actually
/// applied.
std::vector<double> finite_difference(const Program& program, const GradRequest& req, double h,
                                      const ExecOptions& opts = {});

/// Rows indexed by output components, columns by input components, both over
/// all arguments.
std::vector<std::vector<double>> jacobian(const Program& program, const std::string& fname,
                                          const std::vector<Value>& args, const ExecOptions& opts = {});

struct HessianResult {
  std::vector<std::vector<double>> h;
  double asymmetry = 0.0;  // max |H - Hᵀ|
};

/// Forward-over-reverse Hessian of the seeded scalar output over the Float
/// components of the `wrt` arguments.
HessianResult hessian(const Program& program, const GradRequest& req, const ExecOptions& opts = {});

/// Executes f (or ~f when `inverse`) in gradient mode on GVar arguments:
/// primal parts are updated and cotangents propagated by the adjoint rules.
std::vector<Value> adjoint_pass(const Program& program, const std::string& fname, std::vector<Value> gvars,
                                bool inverse, const ExecOptions& opts = {});

}  // namespace revlang
