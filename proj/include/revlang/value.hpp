#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "revlang/numbers.hpp"

namespace revlang {

/// Copyable owning pointer; gives recursive value types value semantics.
template <class T>
class Box {
 public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) *ptr_ = *other.ptr_;
    return *this;
  }
  Box& operator=(Box&& other) noexcept {
    std::swap(ptr_, other.ptr_);
    return *this;
  }

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

class Value;

/// Rectangular, column-major array of one or two dimensions.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<Value> data;

  static Array vector(std::vector<Value> elements);
  static Array matrix(std::size_t rows, std::size_t cols, std::vector<Value> column_major);

  std::size_t rank() const { return shape.size(); }
  std::size_t size() const { return data.size(); }
  bool operator==(const Array&) const;
};

struct Record {
  std::vector<std::pair<std::string, Value>> fields;

  const Value* find(const std::string& name) const;
  Value* find(const std::string& name);
  bool operator==(const Record&) const;
};

/// Primal value paired with its accumulated cotangent.
struct GVar {
  Box<Value> x;
  Box<Value> g;
  bool operator==(const GVar&) const;
};

enum class Kind { Int, Fixed, Float, Complex, ULog, Bool, Array, Record, GVar, Dual };

std::string_view kind_name(Kind kind);

class Value {
 public:
  using Storage =
      std::variant<std::int64_t, Fixed, double, Complex, ULog, bool, Array, Record, GVar, Dual>;

  Value() : storage_(std::int64_t{0}) {}
  template <std::integral I>
    requires(!std::same_as<I, bool>)
  Value(I v) : storage_(static_cast<std::int64_t>(v)) {}
  Value(bool v) : storage_(v) {}
  Value(double v) : storage_(v) {}
  Value(Fixed v) : storage_(v) {}
  Value(ULog v) : storage_(v) {}
  Value(Complex v) : storage_(v) {}
  Value(Dual v) : storage_(v) {}
  Value(Array v) : storage_(std::move(v)) {}
  Value(Record v) : storage_(std::move(v)) {}
  Value(GVar v) : storage_(std::move(v)) {}
  Value(const char*) = delete;

  static Value gvar(Value x, Value g) { return Value(GVar{Box<Value>(std::move(x)), Box<Value>(std::move(g))}); }

  Kind kind() const { return static_cast<Kind>(storage_.index()); }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(storage_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(storage_);
  }
  template <class T>
  T& as() {
    return std::get<T>(storage_);
  }

  const Storage& storage() const { return storage_; }
  Storage& storage() { return storage_; }

  bool operator==(const Value& other) const { return storage_ == other.storage_; }

 private:
  Storage storage_;
};

inline bool Array::operator==(const Array& o) const { return shape == o.shape && data == o.data; }
inline bool Record::operator==(const Record& o) const { return fields == o.fields; }
inline bool GVar::operator==(const GVar& o) const { return x == o.x && g == o.g; }

/// Kinds whose values carry gradients (real-valued components).
bool is_differentiable_scalar(Kind kind);
bool is_scalar(Kind kind);
bool is_real_scalar(Kind kind);

/// Primal part: GVar(x, g) -> x, recursively through containers.
Value primal_of(const Value& v);
/// Cotangent part of a GVar tree; non-GVar leaves yield nullopt-like zero.
Value gradient_of(const Value& v);

/// Zero cotangent matching the tangent space of a primal scalar:
/// Float/Fixed/ULog -> Float 0, Complex -> Complex 0, Dual -> Dual 0.
Value zero_cotangent(const Value& primal);

/// Real value of a real scalar (Int, Fixed, Float, ULog, Bool, Dual primal).
double to_double(const Value& v);

/// Human-readable rendering in `.rnl` literal syntax where one exists.
std::string to_string(const Value& v);

/// Whether two trees have the same shape and scalar kinds.
bool same_structure(const Value& a, const Value& b);

}  // namespace revlang
