#include "revlang/value.hpp"

#include <charconv>
#include <stdexcept>

#include "revlang/errors.hpp"

namespace revlang {

Array Array::vector(std::vector<Value> elements) {
  Array a;
  a.shape = {elements.size()};
  a.data = std::move(elements);
  return a;
}

Array Array::matrix(std::size_t rows, std::size_t cols, std::vector<Value> column_major) {
  if (column_major.size() != rows * cols) {
    throw std::invalid_argument("matrix data does not match its shape");
  }
  Array a;
  a.shape = {rows, cols};
  a.data = std::move(column_major);
  return a;
}

const Value* Record::find(const std::string& name) const {
  for (const auto& [key, value] : fields) {
    if (key == name) return &value;
  }
  return nullptr;
}

Value* Record::find(const std::string& name) {
  for (auto& [key, value] : fields) {
    if (key == name) return &value;
  }
  return nullptr;
}

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Int: return "Int";
    case Kind::Fixed: return "Fixed";
    case Kind::Float: return "Float";
    case Kind::Complex: return "Complex";
    case Kind::ULog: return "ULog";
    case Kind::Bool: return "Bool";
    case Kind::Array: return "Array";
    case Kind::Record: return "Record";
    case Kind::GVar: return "GVar";
    case Kind::Dual: return "Dual";
  }
  return "?";
}

bool is_differentiable_scalar(Kind kind) {
  return kind == Kind::Fixed || kind == Kind::Float || kind == Kind::Complex || kind == Kind::ULog ||
         kind == Kind::Dual;
}

bool is_scalar(Kind kind) {
  return kind != Kind::Array && kind != Kind::Record && kind != Kind::GVar;
}

bool is_real_scalar(Kind kind) {
  return kind == Kind::Int || kind == Kind::Fixed || kind == Kind::Float || kind == Kind::ULog ||
         kind == Kind::Bool || kind == Kind::Dual;
}

Value primal_of(const Value& v) {
  switch (v.kind()) {
    case Kind::GVar: return primal_of(*v.as<GVar>().x);
    case Kind::Array: {
      Array out = v.as<Array>();
      for (auto& e : out.data) e = primal_of(e);
      return out;
    }
    case Kind::Record: {
      Record out = v.as<Record>();
      for (auto& f : out.fields) f.second = primal_of(f.second);
      return out;
    }
    default: return v;
  }
}

Value gradient_of(const Value& v) {
  switch (v.kind()) {
    case Kind::GVar: return *v.as<GVar>().g;
    case Kind::Array: {
      Array out = v.as<Array>();
      for (auto& e : out.data) e = gradient_of(e);
      return out;
    }
    case Kind::Record: {
      Record out = v.as<Record>();
      for (auto& f : out.fields) f.second = gradient_of(f.second);
      return out;
    }
    default: return zero_cotangent(v);
  }
}

Value zero_cotangent(const Value& primal) {
  switch (primal.kind()) {
    case Kind::Complex: return Complex{};
    case Kind::Dual: return Dual{};
    case Kind::GVar: return zero_cotangent(*primal.as<GVar>().x);
    default: return 0.0;
  }
}

double to_double(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return static_cast<double>(v.as<std::int64_t>());
    case Kind::Fixed: return v.as<Fixed>().to_double();
    case Kind::Float: return v.as<double>();
    case Kind::ULog: return v.as<ULog>().to_double();
    case Kind::Bool: return v.as<bool>() ? 1.0 : 0.0;
    case Kind::Dual: return v.as<Dual>().v;
    case Kind::GVar: return to_double(*v.as<GVar>().x);
    default:
      throw RevError(ErrorKind::TypeError, "expected a real scalar, got " + std::string(kind_name(v.kind())));
  }
}

namespace {

std::string format_double(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return std::to_string(v.as<std::int64_t>());
    case Kind::Fixed: return format_double(v.as<Fixed>().to_double()) + "fx";
    case Kind::Float: return format_double(v.as<double>());
    case Kind::Complex: {
      const Complex& c = v.as<Complex>();
      std::string im = format_double(c.imag());
      return format_double(c.real()) + (im.front() == '-' ? "" : "+") + im + "im";
    }
    case Kind::ULog: return "ulog(" + format_double(v.as<ULog>().to_double()) + ")";
    case Kind::Bool: return v.as<bool>() ? "true" : "false";
    case Kind::Array: {
      const Array& a = v.as<Array>();
      std::string out = "[";
      if (a.rank() == 2) {
        for (std::size_t i = 0; i < a.shape[0]; ++i) {
          if (i) out += ", ";
          out += '[';
          for (std::size_t j = 0; j < a.shape[1]; ++j) {
            if (j) out += ", ";
            out += to_string(a.data[i + j * a.shape[0]]);
          }
          out += ']';
        }
      } else {
        for (std::size_t i = 0; i < a.data.size(); ++i) {
          if (i) out += ", ";
          out += to_string(a.data[i]);
        }
      }
      return out + "]";
    }
    case Kind::Record: {
      std::string out = "(";
      bool first = true;
      for (const auto& [k, f] : v.as<Record>().fields) {
        if (!first) out += ", ";
        first = false;
        out += k + "=" + to_string(f);
      }
      return out + ")";
    }
    case Kind::GVar: {
      const GVar& g = v.as<GVar>();
      return "GVar(" + to_string(*g.x) + ", " + to_string(*g.g) + ")";
    }
    case Kind::Dual: {
      const Dual& d = v.as<Dual>();
      return "Dual(" + format_double(d.v) + ", " + format_double(d.d) + ")";
    }
  }
  return "?";
}

bool same_structure(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::Array: {
      const Array& x = a.as<Array>();
      const Array& y = b.as<Array>();
      if (x.shape != y.shape) return false;
      for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (!same_structure(x.data[i], y.data[i])) return false;
      }
      return true;
    }
    case Kind::Record: {
      const Record& x = a.as<Record>();
      const Record& y = b.as<Record>();
      if (x.fields.size() != y.fields.size()) return false;
      for (std::size_t i = 0; i < x.fields.size(); ++i) {
        if (x.fields[i].first != y.fields[i].first) return false;
        if (!same_structure(x.fields[i].second, y.fields[i].second)) return false;
      }
      return true;
    }
    case Kind::GVar:
      return same_structure(*a.as<GVar>().x, *b.as<GVar>().x);
    default: return true;
  }
}

}  // namespace revlang
