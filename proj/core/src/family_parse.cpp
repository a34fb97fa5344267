#include <cctype>
#include <cmath>
#include <map>
#include <string>

#include "kdecay/error.hpp"
#include "kdecay/format.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Call {
  std::string kind;
  std::string body;
};

Call split_call(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos) {
    return {s, ""};
  }
  if (s.back() != ')') throw Error(ErrorCode::bad_family_spec, "missing ')' in '" + s + "'");
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

std::map<std::string, std::string> parse_params(const std::string& body) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  const std::string b = trim(body);
  if (b.empty()) return out;
  while (pos <= b.size()) {
    auto comma = b.find(',', pos);
    if (comma == std::string::npos) comma = b.size();
    const std::string item = trim(b.substr(pos, comma - pos));
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::bad_family_spec, "expected key=value, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    if (out.count(key)) throw Error(ErrorCode::bad_family_spec, "duplicate parameter '" + key + "'");
    out[key] = trim(item.substr(eq + 1));
    pos = comma + 1;
  }
  return out;
}

class Params {
 public:
  Params(std::string kind, std::map<std::string, std::string> values)
      : kind_(std::move(kind)), values_(std::move(values)) {}

  double real(const std::string& key, double fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    auto v = parse_real(it->second);
    if (!v) throw Error(ErrorCode::bad_family_spec, kind_ + ": parameter '" + key + "' is not a number");
    values_.erase(it);
    return *v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const double v = real(key, double(fallback));
    if (v < 0 || v != std::floor(v) || v > 1.8e19) {
      throw Error(ErrorCode::bad_family_spec, kind_ + ": parameter '" + key + "' must be a nonnegative integer");
    }
    return static_cast<std::uint64_t>(v);
  }

  complex cplx(const std::string& key, complex fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    auto v = parse_complex(it->second);
    if (!v) throw Error(ErrorCode::bad_family_spec, kind_ + ": parameter '" + key + "' is not a complex number");
    values_.erase(it);
    return *v;
  }

  void finish() const {
    if (!values_.empty()) {
      throw Error(ErrorCode::bad_family_spec, kind_ + ": unknown parameter '" + values_.begin()->first + "'");
    }
  }

 private:
  std::string kind_;
  std::map<std::string, std::string> values_;
};

}  // namespace

SequenceFamily parse_family(const std::string& spec) {
  const Call call = split_call(spec);
  if (call.kind == "sqrt" || call.kind == "square") {
    const SequenceFamily inner = parse_family(call.body);
    return call.kind == "sqrt" ? transform_sqrt(inner) : square_poles(inner);
  }
  Params params(call.kind, parse_params(call.body));
  auto build = [&]() -> SequenceFamily {
    if (call.kind == "alt") return SequenceFamily::alt();
    if (call.kind == "alt_reciprocal") return SequenceFamily::alt_reciprocal();
    if (call.kind == "reciprocal") return SequenceFamily::reciprocal(params.real("a", 1.0));
    if (call.kind == "squares") return SequenceFamily::squares();
    if (call.kind == "geometric") return SequenceFamily::geometric(params.real("base", 2.0));
    if (call.kind == "lacunary") return SequenceFamily::lacunary(params.real("base", 2.0));
    if (call.kind == "random") {
      const double rho = params.real("rho", 1.0);
      const double a = params.real("a", 2.0);
      const std::uint64_t seed = params.integer("seed", 0);
      const std::uint64_t terms = params.integer("terms", SequenceFamily::default_table_terms);
      return SequenceFamily::random(rho, a, seed, terms);
    }
    if (call.kind == "single") {
      const complex c = params.cplx("c", 1.0);
      const complex t = params.cplx("t", 1.0);
      if (t == complex(0.0)) throw Error(ErrorCode::bad_family_spec, "single: parameter 't' must be nonzero");
      return SequenceFamily::single(c, t);
    }
    throw Error(ErrorCode::unknown_family_kind, "'" + call.kind + "'");
  };
  SequenceFamily family = build();
  params.finish();
  return family;
}

}  // namespace kdecay
