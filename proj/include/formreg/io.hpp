#pragma once

// Text matrix files and JSON encodings of matrices and traces.
//
// Matrix file:
//   <real|complex> <exact|float> <rows> <cols>
//   entries, whitespace separated, row-major
// Exact entries are integers or fractions p/q; float entries are decimal
// literals written with 17 significant digits. Complex entries are written
// re+imi or re-imi, both components present. '#' starts a comment.

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "formreg/error.hpp"
#include "formreg/numkit.hpp"
#include "formreg/regengine.hpp"

namespace formreg::io {

using numkit::Arithmetic;
using numkit::Field;
using numkit::GaussianRational;
using numkit::Matrix;
using numkit::Rational;
using numkit::Scalar;
using numkit::ScalarSpec;
using numkit::ScalarTraits;
using Complex = std::complex<double>;

// ---- scalar literals -------------------------------------------------------

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_real(const Rational& x) { return x.str(); }

template <Scalar T>
std::string format_scalar(const T& x) {
  if constexpr (std::is_same_v<T, double> || std::is_same_v<T, Rational>) {
    return format_real(x);
  } else if constexpr (std::is_same_v<T, Complex>) {
    const bool neg = std::signbit(x.imag());
    return format_real(x.real()) + (neg ? "-" : "+") + format_real(neg ? -x.imag() : x.imag()) + "i";
  } else {
    const bool neg = x.imag() < 0;
    return format_real(x.real()) + (neg ? "-" : "+") + format_real(neg ? Rational(-x.imag()) : x.imag()) + "i";
  }
}

inline Rational parse_rational(std::string_view s) {
  std::string t(s);
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  const auto slash = t.find('/');
  auto integer_ok = [](std::string_view d, bool allow_sign) {
    std::size_t i = 0;
    if (allow_sign && !d.empty() && d[0] == '-') i = 1;
    if (i >= d.size()) return false;
    for (; i < d.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
    return true;
  };
  using boost::multiprecision::mpz_int;
  if (slash == std::string::npos) {
    if (!integer_ok(t, true)) throw ParseError("bad exact literal '" + std::string(s) + "'");
    return Rational(mpz_int(t));
  }
  const std::string num = t.substr(0, slash);
  const std::string den = t.substr(slash + 1);
  if (!integer_ok(num, true) || !integer_ok(den, false)) throw ParseError("bad exact literal '" + std::string(s) + "'");
  const mpz_int d(den);
  if (d == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
  return Rational(mpz_int(num), d);
}

inline double parse_double(std::string_view s) {
  std::string t(s);
  if (t.empty()) throw ParseError("empty float literal");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) throw ParseError("bad float literal '" + t + "'");
  return v;
}

/// Splits "re+imi" / "re-imi" into its two components (imaginary part keeps its sign).
inline std::pair<std::string, std::string> split_complex(std::string_view s) {
  if (s.size() < 2 || s.back() != 'i') throw ParseError("complex literal must end in 'i': '" + std::string(s) + "'");
  const std::string_view body = s.substr(0, s.size() - 1);
  for (std::size_t k = body.size(); k-- > 1;) {
    const char c = body[k];
    if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      return {std::string(body.substr(0, k)), std::string(body.substr(k))};
    }
  }
  throw ParseError("complex literal needs both components: '" + std::string(s) + "'");
}

template <Scalar T>
T parse_scalar(std::string_view s) {
  if constexpr (std::is_same_v<T, Rational>) {
    return parse_rational(s);
  } else if constexpr (std::is_same_v<T, double>) {
    return parse_double(s);
  } else if constexpr (std::is_same_v<T, Complex>) {
    auto [re, im] = split_complex(s);
    return {parse_double(re), parse_double(im)};
  } else {
    auto [re, im] = split_complex(s);
    return {parse_rational(re), parse_rational(im)};
  }
}

// ---- runtime-typed matrices ------------------------------------------------

using AnyMatrix = std::variant<Matrix<Rational>, Matrix<GaussianRational>, Matrix<double>, Matrix<Complex>>;

inline ScalarSpec spec_of(const AnyMatrix& m) {
  return std::visit([](const auto& x) { return ScalarTraits<typename std::decay_t<decltype(x)>::value_type>::spec; }, m);
}

inline std::string_view to_string(Field f) { return f == Field::Real ? "real" : "complex"; }
inline std::string_view to_string(Arithmetic a) { return a == Arithmetic::Exact ? "exact" : "float"; }

inline Field parse_field(std::string_view s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw ParseError("unknown field '" + std::string(s) + "'");
}

inline Arithmetic parse_arithmetic(std::string_view s) {
  if (s == "exact") return Arithmetic::Exact;
  if (s == "float") return Arithmetic::Float;
  throw ParseError("unknown arithmetic '" + std::string(s) + "'");
}

/// Re-expresses a matrix in another arithmetic over the same field. Doubles
/// become the exact dyadic rationals they denote; rationals round to nearest.
inline AnyMatrix to_arithmetic(const AnyMatrix& m, Arithmetic target) {
  if (spec_of(m).arithmetic == target) return m;
  return std::visit(
      [](const auto& x) -> AnyMatrix {
        using T = typename std::decay_t<decltype(x)>::value_type;
        if constexpr (std::is_same_v<T, Rational>) {
          return numkit::convert<double>(x, [](const Rational& v) { return v.template convert_to<double>(); });
        } else if constexpr (std::is_same_v<T, GaussianRational>) {
          return numkit::convert<Complex>(x, [](const GaussianRational& v) {
            return Complex(v.real().template convert_to<double>(), v.imag().template convert_to<double>());
          });
        } else if constexpr (std::is_same_v<T, double>) {
          return numkit::convert<Rational>(x, [](double v) { return Rational(v); });
        } else {
          return numkit::convert<GaussianRational>(
              x, [](const Complex& v) { return GaussianRational(Rational(v.real()), Rational(v.imag())); });
        }
      },
      m);
}

// ---- matrix files ----------------------------------------------------------

template <Scalar T>
void write_matrix(std::ostream& os, const Matrix<T>& m) {
  const auto spec = ScalarTraits<T>::spec;
  os << to_string(spec.field) << ' ' << to_string(spec.arithmetic) << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_scalar(m(i, j));
    os << '\n';
  }
}

inline void write_matrix(std::ostream& os, const AnyMatrix& m) {
  std::visit([&](const auto& x) { write_matrix(os, x); }, m);
}

template <class M>
std::string matrix_to_string(const M& m) {
  std::ostringstream os;
  write_matrix(os, m);
  return os.str();
}

inline std::vector<std::string> tokenize(std::istream& is) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

inline std::size_t parse_dim(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("bad dimension '" + s + "'");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

template <Scalar T>
Matrix<T> parse_entries(std::size_t rows, std::size_t cols, const std::vector<std::string>& tokens, std::size_t first) {
  std::vector<T> entries;
  entries.reserve(rows * cols);
  for (std::size_t k = first; k < tokens.size(); ++k) entries.push_back(parse_scalar<T>(tokens[k]));
  return Matrix<T>(rows, cols, std::move(entries));
}

inline AnyMatrix read_matrix(std::istream& is) {
  const auto tokens = tokenize(is);
  if (tokens.size() < 4) throw ParseError("matrix header needs: field arithmetic rows cols");
  const Field field = parse_field(tokens[0]);
  const Arithmetic arith = parse_arithmetic(tokens[1]);
  const std::size_t rows = parse_dim(tokens[2]);
  const std::size_t cols = parse_dim(tokens[3]);
  if (tokens.size() - 4 != rows * cols) {
    throw ParseError("expected " + std::to_string(rows * cols) + " entries, found " + std::to_string(tokens.size() - 4));
  }
  if (field == Field::Real) {
    if (arith == Arithmetic::Exact) return parse_entries<Rational>(rows, cols, tokens, 4);
    return parse_entries<double>(rows, cols, tokens, 4);
  }
  if (arith == Arithmetic::Exact) return parse_entries<GaussianRational>(rows, cols, tokens, 4);
  return parse_entries<Complex>(rows, cols, tokens, 4);
}

inline AnyMatrix read_matrix_string(const std::string& s) {
  std::istringstream is(s);
  return read_matrix(is);
}

inline AnyMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_matrix(in);
}

// ---- JSON ------------------------------------------------------------------

using nlohmann::json;

template <Scalar T>
json matrix_to_json(const Matrix<T>& m) {
  json entries = json::array();
  for (const auto& x : m.entries()) entries.push_back(format_scalar(x));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

template <Scalar T>
Matrix<T> matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  std::vector<T> entries;
  for (const auto& e : j.at("entries")) entries.push_back(parse_scalar<T>(e.get<std::string>()));
  return Matrix<T>(rows, cols, std::move(entries));
}

/// Finite margins as numbers, infinite ones as null.
inline json margin_json(double m) { return std::isfinite(m) ? json(m) : json(nullptr); }

inline numkit::FormKind parse_form(std::string_view s) {
  if (s == "bilinear") return numkit::FormKind::Bilinear;
  if (s == "sesquilinear") return numkit::FormKind::Sesquilinear;
  throw ParseError("unknown form '" + std::string(s) + "'");
}

template <Scalar T>
json trace_steps_to_json(const regengine::ReductionTrace<T>& trace) {
  json steps = json::array();
  for (const auto& st : trace.steps) {
    steps.push_back(json{{"m1", st.m1},
                         {"m2", st.m2},
                         {"S", matrix_to_json(st.s)},
                         {"S1", matrix_to_json(st.s1)},
                         {"D", matrix_to_json(st.d)},
                         {"E", matrix_to_json(st.e)},
                         {"F", matrix_to_json(st.f)},
                         {"C1", matrix_to_json(st.c1)},
                         {"A2", matrix_to_json(st.a2)},
                         {"margin_m1", margin_json(st.rank_a.margin())},
                         {"margin_m2", margin_json(st.rank_c.margin())},
                         {"threshold", st.rank_a.threshold}});
  }
  return steps;
}

/// Rebuilds the replayable part of a trace from a report.
template <Scalar T>
regengine::ReductionTrace<T> trace_from_json(const json& report) {
  regengine::ReductionTrace<T> trace;
  trace.input_size = report.at("input_size").get<std::size_t>();
  trace.form = parse_form(report.at("form").get<std::string>());
  trace.tol_scale = report.at("tol_scale").get<double>();
  for (const auto& js : report.at("steps")) {
    regengine::StepRecord<T> st;
    st.m1 = js.at("m1").get<std::size_t>();
    st.m2 = js.at("m2").get<std::size_t>();
    st.s = matrix_from_json<T>(js.at("S"));
    st.s1 = matrix_from_json<T>(js.at("S1"));
    st.d = matrix_from_json<T>(js.at("D"));
    st.e = matrix_from_json<T>(js.at("E"));
    st.f = matrix_from_json<T>(js.at("F"));
    st.c1 = matrix_from_json<T>(js.at("C1"));
    st.a2 = matrix_from_json<T>(js.at("A2"));
    trace.steps.push_back(std::move(st));
  }
  trace.regular = matrix_from_json<T>(report.at("regular"));
  return trace;
}

}  // namespace formreg::io
