// formreg: regularizing decompositions of bilinear and sesquilinear forms.
//
//   formreg regularize A.txt [--form F] [--backend B] [--tol-scale s] [--json|--text] [--out R]
//   formreg compare A.txt B.txt [--form F] [--backend B] [--witness S.txt]
//   formreg synthesize --blocks 3,1 --regular-size 2 --scramble general --seed 7 --out A.txt
//   formreg verify A.txt R.json

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "formreg/classify.hpp"
#include "formreg/io.hpp"
#include "formreg/regengine.hpp"
#include "formreg/synth.hpp"

namespace {

using namespace formreg;
using io::AnyMatrix;
using io::json;
using numkit::Arithmetic;
using numkit::Field;
using numkit::FormKind;
using numkit::Matrix;

enum Exit { kOk = 0, kError = 1, kWarning = 2, kNotEquivalent = 3, kReduced = 4 };

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return "sha256:" + os.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s.empty() ? "none" : s;
}

// Sesquilinear for complex input unless told otherwise.
FormKind resolve_form(const std::string& flag, Field field) {
  if (!flag.empty()) return io::parse_form(flag);
  return field == Field::Complex ? FormKind::Sesquilinear : FormKind::Bilinear;
}

AnyMatrix with_backend(const AnyMatrix& m, const std::string& flag) {
  return flag.empty() ? m : io::to_arithmetic(m, io::parse_arithmetic(flag));
}

json backend_json(numkit::ScalarSpec spec) {
  return {{"field", io::to_string(spec.field)}, {"arithmetic", io::to_string(spec.arithmetic)}};
}

// ---- regularize ------------------------------------------------------------

struct RegularizeArgs {
  std::string input;
  std::string form;
  std::string backend;
  double tol_scale = 1.0;
  bool text = false;
  std::string out;
};

template <numkit::Scalar T>
json build_report(const Matrix<T>& a, FormKind form, double tol_scale, const std::string& digest) {
  const auto run = regengine::regularize(a, form, {tol_scale});
  const auto& trace = run.trace;
  const auto& d = run.decomposition;
  json warnings = json::array();
  if (trace.ill_conditioned()) warnings.push_back("ill-conditioned regular part");
  if (trace.low_margin()) warnings.push_back("rank decision within 10x of threshold");
  if (!trace.consistent()) warnings.push_back("m-sequence not weakly decreasing");
  return json{{"schema", 1},
              {"input_digest", digest},
              {"input_size", a.rows()},
              {"form", numkit::to_string(form)},
              {"backend", backend_json(numkit::ScalarTraits<T>::spec)},
              {"tol_scale", tol_scale},
              {"m_sequence", d.m_sequence},
              {"blocks", d.blocks},
              {"regular", io::matrix_to_json(d.regular)},
              {"regular_size", d.regular.rows()},
              {"steps", io::trace_steps_to_json(trace)},
              {"min_margin", io::margin_json(trace.min_margin())},
              {"warnings", warnings}};
}

std::string render_text(const json& r) {
  std::ostringstream os;
  os << "input: " << r["input_digest"].get<std::string>() << " (" << r["input_size"] << "x" << r["input_size"] << ")\n";
  os << "form: " << r["form"].get<std::string>() << '\n';
  os << "backend: " << r["backend"]["field"].get<std::string>() << ' ' << r["backend"]["arithmetic"].get<std::string>()
     << '\n';
  os << "m_sequence: " << join(r["m_sequence"].get<std::vector<std::size_t>>()) << '\n';
  os << "blocks: " << join(r["blocks"].get<std::vector<std::size_t>>()) << '\n';
  os << "regular_size: " << r["regular_size"] << '\n';
  const auto& reg = r["regular"];
  const auto cols = reg["cols"].get<std::size_t>();
  for (std::size_t k = 0; k < reg["entries"].size(); ++k) {
    os << (k % cols == 0 ? "  " : " ") << reg["entries"][k].get<std::string>() << ((k + 1) % cols == 0 ? "\n" : "");
  }
  if (!r["min_margin"].is_null()) os << "min_margin: " << r["min_margin"].get<double>() << '\n';
  for (const auto& w : r["warnings"]) os << "warning: " << w.get<std::string>() << '\n';
  return os.str();
}

int cmd_regularize(const RegularizeArgs& args) {
  const std::string bytes = read_bytes(args.input);
  const AnyMatrix raw = io::read_matrix_string(bytes);
  const FormKind form = resolve_form(args.form, io::spec_of(raw).field);
  const AnyMatrix a = with_backend(raw, args.backend);
  const json report =
      std::visit([&](const auto& m) { return build_report(m, form, args.tol_scale, sha256_hex(bytes)); }, a);
  write_output(args.out, args.text ? render_text(report) : report.dump(2) + "\n");
  return report["warnings"].empty() ? kOk : kWarning;
}

// ---- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string a;
  std::string b;
  std::string form;
  std::string backend;
  std::string witness;
  double tol_scale = 1.0;
};

int cmd_compare(const CompareArgs& args) {
  const AnyMatrix raw_a = io::read_matrix_file(args.a);
  const AnyMatrix raw_b = io::read_matrix_file(args.b);
  const auto spec_a = io::spec_of(raw_a);
  const auto spec_b = io::spec_of(raw_b);
  if (!(spec_a == spec_b)) {
    throw ParseError("inputs have different scalar types (" + std::string(io::to_string(spec_a.field)) + " " +
                     std::string(io::to_string(spec_a.arithmetic)) + " vs " + std::string(io::to_string(spec_b.field)) +
                     " " + std::string(io::to_string(spec_b.arithmetic)) + ")");
  }
  const FormKind form = resolve_form(args.form, spec_a.field);
  const AnyMatrix a = with_backend(raw_a, args.backend);
  const AnyMatrix b = with_backend(raw_b, args.backend);
  std::optional<AnyMatrix> witness;
  if (!args.witness.empty()) {
    const AnyMatrix w = io::read_matrix_file(args.witness);
    if (io::spec_of(w).field != spec_a.field) throw ParseError("witness field differs from the inputs");
    witness = io::to_arithmetic(w, io::spec_of(a).arithmetic);
  }

  return std::visit(
      [&](const auto& ma) {
        using M = std::decay_t<decltype(ma)>;
        std::optional<M> s;
        if (witness) s = std::get<M>(*witness);
        const auto v = classify::compare(ma, std::get<M>(b), form, {args.tol_scale, 1e-9}, s);
        std::cout << "verdict: " << classify::to_string(v.tag) << '\n';
        if (v.tag == classify::VerdictTag::NotEquivalent) {
          std::cout << "reason: " << classify::to_string(v.violation) << '\n';
        }
        if (v.violation != classify::Violation::Size) {
          std::cout << "blocks_a: " << join(v.blocks_a) << '\n';
          std::cout << "blocks_b: " << join(v.blocks_b) << '\n';
          std::cout << "regular_size_a: " << v.regular_a.rows() << '\n';
          std::cout << "regular_size_b: " << v.regular_b.rows() << '\n';
        }
        if (witness && v.tag == classify::VerdictTag::ReducedToRegularParts) {
          std::cout << "witness: rejected\n";
        } else if (v.upgraded_by_witness) {
          std::cout << "witness: accepted\n";
        }
        switch (v.tag) {
          case classify::VerdictTag::Equivalent:
            return int(kOk);
          case classify::VerdictTag::NotEquivalent:
            return int(kNotEquivalent);
          case classify::VerdictTag::ReducedToRegularParts:
            return int(kReduced);
        }
        return int(kError);
      },
      a);
}

// ---- synthesize ------------------------------------------------------------

struct SynthesizeArgs {
  std::size_t regular_size = 0;
  std::string blocks;
  std::string scramble = "none";
  std::uint64_t seed = 0;
  std::string out;
  std::string field = "real";
  std::string arithmetic = "exact";
  std::string form;
  long entry_bound = 3;
};

std::vector<std::size_t> parse_blocks(const std::string& s) {
  std::vector<std::size_t> blocks;
  if (s.empty()) return blocks;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    const std::size_t b = io::parse_dim(tok);
    if (b == 0) throw DomainError("block sizes must be positive");
    blocks.push_back(b);
  }
  return blocks;
}

synth::Scramble parse_scramble(const std::string& s) {
  if (s == "none") return synth::Scramble::None;
  if (s == "unitary") return synth::Scramble::Unitary;
  if (s == "general") return synth::Scramble::GeneralNonsingular;
  throw ParseError("unknown scramble '" + s + "' (none|unitary|general)");
}

std::uint64_t parse_seed(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("bad seed '" + s + "'");
  }
  return std::stoull(s);
}

template <numkit::Scalar T>
int synthesize_as(const SynthesizeArgs& args, const synth::SynthesisSpec& spec, FormKind form) {
  if (spec.scramble == synth::Scramble::Unitary && numkit::ScalarTraits<T>::exact) {
    throw DomainError("unitary scramble needs float arithmetic");
  }
  const auto s = synth::synthesize<T>(spec, std::nullopt, form);
  write_output(args.out, io::matrix_to_string(s.a));
  const json truth{{"schema", 1},
                   {"generator", synth::kGeneratorId},
                   {"seed", spec.seed},
                   {"form", numkit::to_string(form)},
                   {"backend", backend_json(numkit::ScalarTraits<T>::spec)},
                   {"scramble", synth::to_string(spec.scramble)},
                   {"entry_bound", spec.entry_bound},
                   {"size", s.a.rows()},
                   {"blocks", s.ground_truth.blocks},
                   {"m_sequence", s.ground_truth.m_sequence},
                   {"regular_size", s.ground_truth.regular.rows()},
                   {"regular", io::matrix_to_json(s.ground_truth.regular)},
                   {"transform", io::matrix_to_json(s.transform)}};
  write_output(args.out + ".truth.json", truth.dump(2) + "\n");
  return kOk;
}

int cmd_synthesize(SynthesizeArgs args) {
  if (const char* env = std::getenv("FORMREG_SEED"); env && *env) args.seed = parse_seed(env);
  synth::SynthesisSpec spec;
  spec.regular_size = args.regular_size;
  spec.blocks = parse_blocks(args.blocks);
  spec.scramble = parse_scramble(args.scramble);
  spec.seed = args.seed;
  spec.entry_bound = args.entry_bound;
  if (spec.entry_bound < 1) throw DomainError("entry bound must be at least 1");
  const Field field = io::parse_field(args.field);
  const Arithmetic arith = io::parse_arithmetic(args.arithmetic);
  const FormKind form = resolve_form(args.form, field);
  if (field == Field::Real) {
    return arith == Arithmetic::Exact ? synthesize_as<numkit::Rational>(args, spec, form)
                                      : synthesize_as<double>(args, spec, form);
  }
  return arith == Arithmetic::Exact ? synthesize_as<numkit::GaussianRational>(args, spec, form)
                                    : synthesize_as<std::complex<double>>(args, spec, form);
}

// ---- verify ----------------------------------------------------------------

int cmd_verify(const std::string& input, const std::string& report_path) {
  const std::string bytes = read_bytes(input);
  const json report = json::parse(read_bytes(report_path));
  if (report.at("schema").get<int>() != 1) throw ParseError("unsupported report schema");
  if (report.at("input_digest").get<std::string>() != sha256_hex(bytes)) {
    throw PreconditionError("wrong input for this report (digest mismatch)");
  }
  const AnyMatrix raw = io::read_matrix_string(bytes);
  const Field field = io::parse_field(report.at("backend").at("field").get<std::string>());
  if (field != io::spec_of(raw).field) throw ParseError("report field differs from the input");
  const AnyMatrix a = io::to_arithmetic(raw, io::parse_arithmetic(report.at("backend").at("arithmetic").get<std::string>()));

  const auto result = std::visit(
      [&](const auto& m) {
        using T = typename std::decay_t<decltype(m)>::value_type;
        const auto trace = io::trace_from_json<T>(report);
        auto rep = regengine::verify_trace(m, trace, trace.form);
        const auto reported = report.at("m_sequence").get<std::vector<std::size_t>>();
        const auto blocks = report.at("blocks").get<std::vector<std::size_t>>();
        auto add = [&](std::string name, bool ok) { rep.checks.push_back({std::move(name), ok, 0.0, 0.0}); };
        add("reported m-sequence matches trace", reported == trace.m_sequence());
        add("reported m-sequence monotonicity", regengine::weakly_decreasing(reported));
        add("reported blocks match m-sequence", blocks == regengine::blocks_from_m_sequence(reported, true));
        add("reported regular size", report.at("regular_size").get<std::size_t>() == trace.regular.rows());
        return rep;
      },
      a);

  const auto failed = result.failures();
  if (failed.empty()) {
    std::cout << "PASS: " << result.checks.size() << " checks\n";
    return kOk;
  }
  std::cout << "FAIL: " << failed.size() << " of " << result.checks.size() << " checks failed\n";
  for (const auto& c : result.checks) {
    if (c.passed) continue;
    std::cout << "  " << c.name;
    if (c.limit > 0.0) std::cout << " (residual " << c.residual << ", limit " << c.limit << ")";
    std::cout << '\n';
  }
  return kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularizing decompositions of bilinear and sesquilinear forms"};
  app.require_subcommand(1);

  RegularizeArgs reg;
  auto* r = app.add_subcommand("regularize", "Decompose a square matrix into regular part and singular blocks");
  r->add_option("input", reg.input, "Matrix file")->required();
  r->add_option("--form", reg.form, "bilinear|sesquilinear (default: sesquilinear for complex input)");
  r->add_option("--backend", reg.backend, "exact|float (default: the file's arithmetic)");
  r->add_option("--tol-scale", reg.tol_scale, "Multiplier on the floating rank threshold")->check(CLI::PositiveNumber);
  auto* json_flag = r->add_flag("--json", "JSON report (default)");
  r->add_flag("--text", reg.text, "Human-readable report")->excludes(json_flag);
  r->add_option("--out", reg.out, "Write the report here instead of stdout");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Compare two forms up to congruence of their regular parts");
  c->add_option("a", cmp.a, "First matrix file")->required();
  c->add_option("b", cmp.b, "Second matrix file")->required();
  c->add_option("--form", cmp.form, "bilinear|sesquilinear");
  c->add_option("--backend", cmp.backend, "exact|float");
  c->add_option("--tol-scale", cmp.tol_scale, "Multiplier on the floating rank threshold")->check(CLI::PositiveNumber);
  c->add_option("--witness", cmp.witness, "Matrix S with S R_a S* = R_b for the regular parts");

  SynthesizeArgs syn;
  std::string seed_text = "0";
  auto* s = app.add_subcommand("synthesize", "Write a scrambled matrix with known decomposition");
  s->add_option("--regular-size", syn.regular_size, "Size of the random nonsingular part");
  s->add_option("--blocks", syn.blocks, "Comma-separated Jordan block sizes");
  s->add_option("--scramble", syn.scramble, "none|unitary|general");
  s->add_option("--seed", seed_text, "Seed (FORMREG_SEED overrides)");
  s->add_option("--out", syn.out, "Output matrix file; ground truth goes to <out>.truth.json")->required();
  s->add_option("--field", syn.field, "real|complex");
  s->add_option("--arithmetic", syn.arithmetic, "exact|float");
  s->add_option("--form", syn.form, "bilinear|sesquilinear");
  s->add_option("--entry-bound", syn.entry_bound, "Entries of random factors lie in [-b, b]");

  std::string v_input;
  std::string v_report;
  auto* v = app.add_subcommand("verify", "Replay a report's reduction against its input");
  v->add_option("input", v_input, "Matrix file")->required();
  v->add_option("report", v_report, "JSON report from regularize")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (r->parsed()) return cmd_regularize(reg);
    if (c->parsed()) return cmd_compare(cmp);
    if (s->parsed()) {
      syn.seed = parse_seed(seed_text);
      return cmd_synthesize(syn);
    }
    if (v->parsed()) return cmd_verify(v_input, v_report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
