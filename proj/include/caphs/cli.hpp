#pragma once

// Command-line front end. Every subcommand parses files, calls the library
// and prints JSON (or CSV for certify/bench) on `out`; failures print a JSON
// error object on `err` and exit 2.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caphs/approx.hpp"
#include "caphs/exact.hpp"
#include "caphs/io.hpp"
#include "caphs/reductions.hpp"

namespace caphs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitError = 2;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMalformedInput, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Applies one "key=value" override to cfg.
inline void apply_override(SolverConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::kParameterViolation, "override must be key=value: " + kv);
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  auto integer = [&] {
    const Rational r = parse_rational(val);
    if (r.den != 1) throw Error(ErrorKind::kParameterViolation, key + " must be an integer");
    return r.num;
  };
  if (key == "rho") {
    cfg.rho = parse_rational(val);
  } else if (key == "top_t") {
    cfg.top_t = integer();
  } else if (key == "small_class_threshold") {
    cfg.small_class_threshold = integer();
  } else if (key == "bucket_base") {
    cfg.bucket_base = parse_rational(val);
  } else if (key == "tuple_budget") {
    cfg.tuple_budget = integer();
  } else if (key == "recursion_budget") {
    cfg.recursion_budget = integer();
  } else if (key == "color_trials") {
    cfg.color_trials = integer();
  } else if (key == "max_color_trials") {
    cfg.max_color_trials = integer();
  } else {
    throw Error(ErrorKind::kParameterViolation, "unknown constant: " + key);
  }
}

inline nlohmann::ordered_json result_json(const Solution& sol, const Assignment& asg, const Instance& inst) {
  nlohmann::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["found"] = true;
  doc["size"] = sol.size();
  doc["weight"] = sol.weight(inst);
  const auto body = solution_to_json(sol, asg);
  doc["copies"] = body["copies"];
  doc["assignment"] = body["assignment"];
  return doc;
}

inline std::string fixed(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline const char* kCertifyHeader =
    "digest,k,opt_size,opt_weight,approx_size,approx_weight,size_bound,size_ratio,weight_ratio,size_ok,weight_ok";

/// One CSV record: exact size and weight optima, then guided approx.
inline std::string certify_record(const Instance& inst, std::int64_t k, const SolverConfig& cfg) {
  std::ostringstream row;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(instance_digest(inst)));
  row << digest << ',' << k << ',';
  const auto by_size = solve_exact(inst, k);
  const auto by_weight = solve_exact_weighted(inst, k);
  if (!by_size || !by_weight) {
    row << "none,none,none,none," << size_bound(k) << ",none,none,none,none";
    return row.str();
  }
  const auto approx = solve_approx(inst, k, cfg, GuidedMode{by_weight->sol, by_weight->asg});
  row << by_size->sol.size() << ',' << by_weight->weight << ',';
  if (!approx) {
    row << "none,none," << size_bound(k) << ",none,none,0,0";
    return row.str();
  }
  const double size_ratio = by_size->sol.size() == 0 ? 1.0
                                                     : static_cast<double>(approx->size) / static_cast<double>(by_size->sol.size());
  const double weight_ratio =
      by_weight->weight == 0 ? (approx->weight == 0 ? 1.0 : 0.0) : static_cast<double>(approx->weight) / static_cast<double>(by_weight->weight);
  // weight <= (2 + eps) * opt, compared exactly
  const Rational factor(2 * cfg.epsilon.den + cfg.epsilon.num, cfg.epsilon.den);
  const bool weight_ok = static_cast<__int128>(approx->weight) * factor.den <= static_cast<__int128>(by_weight->weight) * factor.num;
  row << approx->size << ',' << approx->weight << ',' << size_bound(k) << ',' << fixed(size_ratio) << ','
      << (by_weight->weight == 0 && approx->weight != 0 ? std::string("inf") : fixed(weight_ratio)) << ','
      << (approx->size <= size_bound(k) ? 1 : 0) << ',' << (weight_ok ? 1 : 0);
  return row.str();
}

/// The instance shape used by `bench`.
inline GenParams bench_params() {
  GenParams p;
  p.n = 6;
  p.m = 6;
  p.d = 3;
  p.cap_range = {2, 4};
  p.weight_range = {1, 5};
  p.mult_range = {1, 2};
  return p;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacitated d-Hitting Set solver"};
  app.require_subcommand(1);

  std::string instance_path, solution_path, input_path, mode = "guided", kind, epsilon = "1/2";
  std::int64_t k = 0, budget = 0, n = 6, m = 8, count = 10, kmax = 3;
  int d = 3;
  std::uint64_t seed = 0;
  bool weighted = false;
  std::vector<std::string> overrides;

  auto* check = app.add_subcommand("check", "Check a solution for feasibility");
  check->add_option("instance", instance_path)->required();
  check->add_option("solution", solution_path)->required();

  auto* exact = app.add_subcommand("solve-exact", "Exhaustive optimum");
  exact->add_option("instance", instance_path)->required();
  exact->add_option("--k", k)->required();
  exact->add_flag("--weighted", weighted);
  exact->add_option("--budget", budget, "candidate budget");

  auto* approx = app.add_subcommand("solve-approx", "Approximation pipeline");
  approx->add_option("instance", instance_path)->required();
  approx->add_option("--k", k)->required();
  approx->add_option("--epsilon", epsilon);
  approx->add_option("--mode", mode)->check(CLI::IsMember({"enumerate", "guided"}));
  approx->add_option("--seed", seed);
  approx->add_option("--budget", budget, "tuple and recursion budget");
  approx->add_option("--override-const", overrides, "key=value")->allow_extra_args(false);

  auto* certify = app.add_subcommand("certify", "Exact oracle, then guided approx, as one CSV record");
  certify->add_option("instance", instance_path)->required();
  certify->add_option("--k", k)->required();
  certify->add_option("--seed", seed);

  auto* gen = app.add_subcommand("gen", "Seeded random instance");
  gen->add_option("--n", n);
  gen->add_option("--m", m);
  gen->add_option("--d", d);
  gen->add_option("--seed", seed);
  gen->add_flag("--weighted", weighted);

  auto* reduce = app.add_subcommand("reduce", "Hardness constructions");
  reduce->add_option("kind", kind)->required()->check(CLI::IsMember({"csp-mdk", "mdk-cvc", "mdk-wcvc", "csp-mdk-cov"}));
  reduce->add_option("input", input_path)->required();

  auto* bench = app.add_subcommand("bench", "Certification table over a seeded corpus");
  std::uint64_t corpus_seed = 0;
  bench->add_option("--corpus-seed", corpus_seed);
  bench->add_option("--count", count);
  bench->add_option("--kmax", kmax);

  auto fail = [&](const std::string& kind_name, const std::string& message) {
    nlohmann::ordered_json e;
    e["error"] = kind_name;
    e["message"] = message;
    err << e.dump() << "\n";
    return kExitError;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what());
  }

  try {
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.epsilon = parse_rational(epsilon);
    if (budget > 0) cfg.tuple_budget = cfg.recursion_budget = budget;
    for (const auto& o : overrides) apply_override(cfg, o);

    if (*check) {
      const Instance inst = parse_instance(read_file(instance_path));
      const SolutionDoc doc = parse_solution(read_file(solution_path), inst.m());
      nlohmann::ordered_json res;
      res["format"] = kFormatVersion;
      const auto asg = check_feasible(inst, doc.sol);
      res["feasible"] = asg.has_value();
      if (doc.asg) res["assignment_valid"] = is_valid_assignment(inst, doc.sol, *doc.asg);
      res["size"] = doc.sol.size();
      res["weight"] = doc.sol.weight(inst);
      if (asg) res["assignment"] = solution_to_json(doc.sol, *asg)["assignment"];
      out << res.dump() << "\n";
      return asg ? kExitOk : kExitNegative;
    }
    if (*exact) {
      const Instance inst = parse_instance(read_file(instance_path));
      const std::int64_t b = budget > 0 ? budget : kDefaultExactBudget;
      const auto res = weighted ? solve_exact_weighted(inst, k, b) : solve_exact(inst, k, b);
      if (!res) {
        out << nlohmann::ordered_json{{"format", kFormatVersion}, {"found", false}}.dump() << "\n";
        return kExitNegative;
      }
      out << result_json(res->sol, res->asg, inst).dump() << "\n";
      return kExitOk;
    }
    if (*approx) {
      const Instance inst = parse_instance(read_file(instance_path));
      ApproxMode am = EnumerateMode{};
      if (mode == "guided") {
        const auto opt = solve_exact_weighted(inst, k);
        if (!opt) throw Error(ErrorKind::kPreconditionViolated, "no solution of size <= k exists to guide the run");
        am = GuidedMode{opt->sol, opt->asg};
      }
      const auto res = solve_approx(inst, k, cfg, am);
      nlohmann::ordered_json doc;
      if (!res) {
        doc["format"] = kFormatVersion;
        doc["found"] = false;
      } else {
        doc = result_json(res->sol, res->asg, inst);
      }
      doc["mode"] = mode;
      doc["k"] = k;
      doc["size_bound"] = size_bound(k);
      doc["ratio_bound"] = 4.0 / 3.0;
      doc["weight_ratio_bound"] = 2.0 + cfg.epsilon.to_double();
      out << doc.dump() << "\n";
      return res ? kExitOk : kExitNegative;
    }
    if (*certify) {
      const Instance inst = parse_instance(read_file(instance_path));
      out << certify_record(inst, k, cfg) << "\n";
      return kExitOk;
    }
    if (*gen) {
      GenParams p;
      p.n = n;
      p.m = m;
      p.d = d;
      p.cap_range = {1, 3};
      if (weighted) p.weight_range = {1, 10};
      out << serialize_instance(generate_instance(p, seed));
      return kExitOk;
    }
    if (*reduce) {
      const std::string text = read_file(input_path);
      if (kind == "csp-mdk") {
        out << mdk_to_json(csp_to_mdk(parse_csp(text))).dump() << "\n";
      } else if (kind == "csp-mdk-cov") {
        const nlohmann::json doc = detail::parse_json(text);
        const CspInstance csp = csp_from_json(doc);
        CoveringFamily family;
        for (const auto& set : detail::get_array(doc, "family")) {
          std::vector<std::int64_t> members;
          for (const auto& x : set) members.push_back(detail::as_int(x));
          family.push_back(std::move(members));
        }
        std::optional<std::int64_t> Q;
        if (doc.contains("Q")) Q = detail::get_int(doc, "Q");
        out << mdk_to_json(csp_to_mdk_covering(csp, family, Q).mdk).dump() << "\n";
      } else {
        const MdkInstance mdk = parse_mdk(text);
        const CvcReduction red = kind == "mdk-cvc" ? mdk_to_cvc(mdk) : mdk_to_wcvc(mdk);
        nlohmann::ordered_json doc;
        doc["format"] = kFormatVersion;
        doc["k"] = red.k_param;
        doc["weight_budget"] = red.weight_budget ? nlohmann::ordered_json(*red.weight_budget) : nlohmann::ordered_json();
        doc["instance"] = instance_to_json(red.inst);
        out << doc.dump() << "\n";
      }
      return kExitOk;
    }
    if (*bench) {
      if (kmax < 1) throw Error(ErrorKind::kParameterViolation, "kmax must be positive");
      out << "index," << kCertifyHeader << "\n";
      for (std::int64_t i = 0; i < count; ++i) {
        const Instance inst = generate_instance(bench_params(), mix_seed(corpus_seed, static_cast<std::uint64_t>(i)));
        const std::int64_t ki = 1 + i % kmax;
        out << i << ',' << certify_record(inst, ki, cfg) << "\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.detail());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
  return kExitError;
}

}  // namespace caphs::cli
