#include "locc/certify.hpp"
#include "locc/io.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

// Exit codes: 0 affirmative, 1 negative verdict, 2 inconclusive, 3 input
// error. Reports carry the seed and tolerances used, and never a
// timestamp, so reruns reproduce them byte for byte.

namespace {

using locc::Mat;
using nlohmann::json;

constexpr int kAffirmative = 0;
constexpr int kNegative = 1;
constexpr int kInconclusive = 2;
constexpr int kInputError = 3;

std::uint64_t env_seed() {
  const char* raw = std::getenv("LOCCLAB_SEED");
  if (!raw) return 1;
  char* end = nullptr;
  unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0')
    throw locc::ParseError("LOCCLAB_SEED is not an integer");
  return value;
}

locc::DeviationKind parse_measure(const std::string& name) {
  if (name == "mf") return locc::DeviationKind::MeanFailure;
  if (name == "ce") return locc::DeviationKind::ConditionalEntropy;
  if (name == "finite") return locc::DeviationKind::Finite;
  throw locc::ParseError("unknown measure " + name);
}

json table_json(const Eigen::MatrixXd& table) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < table.cols(); ++c) row.push_back(table(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json factors_json(const locc::ProductOperator& op) {
  json factors = json::array();
  for (const Mat& f : op.factors) factors.push_back(locc::matrix_json(f));
  return factors;
}

void render_human(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      render_human(value, prefix.empty() ? key : prefix + "." + key, os);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i)
      render_human(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << " = " << j.dump() << "\n";
  }
}

struct Options {
  std::string states_file;
  std::string measurement_file;  // protocol or POVM
  std::string basis_file;
  std::string cert_file;
  std::string out;
  std::string measure = "mf";
  double chi = 0.5;
  double delta = 0.0;
  double tol = 1e-8;
  int grid = 11;
  int restarts = 64;
  std::uint64_t seed = 1;
  bool as_json = false;
};

// Assembles the report skeleton shared by every command.
json base_report(const std::string& command, const Options& o,
                 std::initializer_list<std::pair<const char*, std::string>> inputs) {
  json report;
  report["command"] = command;
  json digests;
  for (const auto& [name, path] : inputs)
    digests[name] = locc::file_digest(path);
  report["inputs"] = std::move(digests);
  report["parameters"]["seed"] = o.seed;
  report["parameters"]["tol"] = o.tol;
  return report;
}

int emit(const json& report, const Options& o, int code) {
  if (o.as_json) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << report["command"].get<std::string>() << "\n";
    render_human(report["results"], "", std::cout);
  }
  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw locc::ParseError("cannot write " + o.out);
    file << report.dump(2) << "\n";
  }
  return code;
}

locc::SearchConfig search_config(const Options& o) {
  locc::SearchConfig config;
  config.restarts = o.restarts;
  config.seed = o.seed;
  return config;
}

locc::OutcomeDistribution measured_distribution(
    const Options& o, const locc::WeightedStateFamily& family) {
  locc::FileKind kind = locc::sniff_kind(o.measurement_file);
  if (kind == locc::FileKind::Protocol)
    return locc::simulate(locc::load_protocol(o.measurement_file), family);
  if (kind == locc::FileKind::Povm)
    return locc::outcome_distribution(locc::load_povm(o.measurement_file),
                                      family);
  throw locc::ParseError(o.measurement_file +
                         ": expected a protocol or POVM file");
}

int cmd_deviation(const Options& o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::OutcomeDistribution p = measured_distribution(o, family);
  double value = locc::deviation(parse_measure(o.measure), p);

  json report = base_report("deviation", o,
                            {{"states", o.states_file},
                             {"measurement", o.measurement_file}});
  report["parameters"]["measure"] = o.measure;
  report["results"]["deviation"] = value;
  report["results"]["outcomes"] = p.outcomes();
  report["results"]["table"] = table_json(p.table());
  return emit(report, o, kAffirmative);
}

int cmd_simulate(const Options& o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::ProtocolTree tree = locc::load_protocol(o.measurement_file);
  locc::OutcomeDistribution p = locc::simulate(tree, family);

  json report = base_report("simulate", o,
                            {{"states", o.states_file},
                             {"protocol", o.measurement_file}});
  report["results"]["leaves"] = p.outcomes();
  report["results"]["table"] = table_json(p.table());
  return emit(report, o, kAffirmative);
}

int cmd_split(Options o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::ProtocolTree tree = locc::load_protocol(o.measurement_file);
  if (o.measure == "finite")
    throw locc::ParseError("split supports the mf and ce measures");

  locc::SplitConfig config;
  config.delta = o.delta;
  config.kind = parse_measure(o.measure);
  locc::SplitResult result = locc::split_protocol(tree, config, family);
  locc::ResidualReport equivalence =
      locc::equivalence_check(tree, result, family, o.tol);

  const std::string prefix = o.out.empty() ? "split" : o.out;
  const std::string modified_file = prefix + ".modified.json";
  const std::string stage_one_file = prefix + ".stage_one.json";
  locc::save_protocol(result.modified, modified_file);
  locc::save_protocol(result.stage_one, stage_one_file);
  o.out.clear();  // artifacts already written; keep the report on stdout

  json report = base_report("split", o,
                            {{"states", o.states_file},
                             {"protocol", o.measurement_file}});
  report["parameters"]["delta"] = o.delta;
  report["parameters"]["measure"] = o.measure;
  report["parameters"]["level_tol"] = config.level_tol;
  report["results"]["iterations"] = result.iterations;
  report["results"]["boundary_leaves"] = result.s_delta.size();
  report["results"]["equivalence_residual"] = equivalence.max_residual;
  report["results"]["modified_file"] = modified_file;
  report["results"]["stage_one_file"] = stage_one_file;
  return emit(report, o, equivalence.ok ? kAffirmative : kNegative);
}

int cmd_verify_cert(const Options& o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::ProductOperator e = locc::load_product_operator(o.cert_file);
  locc::Certificate cert = locc::verify_certificate(e, family, o.chi, o.tol);

  json report = base_report("verify-cert", o,
                            {{"states", o.states_file}, {"cert", o.cert_file}});
  report["parameters"]["chi"] = o.chi;
  report["results"]["pass"] = cert.pass;
  report["results"]["normalization_residual"] = cert.normalization_residual;
  report["results"]["max_trace_residual"] = cert.max_trace_residual;
  report["results"]["orthogonality_residual"] = cert.orthogonality_residual;
  report["results"]["psd_margin"] = cert.psd_margin;
  return emit(report, o, cert.pass ? kAffirmative : kNegative);
}

int cmd_search_cert(Options o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  std::optional<locc::Certificate> cert =
      locc::search_certificate(family, o.chi, search_config(o));

  std::string cert_file;
  if (cert && !o.out.empty()) {
    cert_file = o.out;
    locc::save_product_operator(cert->E, cert_file);
    o.out.clear();
  }

  json report = base_report("search-cert", o, {{"states", o.states_file}});
  report["parameters"]["chi"] = o.chi;
  report["parameters"]["restarts"] = o.restarts;
  report["results"]["found"] = static_cast<bool>(cert);
  if (cert) {
    report["results"]["normalization_residual"] = cert->normalization_residual;
    report["results"]["max_trace_residual"] = cert->max_trace_residual;
    report["results"]["orthogonality_residual"] = cert->orthogonality_residual;
    report["results"]["psd_margin"] = cert->psd_margin;
    report["results"]["factors"] = factors_json(cert->E);
    if (!cert_file.empty()) report["results"]["cert_file"] = cert_file;
  }
  return emit(report, o, cert ? kAffirmative : kInconclusive);
}

// The built-in three-state family gets its closed-form certificates; any
// other family goes through the numerical search.
bool matches_builtin_family(const locc::WeightedStateFamily& family) {
  locc::WeightedStateFamily builtin = locc::closed_form_family();
  if (!(family.structure == builtin.structure) ||
      family.size() != builtin.size())
    return false;
  for (int mu = 0; mu < family.size(); ++mu) {
    if (std::abs(family.priors[mu] - builtin.priors[mu]) > 1e-9) return false;
    if (locc::op_norm(family.states[mu] - builtin.states[mu]) > 1e-8)
      return false;
  }
  return true;
}

int cmd_scan_chi(const Options& o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::CertificateBuilder builder;
  if (matches_builtin_family(family))
    builder = [](double chi) { return locc::closed_form_certificate(chi); };
  locc::ScanReport scan =
      locc::scan_chi(family, o.grid, search_config(o), builder);

  json chis = json::array();
  for (const locc::ScanEntry& entry : scan.entries)
    if (!entry.satisfied) chis.push_back(entry.chi);

  json report = base_report("scan-chi", o, {{"states", o.states_file}});
  report["parameters"]["grid"] = o.grid;
  report["parameters"]["restarts"] = o.restarts;
  report["results"]["closed_form"] = static_cast<bool>(builder);
  report["results"]["grid_points"] = scan.entries.size();
  report["results"]["all_satisfied"] = scan.all_satisfied();
  report["results"]["inconclusive_chi"] = std::move(chis);
  return emit(report, o, scan.all_satisfied() ? kAffirmative : kInconclusive);
}

int cmd_precheck(const Options& o) {
  locc::WeightedStateFamily family = locc::load_states(o.states_file);
  locc::PreconditionReport pre =
      locc::precondition_check(family, search_config(o));

  json report = base_report("precheck", o, {{"states", o.states_file}});
  report["parameters"]["restarts"] = o.restarts;
  report["results"]["pass"] = pre.pass;
  report["results"]["kernel_dimension"] = pre.kernel_dimension;
  report["results"]["max_product_overlap"] = pre.max_product_overlap;
  return emit(report, o, pre.pass ? kAffirmative : kNegative);
}

int cmd_closed_form(Options o) {
  locc::ProductOperator e = locc::closed_form_certificate(o.chi);
  locc::Certificate cert =
      locc::verify_certificate(e, locc::closed_form_family(), o.chi, o.tol);

  const std::string cert_file = o.out.empty() ? "certificate.json" : o.out;
  locc::save_product_operator(e, cert_file);
  o.out.clear();

  json report;
  report["command"] = "closed-form";
  report["inputs"] = json::object();
  report["parameters"]["seed"] = o.seed;
  report["parameters"]["tol"] = o.tol;
  report["parameters"]["chi"] = o.chi;
  report["results"]["cert_file"] = cert_file;
  report["results"]["factors"] = factors_json(e);
  report["results"]["pass"] = cert.pass;
  report["results"]["normalization_residual"] = cert.normalization_residual;
  report["results"]["max_trace_residual"] = cert.max_trace_residual;
  report["results"]["orthogonality_residual"] = cert.orthogonality_residual;
  report["results"]["psd_margin"] = cert.psd_margin;
  return emit(report, o, cert.pass ? kAffirmative : kNegative);
}

int cmd_dissect(const Options& o) {
  locc::ProductBasis basis = locc::load_basis(o.basis_file);
  locc::DissectionResult result = locc::dissect(basis);

  json report = base_report("dissect", o, {{"basis", o.basis_file}});
  const bool yes =
      result.decision == locc::Discriminability::FiniteDiscriminable;
  report["results"]["decision"] =
      yes ? "FINITE_DISCRIMINABLE" : "NOT_DISCRIMINABLE";
  if (yes) {
    locc::WeightedStateFamily family;
    family.structure = basis.structure;
    for (int mu = 0; mu < basis.size(); ++mu) {
      locc::CVec v = basis.global(mu);
      family.states.push_back(v * v.adjoint());
      family.priors.push_back(1.0 / basis.size());
    }
    locc::OutcomeDistribution p = locc::simulate(result.protocol, family);
    report["results"]["protocol_leaves"] = p.outcomes();
    report["results"]["d_mf"] = locc::d_mf(p);
    if (!o.out.empty()) {
      locc::save_protocol(result.protocol, o.out);
      report["results"]["protocol_file"] = o.out;
    }
  } else {
    report["results"]["witness"] = result.witness;
  }
  Options quiet = o;
  quiet.out.clear();  // any --out already holds the protocol artifact
  return emit(report, quiet, yes ? kAffirmative : kNegative);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    o.seed = env_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }

  CLI::App app{"LOCC state discrimination toolbox"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", o.as_json, "machine-readable report on stdout");
    sub->add_option("--out", o.out, "output file (artifact or report)");
    sub->add_option("--seed", o.seed, "random seed (default: LOCCLAB_SEED or 1)");
    sub->add_option("--tol", o.tol, "acceptance tolerance");
  };

  CLI::App* deviation = app.add_subcommand(
      "deviation", "deviation of a measurement on a state family");
  deviation->add_option("--states", o.states_file)->required();
  deviation->add_option("--protocol", o.measurement_file, "protocol or POVM file")
      ->required();
  deviation->add_option("--measure", o.measure)
      ->check(CLI::IsMember({"mf", "ce", "finite"}));
  add_common(deviation);

  CLI::App* simulate =
      app.add_subcommand("simulate", "outcome distribution of a protocol");
  simulate->add_option("--states", o.states_file)->required();
  simulate->add_option("--protocol", o.measurement_file)->required();
  add_common(simulate);

  CLI::App* split = app.add_subcommand(
      "split", "insert pseudo-weak rounds so deviations pass through delta");
  split->add_option("--states", o.states_file)->required();
  split->add_option("--protocol", o.measurement_file)->required();
  split->add_option("--delta", o.delta)->required();
  split->add_option("--measure", o.measure)
      ->check(CLI::IsMember({"mf", "ce", "finite"}));
  add_common(split);

  CLI::App* verify =
      app.add_subcommand("verify-cert", "check a product-operator certificate");
  verify->add_option("--states", o.states_file)->required();
  verify->add_option("--cert", o.cert_file)->required();
  verify->add_option("--chi", o.chi)->required();
  add_common(verify);

  CLI::App* search =
      app.add_subcommand("search-cert", "search for a certificate numerically");
  search->add_option("--states", o.states_file)->required();
  search->add_option("--chi", o.chi)->required();
  search->add_option("--restarts", o.restarts);
  add_common(search);

  CLI::App* scan = app.add_subcommand(
      "scan-chi", "certificate existence over a uniform chi grid");
  scan->add_option("--states", o.states_file)->required();
  scan->add_option("--grid", o.grid);
  scan->add_option("--restarts", o.restarts);
  add_common(scan);

  CLI::App* precheck = app.add_subcommand(
      "precheck", "product-vector test of the common kernel");
  precheck->add_option("--states", o.states_file)->required();
  precheck->add_option("--restarts", o.restarts);
  add_common(precheck);

  CLI::App* closed = app.add_subcommand(
      "closed-form", "closed-form certificate for the built-in family");
  closed->add_option("--chi", o.chi)->required();
  add_common(closed);

  CLI::App* dissect =
      app.add_subcommand("dissect", "decide LOCC discriminability of a basis");
  dissect->add_option("--basis", o.basis_file)->required();
  add_common(dissect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*deviation) return cmd_deviation(o);
    if (*simulate) return cmd_simulate(o);
    if (*split) return cmd_split(o);
    if (*verify) return cmd_verify_cert(o);
    if (*search) return cmd_search_cert(o);
    if (*scan) return cmd_scan_chi(o);
    if (*precheck) return cmd_precheck(o);
    if (*closed) return cmd_closed_form(o);
    if (*dissect) return cmd_dissect(o);
  } catch (const locc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::runtime_error& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
