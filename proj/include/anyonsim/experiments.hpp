#pragma once

// Named experiment drivers shared by the command-line tool and the test
// suite. Each driver produces report records that pair a computed value with
// an independently obtained reference, plus the externally published closed
// form where one exists. Records serialize to JSON lines and render as a
// plain-text table.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anyonsim/optics.hpp"

namespace anyonsim {

struct ExperimentConfig {
  std::string experiment;        // fusion, probe, optics, equivalence
  std::string layer = "all";     // abstract, encoded, photonic, all
  std::string element = "all";   // group token or all
  std::string vertex = "v1";     // abstract-layer operation vertex
  std::string basis = "both";    // x, y, both
  double lambda = 0.1;           // squeezing parameter
  int n_max = 3;                 // photon-number cutoff per source
  std::string circuit_path;      // optional external circuit JSON
  double tolerance = 0.0;        // 0 keeps the per-kind defaults
  unsigned seed = 12345;         // random-matrix sweeps
  std::string out_path;          // optional JSON-lines output file

  void validate() const {
    const auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed) {
      for (const char* a : allowed)
        if (v == a) return true;
      return false;
    };
    if (!one_of(experiment, {"fusion", "probe", "optics", "equivalence"}))
      throw std::invalid_argument("unknown experiment '" + experiment + "'");
    if (!one_of(layer, {"abstract", "encoded", "photonic", "all"}))
      throw std::invalid_argument("unknown layer '" + layer + "'");
    if (element != "all") GroupElement::from_token(element);
    vertex_from_name(vertex);
    if (!one_of(basis, {"x", "y", "both"}))
      throw std::invalid_argument("unknown basis '" + basis + "'");
    if (!(lambda > 0.0 && lambda < 1.0))
      throw std::invalid_argument("lambda must lie in (0,1)");
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    if (tolerance < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  }

  std::vector<GroupElement> elements() const {
    if (element == "all") {
      const auto& a = GroupElement::all();
      return {a.begin(), a.end()};
    }
    return {GroupElement::from_token(element)};
  }
  bool layer_on(const char* name) const { return layer == "all" || layer == name; }
  double algebraic_tol() const { return tolerance > 0.0 ? tolerance : 1e-10; }
  double route_tol() const { return tolerance > 0.0 ? tolerance : 1e-12; }
  double photonic_tol() const { return tolerance > 0.0 ? tolerance : 1e-6; }
};

// One comparison: a computed complex value against a real reference. The
// provenance says where the reference comes from: a published closed form
// ("paper", carrying the quoted number), an independently computed oracle
// ("derived-oracle"), or a direct identity ("trivial"). Informational rows
// report a number without gating the run.
struct ReportRecord {
  std::string experiment;
  std::string operation;
  nlohmann::json parameters = nlohmann::json::object();
  double value_re = 0.0;
  double value_im = 0.0;
  double oracle_value = 0.0;
  double abs_error = 0.0;
  std::optional<double> paper_value;
  std::string provenance = "derived-oracle";
  double tolerance = 0.0;
  bool informational = false;
  bool pass = false;
  double wall_time_ms = 0.0;
};

inline void to_json(nlohmann::json& j, const ReportRecord& r) {
  j = nlohmann::json{{"experiment", r.experiment},
                     {"operation", r.operation},
                     {"parameters", r.parameters},
                     {"value_re", r.value_re},
                     {"value_im", r.value_im},
                     {"oracle_value", r.oracle_value},
                     {"abs_error", r.abs_error},
                     {"paper_value", nullptr},
                     {"provenance", r.provenance},
                     {"tolerance", r.tolerance},
                     {"informational", r.informational},
                     {"pass", r.pass},
                     {"wall_time_ms", r.wall_time_ms}};
  if (r.paper_value) j["paper_value"] = *r.paper_value;
}

struct Report {
  std::vector<ReportRecord> records;

  bool all_pass() const {
    for (const ReportRecord& r : records)
      if (!r.pass) return false;
    return true;
  }
};

namespace detail {

class Stopwatch {
public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - mark_).count();
    mark_ = now;
    return ms;
  }

private:
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

class ReportBuilder {
public:
  explicit ReportBuilder(std::string experiment) : experiment_(std::move(experiment)) {}

  void add(std::string operation, nlohmann::json parameters, cd value, double oracle,
           double tolerance, std::string provenance,
           std::optional<double> paper_value = std::nullopt, bool informational = false) {
    ReportRecord r;
    r.experiment = experiment_;
    r.operation = std::move(operation);
    r.parameters = std::move(parameters);
    r.value_re = value.real();
    r.value_im = value.imag();
    r.oracle_value = oracle;
    r.abs_error = std::abs(value - cd(oracle, 0.0));
    r.paper_value = paper_value;
    r.provenance = std::move(provenance);
    r.tolerance = tolerance;
    r.informational = informational;
    r.pass = informational || r.abs_error <= tolerance;
    r.wall_time_ms = watch_.lap_ms();
    report_.records.push_back(std::move(r));
  }

  // Reports a number that is not checked against anything else.
  void info(std::string operation, nlohmann::json parameters, double value,
            std::string provenance = "trivial",
            std::optional<double> paper_value = std::nullopt) {
    add(std::move(operation), std::move(parameters), value, value, 0.0, std::move(provenance),
        paper_value, true);
  }

  Report take() { return std::move(report_); }

private:
  std::string experiment_;
  Report report_;
  Stopwatch watch_;
};

// Closed-form edge-label distribution of the probe: after the vertex action
// by g the connecting edge carries label l with probability
// |tr{R2(g) R2(l)+}|^2 / 6.
inline double probe_label_probability(GroupElement g, GroupElement l) {
  const Irrep& r2 = Irrep::two_dim();
  const cd overlap = (r2.matrix(g) * r2.matrix(l).adjoint()).trace();
  return std::norm(overlap) / 6.0;
}

inline Eigen::MatrixXcd random_internal_matrix(int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = cd(gauss(rng), gauss(rng));
  const double scale = std::sqrt(static_cast<double>(dim)) / m.norm();
  return scale * m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fusion interferometry across the three layers.

inline Report cmd_fusion(const ExperimentConfig& config) {
  config.validate();
  detail::ReportBuilder out("fusion");
  const Vertex v = vertex_from_name(config.vertex);
  const Irrep& r2 = Irrep::two_dim();

  for (GroupElement h : config.elements()) {
    const double f_ref = fusion_amplitude(r2, h).real();  // characters are real here
    const nlohmann::json params = {{"element", h.token()}};

    if (config.layer_on("abstract")) {
      nlohmann::json pv = params;
      pv["vertex"] = config.vertex;
      out.add("fusion_amplitude_ground_trace", params, fusion_amplitude_ground_trace(r2, h),
              f_ref, config.route_tol(), "paper", f_ref);
      out.add("fusion_amplitude_overlap", params, fusion_amplitude_overlap(r2, h), f_ref,
              config.route_tol(), "derived-oracle");
      if (config.basis != "y") {
        const auto [up, down] = controlled_gauge_experiment(h, v, ProbeBasis::x);
        out.add("interference_x", pv, up - down, f_ref, config.algebraic_tol(), "paper", f_ref);
        out.add("interference_x_sum", pv, up + down, 1.0, config.algebraic_tol(), "trivial");
      }
      if (config.basis != "x") {
        const auto [up, down] = controlled_gauge_experiment(h, v, ProbeBasis::y);
        out.add("interference_y", pv, up - down, 0.0, config.algebraic_tol(), "paper", 0.0);
      }
    }

    if (config.layer_on("encoded")) {
      if (config.basis != "y") {
        const auto [up, down] = run_encoded_fusion(h, ProbeBasis::x);
        out.add("encoded_interference_x", params, up - down, f_ref, config.algebraic_tol(),
                "paper", f_ref);
      }
      if (config.basis != "x") {
        const auto [up, down] = run_encoded_fusion(h, ProbeBasis::y);
        out.add("encoded_interference_y", params, up - down, 0.0, config.algebraic_tol(),
                "paper", 0.0);
      }
    }

    if (config.layer_on("photonic")) {
      const InterferenceResult r = photonic_fusion_experiment(h);
      out.add("photonic_interference", params, r.p_plus - r.p_minus, f_ref,
              config.photonic_tol(), "paper", f_ref);
      out.info("photonic_success_probability", params, r.success_probability);
    }
  }
  return out.take();
}

// ---------------------------------------------------------------------------
// Ancilla-free probes and invariant-subspace sweeps.

inline Report cmd_probe(const ExperimentConfig& config) {
  config.validate();
  detail::ReportBuilder out("probe");
  const GroupElement e = GroupElement::identity();
  const GroupElement cp = GroupElement::from_token("c+");
  const GroupElement cm = GroupElement::from_token("c-");

  for (GroupElement g : config.elements()) {
    const nlohmann::json params = {{"element", g.token()}};
    // The published distributions cover the identity, one rotation and the
    // reflections; the other rotation follows by the same closed form.
    const bool quoted = !(g == cm);
    const std::string prov = quoted ? "paper" : "derived-oracle";
    const double p_e = detail::probe_label_probability(g, e);
    const double p_cp = detail::probe_label_probability(g, cp);
    const double p_cm = detail::probe_label_probability(g, cm);
    const double w_ref = 2.0 * p_e - p_cp - p_cm;

    const auto emit = [&](const char* prefix, const ProbeStats& stats) {
      const std::string p = prefix;
      const auto maybe = [&](double x) {
        return quoted ? std::optional<double>(x) : std::nullopt;
      };
      out.add(p + "p_identity", params, stats.p_identity, p_e, config.algebraic_tol(), prov,
              maybe(p_e));
      out.add(p + "p_rot_plus", params, stats.p_rot_plus, p_cp, config.algebraic_tol(), prov,
              maybe(p_cp));
      out.add(p + "p_rot_minus", params, stats.p_rot_minus, p_cm, config.algebraic_tol(), prov,
              maybe(p_cm));
      out.add(p + "w_expectation", params, stats.w, w_ref, config.algebraic_tol(),
              "derived-oracle");
    };
    if (config.layer_on("abstract")) emit("probe_", probe_stats_abstract(g));
    if (config.layer_on("encoded")) emit("encoded_probe_", run_ancilla_free_probe(g));
  }

  // Invariant-subspace probes: the projector route against the explicit
  // state route, for group-element internal states and random ones.
  std::mt19937 rng(config.seed);
  for (const Irrep* r : Irrep::all()) {
    for (const Irrep* rp : Irrep::all()) {
      const int mult = fusion_multiplicity(*r, *rp);
      for (GroupElement h : config.elements()) {
        const nlohmann::json params = {
            {"charge", r->name()}, {"probe", rp->name()}, {"element", h.token()}};
        out.add("q_probe_group_element", params, fusion_probe(*r, *rp, h),
                fusion_probe_direct(*r, *rp, h), config.algebraic_tol(), "derived-oracle");
      }
      for (int draw = 0; draw < 3; ++draw) {
        const Eigen::MatrixXcd m = detail::random_internal_matrix(r->dim(), rng);
        const nlohmann::json params = {
            {"charge", r->name()}, {"probe", rp->name()}, {"draw", draw}};
        out.add("q_probe_random_state", params, fusion_probe(*r, *rp, m),
                fusion_probe_direct(*r, *rp, m), config.algebraic_tol(), "derived-oracle");
        if (mult == 0)
          out.add("q_probe_vanishing", params, fusion_probe(*r, *rp, m), 0.0,
                  config.algebraic_tol(), "paper", 0.0);
      }
    }
  }
  return out.take();
}

// ---------------------------------------------------------------------------
// Sources, state preparation, and external circuit files.

inline Report cmd_optics(const ExperimentConfig& config) {
  config.validate();
  detail::ReportBuilder out("optics");
  const nlohmann::json src_params = {{"lambda", config.lambda}, {"n_max", config.n_max}};

  const ThreeCrystalResult tc = three_crystal_postselect(config.lambda, config.n_max);
  const double lam2 = config.lambda * config.lambda;
  const double branch_ref = lam2 * std::pow(1.0 - lam2, 3);
  out.add("spdc_branch_probability", src_params, tc.branch_probability, branch_ref,
          config.photonic_tol(), "paper", branch_ref);
  out.add("spdc_total_probability", src_params, tc.total_probability, 3.0 * branch_ref,
          config.photonic_tol(), "derived-oracle");
  const double deficit_ref = 1.0 - std::pow(1.0 - std::pow(lam2, config.n_max + 1), 3);
  out.add("spdc_truncation_deficit", src_params, tc.truncation_deficit, deficit_ref,
          config.photonic_tol(), "derived-oracle");
  out.add("spdc_conditional_fidelity", src_params, tc.fidelity, 1.0, config.algebraic_tol(),
          "derived-oracle");

  const PrepResult prep = run_prep_circuit();
  out.add("prep_fidelity", nlohmann::json::object(), prep.fidelity, 1.0,
          config.algebraic_tol(), "derived-oracle");
  out.info("prep_success_probability", nlohmann::json::object(), prep.success_probability);
  int splitters = 0;
  for (const OpticalElement& e : synthesize_prep_elements())
    if (e.kind == OpticalElement::Kind::beam_splitter) ++splitters;
  out.info("prep_beam_splitter_count", nlohmann::json::object(), splitters, "paper", 14.0);

  if (!config.circuit_path.empty()) {
    std::ifstream in(config.circuit_path);
    if (!in) throw std::invalid_argument("cannot open circuit file " + config.circuit_path);
    nlohmann::json j;
    in >> j;
    const OpticalCircuit circuit = j.get<OpticalCircuit>();
    const HeraldedDecode run = run_circuit(circuit);
    const nlohmann::json params = {{"circuit", config.circuit_path}};
    double fidelity = 0.0;
    if (run.logical.reg() == prep_target_state().reg())
      fidelity = std::abs(inner(prep_target_state(), run.logical));
    out.add("external_circuit_fidelity", params, fidelity, 1.0, config.algebraic_tol(),
            "derived-oracle");
    out.add("external_circuit_success", params, run.success_probability, 9.0 / 55.0,
            config.photonic_tol(), "paper", 9.0 / 55.0, /*informational=*/true);
  }
  return out.take();
}

// ---------------------------------------------------------------------------
// Cross-configuration equivalences.

inline Report cmd_equivalence(const ExperimentConfig& config) {
  config.validate();
  detail::ReportBuilder out("equivalence");
  const ChargeConfiguration std_cfg = ChargeConfiguration::standard();
  const StateVector std_state = encoded_charge_state(std_cfg);

  struct Alt {
    const char* name;
    ChargePair pair;
    std::array<int, 6> site_perm;  // alternative multi-index read off the standard one
  };
  // Pair (v1,v2) swaps qudits 1 and 2; pair (v2,v3) swaps qudits 2 and 3.
  const std::array<Alt, 2> alts = {
      Alt{"v1v2", {Vertex::v1, Vertex::v2}, {2, 3, 0, 1, 4, 5}},
      Alt{"v2v3", {Vertex::v2, Vertex::v3}, {0, 1, 4, 5, 2, 3}}};

  for (const Alt& alt : alts) {
    const ChargeConfiguration cfg = ChargeConfiguration::for_pair(alt.pair);
    const StateVector alt_state = encoded_charge_state(cfg);
    const nlohmann::json params = {{"pair", alt.name}};

    double max_diff = 0.0;
    for (int idx = 0; idx < std_state.reg().total_dim(); ++idx) {
      const std::vector<int> multi = std_state.reg().unflatten(idx);
      std::vector<int> permuted(6);
      for (int k = 0; k < 6; ++k) permuted[k] = multi[alt.site_perm[k]];
      max_diff = std::max(max_diff,
                          std::abs(alt_state.amp(permuted) - std_state.amplitudes()(idx)));
    }
    out.add("config_state_permutation", params, max_diff, 0.0, config.algebraic_tol(), "paper",
            0.0);

    for (GroupElement g : config.elements()) {
      nlohmann::json pg = params;
      pg["element"] = g.token();
      const auto [up_std, down_std] = run_encoded_fusion(g, ProbeBasis::x, std_cfg);
      const auto [up_alt, down_alt] = run_encoded_fusion(g, ProbeBasis::x, cfg);
      out.add("config_interference_match", pg, up_alt, up_std, config.algebraic_tol(), "paper",
              up_std);

      const ProbeStats ps_std = run_ancilla_free_probe(g, std_cfg);
      const ProbeStats ps_alt = run_ancilla_free_probe(g, cfg);
      const double probe_diff = std::max(
          {std::abs(ps_alt.p_identity - ps_std.p_identity),
           std::abs(ps_alt.p_rot_plus - ps_std.p_rot_plus),
           std::abs(ps_alt.p_rot_minus - ps_std.p_rot_minus), std::abs(ps_alt.w - ps_std.w)});
      out.add("config_probe_match", pg, probe_diff, 0.0, config.algebraic_tol(),
              "derived-oracle");
    }
  }

  // The two encodings compensate the two action sides at the table level.
  for (GroupElement g : GroupElement::all()) {
    int mismatches = 0;
    const auto left1 = encoded_qudit_table(g, EncodingVariant::enc1, QuditRole::left_action);
    const auto right2 = encoded_qudit_table(g, EncodingVariant::enc2, QuditRole::right_action);
    const auto left2 = encoded_qudit_table(g, EncodingVariant::enc2, QuditRole::left_action);
    const auto right1 = encoded_qudit_table(g, EncodingVariant::enc1, QuditRole::right_action);
    for (int k = 0; k < 6; ++k) {
      if (!(left1[k] == right2[k])) ++mismatches;
      if (!(left2[k] == right1[k])) ++mismatches;
    }
    out.add("gate_table_compensation", {{"element", g.token()}}, mismatches, 0.0, 0.0, "paper",
            0.0);
  }

  Report report = out.take();
  bool pass = true;
  for (const ReportRecord& r : report.records) pass = pass && r.pass;
  detail::ReportBuilder summary("equivalence");
  summary.add("equivalence_summary", nlohmann::json::object(), pass ? 1.0 : 0.0, 1.0, 0.0,
              "trivial");
  report.records.push_back(summary.take().records.front());
  return report;
}

// ---------------------------------------------------------------------------
// Dispatch and output.

inline Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.experiment == "fusion") return cmd_fusion(config);
  if (config.experiment == "probe") return cmd_probe(config);
  if (config.experiment == "optics") return cmd_optics(config);
  return cmd_equivalence(config);
}

inline void write_jsonl(const Report& report, std::ostream& os) {
  for (const ReportRecord& r : report.records) os << nlohmann::json(r).dump() << "\n";
}

inline void write_table(const Report& report, std::ostream& os) {
  os << std::left << std::setw(34) << "operation" << std::setw(36) << "parameters"
     << std::right << std::setw(16) << "value" << std::setw(14) << "oracle" << std::setw(11)
     << "error"
     << "  status\n";
  for (const ReportRecord& r : report.records) {
    std::ostringstream value;
    value << std::setprecision(10) << r.value_re;
    if (std::abs(r.value_im) > 1e-14) value << (r.value_im < 0 ? "-" : "+") << "i...";
    std::string params = r.parameters.dump();
    if (params.size() > 34) params = params.substr(0, 31) + "...";
    std::ostringstream oracle, error;
    oracle << std::setprecision(6) << r.oracle_value;
    error << std::setprecision(2) << std::scientific << r.abs_error;
    os << std::left << std::setw(34) << r.operation << std::setw(36) << params << std::right
       << std::setw(16) << value.str() << std::setw(14) << oracle.str() << std::setw(11)
       << error.str() << "  "
       << (r.informational ? "INFO" : (r.pass ? "PASS" : "FAIL")) << "\n";
  }
  std::size_t checked = 0, passed = 0;
  for (const ReportRecord& r : report.records) {
    if (r.informational) continue;
    ++checked;
    if (r.pass) ++passed;
  }
  os << passed << "/" << checked << " checks passed, "
     << (report.records.size() - checked) << " informational rows\n";
}

}  // namespace anyonsim
