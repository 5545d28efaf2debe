#pragma once

// Linear-optics realization layer: circuit elements with JSON serialization,
// triangular interferometer synthesis, squeezed-pair sources heralded into
// rail-encoded registers, a plug-in slot for post-selected two-photon gates,
// and the photonic interference protocols built from all of these.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "anyonsim/encoding.hpp"
#include "anyonsim/fock.hpp"

namespace anyonsim {

// ---------------------------------------------------------------------------
// Circuit elements.

struct OpticalElement {
  enum class Kind { beam_splitter, phase_shift, mode_swap, cnot2lvl };

  Kind kind = Kind::phase_shift;
  // beam_splitter / mode_swap: 2 modes. phase_shift: 1. cnot2lvl: (control,
  // target rail 0, target rail 1).
  std::vector<std::string> modes;
  double reflectivity = 0.0;
  double phase = 0.0;

  static OpticalElement beam_splitter(std::string m1, std::string m2, double r) {
    OpticalElement e;
    e.kind = Kind::beam_splitter;
    e.modes = {std::move(m1), std::move(m2)};
    e.reflectivity = r;
    return e;
  }
  static OpticalElement phase_shift(std::string m, double phi) {
    OpticalElement e;
    e.kind = Kind::phase_shift;
    e.modes = {std::move(m)};
    e.phase = phi;
    return e;
  }
  static OpticalElement mode_swap(std::string m1, std::string m2) {
    OpticalElement e;
    e.kind = Kind::mode_swap;
    e.modes = {std::move(m1), std::move(m2)};
    return e;
  }
  static OpticalElement cnot2lvl(std::string control, std::string t0, std::string t1) {
    OpticalElement e;
    e.kind = Kind::cnot2lvl;
    e.modes = {std::move(control), std::move(t0), std::move(t1)};
    return e;
  }
};

using ElementList = std::vector<OpticalElement>;

inline const std::string& element_kind_name(OpticalElement::Kind k) {
  static const std::array<std::string, 4> names = {"beam_splitter", "phase_shift", "mode_swap",
                                                   "cnot2lvl"};
  return names[static_cast<int>(k)];
}

inline OpticalElement::Kind element_kind_from_name(std::string_view name) {
  for (OpticalElement::Kind k :
       {OpticalElement::Kind::beam_splitter, OpticalElement::Kind::phase_shift,
        OpticalElement::Kind::mode_swap, OpticalElement::Kind::cnot2lvl})
    if (name == element_kind_name(k)) return k;
  throw std::invalid_argument("element_kind_from_name: unknown element '" + std::string(name) +
                              "'");
}

namespace detail {

inline int element_mode_count(OpticalElement::Kind k) {
  switch (k) {
    case OpticalElement::Kind::phase_shift: return 1;
    case OpticalElement::Kind::beam_splitter:
    case OpticalElement::Kind::mode_swap: return 2;
    case OpticalElement::Kind::cnot2lvl: return 3;
  }
  throw std::logic_error("element_mode_count: bad kind");
}

inline void check_element(const OpticalElement& e) {
  if (static_cast<int>(e.modes.size()) != element_mode_count(e.kind))
    throw std::invalid_argument("optical element '" + element_kind_name(e.kind) + "' needs " +
                                std::to_string(element_mode_count(e.kind)) + " modes, got " +
                                std::to_string(e.modes.size()));
  for (std::size_t i = 0; i < e.modes.size(); ++i)
    for (std::size_t j = i + 1; j < e.modes.size(); ++j)
      if (e.modes[i] == e.modes[j])
        throw std::invalid_argument("optical element '" + element_kind_name(e.kind) +
                                    "' repeats mode '" + e.modes[i] + "'");
  if (e.kind == OpticalElement::Kind::beam_splitter &&
      (e.reflectivity < 0.0 || e.reflectivity > 1.0))
    throw std::invalid_argument("beam_splitter reflectivity must lie in [0,1]");
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const OpticalElement& e) {
  j = nlohmann::json{{"kind", element_kind_name(e.kind)}, {"modes", e.modes}};
  if (e.kind == OpticalElement::Kind::beam_splitter) j["reflectivity"] = e.reflectivity;
  if (e.kind == OpticalElement::Kind::phase_shift) j["phase"] = e.phase;
}

inline void from_json(const nlohmann::json& j, OpticalElement& e) {
  e = OpticalElement{};
  e.kind = element_kind_from_name(j.at("kind").get<std::string>());
  e.modes = j.at("modes").get<std::vector<std::string>>();
  if (e.kind == OpticalElement::Kind::beam_splitter)
    e.reflectivity = j.at("reflectivity").get<double>();
  if (e.kind == OpticalElement::Kind::phase_shift) e.phase = j.at("phase").get<double>();
  detail::check_element(e);
}

inline FockVector apply_element(const FockVector& f, const OpticalElement& e) {
  detail::check_element(e);
  switch (e.kind) {
    case OpticalElement::Kind::beam_splitter:
      return apply_beam_splitter(f, e.modes[0], e.modes[1], e.reflectivity);
    case OpticalElement::Kind::phase_shift:
      return apply_phase_shift(f, e.modes[0], e.phase);
    case OpticalElement::Kind::mode_swap:
      return apply_mode_swap(f, e.modes[0], e.modes[1]);
    case OpticalElement::Kind::cnot2lvl:
      return apply_cnot2lvl_fock(f, e.modes[0], e.modes[1], e.modes[2]);
  }
  throw std::logic_error("apply_element: bad kind");
}

inline FockVector apply_elements(const FockVector& f, const ElementList& elements) {
  FockVector out = f;
  for (const OpticalElement& e : elements) out = apply_element(out, e);
  return out;
}

// Matrix realized on single-photon amplitude vectors; column k is the output
// for a photon injected into mode k. Only passive elements are allowed.
inline Eigen::MatrixXcd realized_single_photon_matrix(const ModeSet& modes,
                                                      const ElementList& elements) {
  for (const OpticalElement& e : elements)
    if (e.kind == OpticalElement::Kind::cnot2lvl)
      throw std::invalid_argument("realized_single_photon_matrix: cnot2lvl is not passive");
  const int n = modes.num_modes();
  Eigen::MatrixXcd u(n, n);
  for (int k = 0; k < n; ++k) {
    std::vector<int> occ(n, 0);
    occ[k] = 1;
    const FockVector out = apply_elements(FockVector::basis(modes, occ), elements);
    for (int m = 0; m < n; ++m) {
      std::vector<int> probe(n, 0);
      probe[m] = 1;
      u(m, k) = out.amp(probe);
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Interferometer synthesis.

namespace detail {

inline double wrap_phase(double p) {
  while (p <= -M_PI) p += 2.0 * M_PI;
  while (p > M_PI) p -= 2.0 * M_PI;
  return p;
}

inline void push_phase(ElementList& out, const std::string& mode, double phase) {
  phase = wrap_phase(phase);
  if (std::abs(phase) > 1e-15) out.push_back(OpticalElement::phase_shift(mode, phase));
}

inline void check_unitary(const Eigen::MatrixXcd& u, const char* who) {
  const Eigen::MatrixXcd gram = u.adjoint() * u;
  if (!gram.isApprox(Eigen::MatrixXcd::Identity(u.cols(), u.cols()), 1e-9))
    throw std::invalid_argument(std::string(who) + ": matrix is not unitary");
}

}  // namespace detail

// Any 2x2 unitary as phase shifts around one beam splitter: u = P2 B(R) P1
// with R = |u00|^2. Near-zero phases are dropped.
inline ElementList two_mode_elements(const Eigen::Matrix2cd& u, const std::string& mode1,
                                     const std::string& mode2) {
  detail::check_unitary(u, "two_mode_elements");
  const double r = std::min(1.0, std::norm(u(0, 0)));
  double pre1 = 0.0, pre2 = 0.0, post1 = 0.0, post2 = 0.0;
  if (std::abs(u(0, 1)) < 1e-9) {
    post1 = std::arg(u(0, 0)) - M_PI / 2.0;
    post2 = std::arg(u(1, 1)) - M_PI / 2.0;
  } else if (std::abs(u(0, 0)) < 1e-9) {
    pre1 = std::arg(u(1, 0));
    pre2 = std::arg(u(0, 1));
  } else {
    post1 = std::arg(u(0, 0)) - M_PI / 2.0;
    post2 = std::arg(u(1, 0));
    pre2 = std::arg(u(0, 1)) - post1;
  }
  ElementList out;
  detail::push_phase(out, mode1, pre1);
  detail::push_phase(out, mode2, pre2);
  out.push_back(OpticalElement::beam_splitter(mode1, mode2, r));
  detail::push_phase(out, mode1, post1);
  detail::push_phase(out, mode2, post2);
  return out;
}

// Triangular mesh realizing an arbitrary n-mode unitary: Givens rotations on
// neighbouring modes null the matrix column by column, and the element list
// is the adjoint factors after a layer of output phases.
inline ElementList reck_elements(const Eigen::MatrixXcd& u, const std::vector<std::string>& modes) {
  const int n = static_cast<int>(modes.size());
  if (u.rows() != n || u.cols() != n)
    throw std::invalid_argument("reck_elements: matrix size does not match mode count");
  detail::check_unitary(u, "reck_elements");

  Eigen::MatrixXcd work = u;
  struct Givens {
    int row;  // acts on (row, row+1)
    Eigen::Matrix2cd g;
  };
  std::vector<Givens> factors;
  for (int c = 0; c < n - 1; ++c) {
    for (int r = n - 1; r > c; --r) {
      const cd a = work(r - 1, c);
      const cd b = work(r, c);
      if (std::abs(b) < 1e-14) continue;  // already null
      const double s = std::hypot(std::abs(a), std::abs(b));
      Eigen::Matrix2cd g;
      g << std::conj(a) / s, std::conj(b) / s, -b / s, a / s;
      work.block(r - 1, 0, 2, n) = (g * work.block(r - 1, 0, 2, n)).eval();
      factors.push_back({r - 1, g});
    }
  }

  ElementList out;
  for (int k = 0; k < n; ++k) detail::push_phase(out, modes[k], std::arg(work(k, k)));
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    const Eigen::Matrix2cd gi = it->g.adjoint();
    const ElementList part = two_mode_elements(gi, modes[it->row], modes[it->row + 1]);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Self-contained circuits with JSON serialization.

struct CircuitInputTerm {
  std::vector<int> occupation;
  cd amplitude = 1.0;
};

struct OpticalCircuit {
  ModeSet modes;
  std::vector<CircuitInputTerm> input;
  ElementList elements;
  PostSelection postselect;
};

inline void to_json(nlohmann::json& j, const OpticalCircuit& c) {
  j = nlohmann::json::object();
  j["modes"] = c.modes.labels();
  j["max_per_mode"] = c.modes.max_per_mode();
  j["max_total"] = c.modes.max_total();
  j["input"] = nlohmann::json::array();
  for (const CircuitInputTerm& t : c.input)
    j["input"].push_back({{"occupation", t.occupation},
                          {"amp", {t.amplitude.real(), t.amplitude.imag()}}});
  j["elements"] = c.elements;
  nlohmann::json blocks = nlohmann::json::array();
  for (const BlockSpec& b : c.postselect.blocks)
    blocks.push_back({{"name", b.name}, {"rails", b.rails}});
  j["postselect"] = {{"blocks", blocks}, {"vacuum", c.postselect.vacuum}};
}

inline void from_json(const nlohmann::json& j, OpticalCircuit& c) {
  c = OpticalCircuit{};
  c.modes = ModeSet(j.at("modes").get<std::vector<std::string>>(), j.value("max_per_mode", 64),
                    j.value("max_total", 64));
  int index = 0;
  for (const nlohmann::json& t : j.value("input", nlohmann::json::array())) {
    try {
      CircuitInputTerm term;
      term.occupation = t.at("occupation").get<std::vector<int>>();
      const auto amp = t.at("amp").get<std::array<double, 2>>();
      term.amplitude = cd(amp[0], amp[1]);
      c.input.push_back(std::move(term));
    } catch (const std::exception& e) {
      throw std::invalid_argument("circuit input term " + std::to_string(index) + ": " +
                                  e.what());
    }
    ++index;
  }
  index = 0;
  for (const nlohmann::json& t : j.value("elements", nlohmann::json::array())) {
    try {
      c.elements.push_back(t.get<OpticalElement>());
    } catch (const std::exception& e) {
      throw std::invalid_argument("circuit element " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  if (j.contains("postselect")) {
    const nlohmann::json& p = j.at("postselect");
    for (const nlohmann::json& b : p.value("blocks", nlohmann::json::array()))
      c.postselect.blocks.push_back(
          {b.at("name").get<std::string>(), b.at("rails").get<std::vector<std::string>>()});
    c.postselect.vacuum = p.value("vacuum", std::vector<std::string>{});
  }
}

// Builds the input superposition, applies every element, then heralds.
inline HeraldedDecode run_circuit(const OpticalCircuit& c) {
  if (c.input.empty()) throw std::invalid_argument("run_circuit: circuit has no input terms");
  FockVector f(c.modes);
  for (const CircuitInputTerm& t : c.input) f.add_amp(t.occupation, t.amplitude);
  f = apply_elements(f, c.elements);
  // Absolute acceptance probability: weight lost before the pattern check
  // (sub-unit input or lossy elements) counts against success.
  HeraldedDecode out = decode_blocks(f, c.postselect);
  out.success_probability *= f.norm_sq();
  return out;
}

// Exact angles used by the optimized hand-layout of the preparation
// interferometer, which ships as an external circuit file rather than being
// synthesized here. Named so transcriptions can reference the closed forms
// instead of rounded decimals.
inline const double prep_phase_theta = std::asin(10.0 / std::sqrt(247.0));
inline const double prep_phase_phi =
    std::asin((7.0 + std::sqrt(3.0)) / (2.0 * std::sqrt(26.0))) - std::numbers::pi / 4.0;

// ---------------------------------------------------------------------------
// Rail-block layout helpers.

inline std::vector<std::string> block_rails(const std::string& name, int levels) {
  std::vector<std::string> rails;
  for (int k = 0; k < levels; ++k) rails.push_back(name + std::to_string(k));
  return rails;
}

inline BlockSpec make_block(const std::string& name, int levels) {
  return BlockSpec{name, block_rails(name, levels)};
}

// Single-qudit rail codecs: logical level k carries one photon in rail k.
// Decoders treat every occupation outside the one-photon subspace as a
// post-selection failure rather than an error.
inline FockVector trirail_encode(const StateVector& qutrit, const std::string& block = "q") {
  if (qutrit.reg().num_sites() != 1 || qutrit.reg().dim(0) != 3)
    throw std::invalid_argument("trirail_encode: expected a single qutrit");
  return encode_blocks(qutrit, {make_block(block, 3)});
}

inline FockVector dualrail_encode(const StateVector& qubit, const std::string& block = "q") {
  if (qubit.reg().num_sites() != 1 || qubit.reg().dim(0) != 2)
    throw std::invalid_argument("dualrail_encode: expected a single qubit");
  return encode_blocks(qubit, {make_block(block, 2)});
}

inline HeraldedDecode trirail_decode(const FockVector& f, const std::string& block = "q") {
  if (f.modes().num_modes() != 3)
    throw std::invalid_argument("trirail_decode: expected exactly three rails");
  return decode_blocks(f, PostSelection{{BlockSpec{block, f.modes().labels()}}, {}});
}

inline HeraldedDecode dualrail_decode(const FockVector& f, const std::string& block = "q") {
  if (f.modes().num_modes() != 2)
    throw std::invalid_argument("dualrail_decode: expected exactly two rails");
  return decode_blocks(f, PostSelection{{BlockSpec{block, f.modes().labels()}}, {}});
}

// ---------------------------------------------------------------------------
// Heralded squeezed-pair source bank.

struct ThreeCrystalResult {
  double branch_probability = 0.0;   // one chosen crystal fires exactly once
  double total_probability = 0.0;    // any of the three
  double truncation_deficit = 0.0;   // weight lost to the photon-number cutoff
  StateVector conditional;           // two-qutrit register ("a","b")
  double fidelity = 0.0;             // against the maximally correlated pair
};

// Three two-mode squeezed sources, one per rail; heralding one photon in the
// signal block and one in the idler block leaves the maximally correlated
// qutrit pair sum_k |kk> / sqrt(3).
inline ThreeCrystalResult three_crystal_postselect(double lambda, int n_max) {
  FockVector joint = spdc_state(lambda, n_max, "a0", "b0");
  joint = tensor(joint, spdc_state(lambda, n_max, "a1", "b1"));
  joint = tensor(joint, spdc_state(lambda, n_max, "a2", "b2"));

  const PostSelection sel{{BlockSpec{"a", {"a0", "a1", "a2"}}, BlockSpec{"b", {"b0", "b1", "b2"}}},
                          {}};
  const HeraldedDecode decode = decode_blocks(joint, sel);

  ThreeCrystalResult out;
  out.truncation_deficit = 1.0 - joint.norm_sq();
  out.total_probability = decode.success_probability * joint.norm_sq();
  out.branch_probability = out.total_probability / 3.0;
  out.conditional = decode.logical;

  StateVector target = StateVector::zero(out.conditional.reg());
  for (int k = 0; k < 3; ++k) target.amp({k, k}) = 1.0 / std::sqrt(3.0);
  target.set_normalized_flag(true);
  out.fidelity = std::abs(inner(target, out.conditional));
  return out;
}

// ---------------------------------------------------------------------------
// Preparation of the qutrit factor of the encoded charge pair.

// Target amplitudes c_j / (3 sqrt(2)) over (1b, 2b, 3b) with weights
// (2, -1, -1) on the middle qutrit and the third locked to the first plus a
// block-dependent offset. This is exactly the qutrit factor of the encoded
// charge state, which splits off from its qubit factor.
inline StateVector prep_target_state() {
  StateVector s = StateVector::zero(QuditRegister({3, 3, 3}, {"1b", "2b", "3b"}));
  const std::array<double, 3> coeff = {2.0, -1.0, -1.0};
  const std::array<int, 3> offset = {0, 2, 1};
  for (int y = 0; y < 3; ++y)
    for (int j = 0; j < 3; ++j)
      s.amp({y, j, (y + offset[j]) % 3}) = coeff[j] / (3.0 * std::sqrt(2.0));
  s.set_normalized_flag(true);
  return s;
}

inline std::vector<BlockSpec> prep_blocks() {
  return {make_block("1b", 3), make_block("2b", 3), make_block("3b", 3)};
}

namespace detail {

// One cyclic qutrit shift as two rail transpositions, applied left to right.
inline std::array<std::array<int, 2>, 2> qutrit_shift_swaps(int shift) {
  if (shift == 1) return {{{0, 1}, {0, 2}}};
  if (shift == -1) return {{{0, 2}, {0, 1}}};
  throw std::invalid_argument("qutrit_shift_swaps: shift must be +1 or -1");
}

}  // namespace detail

// Element list that turns (photon in rail 2b0) x (correlated 1b,3b pair) into
// the target state: a triangular mesh paints the (2,-1,-1)/sqrt(6) column
// onto the middle block, then photon-controlled rail exchanges write the
// block-dependent offset onto the third block.
inline ElementList synthesize_prep_elements() {
  Eigen::MatrixXcd v(3, 3);
  v.col(0) << 2.0, -1.0, -1.0;
  v.col(1) << 0.0, 1.0, -1.0;
  v.col(2) << 1.0, 1.0, 1.0;
  v.col(0) /= std::sqrt(6.0);
  v.col(1) /= std::sqrt(2.0);
  v.col(2) /= std::sqrt(3.0);

  ElementList out = reck_elements(v, block_rails("2b", 3));
  // Offset 2 (a shift by -1) when the photon sits in rail 2b1, offset 1 when
  // it sits in rail 2b2; with the photon in rail 2b0 nothing fires.
  const std::array<std::pair<std::string, int>, 2> shifts = {{{"2b1", -1}, {"2b2", +1}}};
  for (const auto& [control, shift] : shifts)
    for (const auto& s : detail::qutrit_shift_swaps(shift))
      out.push_back(OpticalElement::cnot2lvl(control, "3b" + std::to_string(s[0]),
                                             "3b" + std::to_string(s[1])));
  return out;
}

// Complete circuit description for the synthesized preparation: the source
// input (correlated 1b,3b pair plus one photon in rail 2b0), the element
// list, and the one-photon-per-block acceptance pattern.
inline OpticalCircuit synthesize_prep_circuit() {
  std::vector<std::string> labels = block_rails("1b", 3);
  const std::vector<std::string> mid = block_rails("2b", 3);
  const std::vector<std::string> last = block_rails("3b", 3);
  labels.insert(labels.end(), mid.begin(), mid.end());
  labels.insert(labels.end(), last.begin(), last.end());

  OpticalCircuit c;
  c.modes = ModeSet(labels, 4, 8);
  for (int y = 0; y < 3; ++y) {
    std::vector<int> occ(9, 0);
    occ[y] = 1;      // 1b rail y
    occ[3] = 1;      // photon enters the middle block in rail 0
    occ[6 + y] = 1;  // 3b rail y
    c.input.push_back({occ, 1.0 / std::sqrt(3.0)});
  }
  c.elements = synthesize_prep_elements();
  c.postselect = PostSelection{prep_blocks(), {}};
  return c;
}

// Runs a circuit's elements on a caller-supplied input and decodes with the
// given pattern. The returned success probability is absolute: the accepted
// share of a unit-weight input, including any weight the input itself or the
// elements already lost.
inline HeraldedDecode run_prep_circuit(const OpticalCircuit& circuit, const FockVector& input,
                                       const PostSelection& pattern) {
  const FockVector f = apply_elements(input, circuit.elements);
  HeraldedDecode out = decode_blocks(f, pattern);
  out.success_probability *= f.norm_sq();
  return out;
}

struct PrepResult {
  double fidelity = 0.0;
  double success_probability = 0.0;
  StateVector state;
};

// Runs the synthesized elements on the source input and compares against the
// target. Ideal controlled exchanges keep every branch heraldable, so the
// success probability is 1 here; a post-selected gate model would lower it.
inline PrepResult run_prep_circuit() {
  const OpticalCircuit circuit = synthesize_prep_circuit();
  FockVector f(circuit.modes);
  for (const CircuitInputTerm& t : circuit.input) f.add_amp(t.occupation, t.amplitude);
  const HeraldedDecode decode = run_prep_circuit(circuit, f, circuit.postselect);

  PrepResult out;
  out.success_probability = decode.success_probability;
  out.state = decode.logical;
  out.fidelity = std::abs(inner(prep_target_state(), decode.logical));
  return out;
}

// ---------------------------------------------------------------------------
// Plug-in slot for post-selected controlled rail exchanges.

// A template circuit over formal mode names. Instantiation substitutes the
// actual control and target rails, appends fresh ancilla modes in the given
// occupation, runs the elements, then projects the ancillas onto the herald
// pattern. Weight that fails the herald stays missing from the state norm.
struct CnotConstruction {
  std::string control = "c";
  std::array<std::string, 2> targets = {"t0", "t1"};
  std::vector<std::string> ancilla_modes;
  std::vector<int> ancilla_occupation;
  ElementList elements;
  std::vector<std::pair<std::string, int>> herald;

  void validate() const {
    std::set<std::string> formal = {control, targets[0], targets[1]};
    if (formal.size() != 3)
      throw std::invalid_argument("CnotConstruction: formal modes must be distinct");
    for (const std::string& a : ancilla_modes)
      if (!formal.insert(a).second)
        throw std::invalid_argument("CnotConstruction: duplicate mode name '" + a + "'");
    if (ancilla_occupation.size() != ancilla_modes.size())
      throw std::invalid_argument("CnotConstruction: ancilla occupation length mismatch");
    std::set<std::string> heralded;
    for (const auto& [mode, photons] : herald) {
      if (std::find(ancilla_modes.begin(), ancilla_modes.end(), mode) == ancilla_modes.end())
        throw std::invalid_argument("CnotConstruction: herald mode '" + mode +
                                    "' is not an ancilla");
      if (photons < 0) throw std::invalid_argument("CnotConstruction: negative herald count");
      if (!heralded.insert(mode).second)
        throw std::invalid_argument("CnotConstruction: herald repeats mode '" + mode + "'");
    }
    if (heralded.size() != ancilla_modes.size())
      throw std::invalid_argument("CnotConstruction: every ancilla needs a herald count");
    for (const OpticalElement& e : elements) {
      detail::check_element(e);
      for (const std::string& m : e.modes)
        if (formal.find(m) == formal.end())
          throw std::invalid_argument("CnotConstruction: element touches unknown mode '" + m +
                                      "'");
    }
  }

  // Ideal exchange plus an ancilla photon that only picks up a phase: success
  // weight 1 per use, a minimal demonstration of the plumbing.
  static CnotConstruction wrapped_logical() {
    CnotConstruction cc;
    cc.ancilla_modes = {"w"};
    cc.ancilla_occupation = {1};
    cc.elements = {OpticalElement::cnot2lvl("c", "t0", "t1"),
                   OpticalElement::phase_shift("w", M_PI)};
    cc.herald = {{"w", 1}};
    return cc;
  }

  // Ideal exchange followed by a heralded ancilla splitter: each use succeeds
  // with probability 1/2 and contributes a global phase i.
  static CnotConstruction heralded_half() {
    CnotConstruction cc;
    cc.ancilla_modes = {"w0", "w1"};
    cc.ancilla_occupation = {1, 0};
    cc.elements = {OpticalElement::cnot2lvl("c", "t0", "t1"),
                   OpticalElement::beam_splitter("w0", "w1", 0.5)};
    cc.herald = {{"w0", 1}, {"w1", 0}};
    return cc;
  }
};

inline void to_json(nlohmann::json& j, const CnotConstruction& cc) {
  nlohmann::json ancillas = nlohmann::json::array();
  for (std::size_t i = 0; i < cc.ancilla_modes.size(); ++i)
    ancillas.push_back({{"mode", cc.ancilla_modes[i]}, {"photons", cc.ancilla_occupation[i]}});
  nlohmann::json herald = nlohmann::json::array();
  for (const auto& [mode, photons] : cc.herald)
    herald.push_back({{"mode", mode}, {"photons", photons}});
  j = nlohmann::json{{"control", cc.control},
                     {"targets", cc.targets},
                     {"ancillas", ancillas},
                     {"elements", cc.elements},
                     {"herald", herald}};
}

inline void from_json(const nlohmann::json& j, CnotConstruction& cc) {
  cc = CnotConstruction{};
  cc.control = j.value("control", std::string("c"));
  if (j.contains("targets")) cc.targets = j.at("targets").get<std::array<std::string, 2>>();
  for (const nlohmann::json& a : j.value("ancillas", nlohmann::json::array())) {
    cc.ancilla_modes.push_back(a.at("mode").get<std::string>());
    cc.ancilla_occupation.push_back(a.at("photons").get<int>());
  }
  int index = 0;
  for (const nlohmann::json& t : j.value("elements", nlohmann::json::array())) {
    try {
      cc.elements.push_back(t.get<OpticalElement>());
    } catch (const std::exception& e) {
      throw std::invalid_argument("construction element " + std::to_string(index) + ": " +
                                  e.what());
    }
    ++index;
  }
  for (const nlohmann::json& h : j.value("herald", nlohmann::json::array()))
    cc.herald.emplace_back(h.at("mode").get<std::string>(), h.at("photons").get<int>());
  cc.validate();
}

// Named models for the controlled exchange: "logical" keeps the exact gate
// with a phase-only success flag; "heralded" succeeds with probability 1/2
// per use. User-supplied constructions arrive through the JSON form instead.
inline CnotConstruction postselected_cnot(const std::string& model) {
  if (model == "logical") return CnotConstruction::wrapped_logical();
  if (model == "heralded") return CnotConstruction::heralded_half();
  throw std::invalid_argument("postselected_cnot: unknown model '" + model + "'");
}

inline FockVector apply_postselected_cnot(const FockVector& f, const CnotConstruction& cc,
                                          const std::string& control, const std::string& t0,
                                          const std::string& t1, int use_index) {
  cc.validate();
  std::map<std::string, std::string> sub = {
      {cc.control, control}, {cc.targets[0], t0}, {cc.targets[1], t1}};
  std::vector<std::string> fresh;
  for (const std::string& a : cc.ancilla_modes) {
    std::string name = "_cnot" + std::to_string(use_index) + "_" + a;
    sub[a] = name;
    fresh.push_back(std::move(name));
  }

  FockVector work = f;
  if (!fresh.empty()) {
    int anc_total = 0;
    for (int n : cc.ancilla_occupation) anc_total += n;
    FockVector anc(ModeSet(fresh, f.modes().max_per_mode(), std::max(anc_total, 1)));
    anc.set_amp(cc.ancilla_occupation, 1.0);
    work = tensor(f, anc);
  }
  for (OpticalElement e : cc.elements) {
    for (std::string& m : e.modes) m = sub.at(m);
    work = apply_element(work, e);
  }

  // Project the fresh ancillas onto the herald pattern and drop them.
  std::vector<std::pair<int, int>> herald_idx;
  for (const auto& [mode, photons] : cc.herald)
    herald_idx.emplace_back(work.modes().index(sub.at(mode)), photons);
  const int base_n = f.modes().num_modes();
  FockVector out(f.modes());
  for (const auto& [occ, amp] : work.amplitudes()) {
    bool ok = true;
    for (const auto& [idx, want] : herald_idx)
      if (occ[idx] != want) {
        ok = false;
        break;
      }
    if (!ok) continue;
    out.add_amp(std::vector<int>(occ.begin(), occ.begin() + base_n), amp);
  }
  out.prune();
  return out;
}

// Dispatches controlled rail exchanges either to the ideal Fock permutation
// or to an instantiated post-selected construction, counting uses.
class CnotEngine {
public:
  explicit CnotEngine(const CnotConstruction* construction) : construction_(construction) {}

  FockVector apply(const FockVector& f, const std::string& control, const std::string& t0,
                   const std::string& t1) {
    ++uses_;
    if (!construction_) return apply_cnot2lvl_fock(f, control, t0, t1);
    return apply_postselected_cnot(f, *construction_, control, t0, t1, uses_);
  }

  int uses() const { return uses_; }

private:
  const CnotConstruction* construction_ = nullptr;
  int uses_ = 0;
};

// ---------------------------------------------------------------------------
// Gate-sequence compilation onto rail blocks.

inline std::vector<BlockSpec> encoded_blocks(bool with_ancilla) {
  std::vector<BlockSpec> blocks;
  for (int q = 1; q <= 3; ++q) {
    blocks.push_back(make_block(qudit_site(q, 'a'), 2));
    blocks.push_back(make_block(qudit_site(q, 'b'), 3));
  }
  if (with_ancilla) blocks.push_back(make_block("anc", 2));
  return blocks;
}

// Translates one register gate into rail operations. Uncontrolled gates are
// plain rail permutations; anything conditioned on a photon goes through the
// controlled-exchange engine.
inline FockVector compile_and_apply_gate(const FockVector& f, const Gate& g, CnotEngine& engine) {
  const auto rail = [](const std::string& site, int k) { return site + std::to_string(k); };

  if (g.kind == Gate::Kind::cnot2lvl) {
    if (g.control)
      throw std::invalid_argument("compile_and_apply_gate: doubly controlled exchange");
    // Fires when the qubit is 1, so rail 1 of the qubit block is the control.
    return engine.apply(f, rail(g.sites[0], 1), rail(g.sites[1], g.levels[0]),
                        rail(g.sites[1], g.levels[1]));
  }

  std::vector<std::array<int, 2>> swaps;
  const std::string& site = g.sites[0];
  switch (g.kind) {
    case Gate::Kind::qnot: swaps.push_back({0, 1}); break;
    case Gate::Kind::swap2: swaps.push_back(g.levels); break;
    case Gate::Kind::perm3: {
      for (const auto& s : detail::qutrit_shift_swaps(g.shift)) swaps.push_back(s);
      break;
    }
    default: throw std::logic_error("compile_and_apply_gate: bad kind");
  }

  FockVector out = f;
  if (g.control) {
    const std::string control = rail(*g.control, g.control_level);
    for (const auto& s : swaps) out = engine.apply(out, control, rail(site, s[0]), rail(site, s[1]));
  } else {
    for (const auto& s : swaps) out = apply_mode_swap(out, rail(site, s[0]), rail(site, s[1]));
  }
  return out;
}

inline FockVector compile_and_apply_sequence(const FockVector& f, const GateSequence& seq,
                                             CnotEngine& engine) {
  FockVector out = f;
  for (const Gate& g : seq) out = compile_and_apply_gate(out, g, engine);
  return out;
}

// ---------------------------------------------------------------------------
// Photonic interference protocols.

struct InterferenceResult {
  double p_plus = 0.0;
  double p_minus = 0.0;
  double success_probability = 0.0;  // heralds and block post-selection combined
};

// Decoded register state of the reflection protocol right before the ancilla
// readout, with the absolute herald probability. Runs on the full encoded
// register plus a dual-rail ancilla prepared along +x.
inline HeraldedDecode photonic_tt_decoded_state(int i, bool include_final_step,
                                                const CnotConstruction* construction = nullptr,
                                                bool simplified = false) {
  const std::vector<BlockSpec> blocks = encoded_blocks(true);
  const std::vector<BlockSpec> register_blocks(blocks.begin(), blocks.end() - 1);
  const FockVector body = encode_blocks(initial_encoded_state(), register_blocks);
  FockVector anc(ModeSet(block_rails("anc", 2), 4, 4));
  anc.set_amp({1, 0}, 1.0 / std::sqrt(2.0));
  anc.set_amp({0, 1}, 1.0 / std::sqrt(2.0));
  FockVector f = tensor(body, anc);

  CnotEngine engine(construction);
  f = compile_and_apply_sequence(f, controlled_tt_gates(i, include_final_step, simplified),
                                 engine);
  HeraldedDecode decode = decode_blocks(f, PostSelection{blocks, {}});
  decode.success_probability *= f.norm_sq();
  return decode;
}

// Outcome probabilities of the reflection protocol, conditioned on the
// heralds, plus the absolute herald probability.
inline InterferenceResult run_photonic_tt_protocol(int i, bool include_final_step,
                                                   const CnotConstruction* construction = nullptr,
                                                   bool simplified = false) {
  const HeraldedDecode decode =
      photonic_tt_decoded_state(i, include_final_step, construction, simplified);
  const auto [p_up, p_down] = detail::measure_ancilla(decode.logical, "anc", ProbeBasis::x);
  return InterferenceResult{p_up, p_down, decode.success_probability};
}

// Element chain of the rotation interference experiment. Two dual-rail
// ancilla photons p and q share a maximally entangled state; q controls the
// shift on the first qutrit block, p controls the undo of an unconditional
// shift on the second, so each control photon is consumed by one gate only.
// Net effect: the (p,q) = (1,1) branch carries the shifted state, the (0,0)
// branch the original.
inline ElementList rotation_interference_elements(int shift) {
  const auto rail = [](const char* block, int k) { return std::string(block) + std::to_string(k); };
  ElementList out;
  for (const auto& s : detail::qutrit_shift_swaps(shift))
    out.push_back(OpticalElement::cnot2lvl("q1", rail("1b", s[0]), rail("1b", s[1])));
  for (const auto& s : detail::qutrit_shift_swaps(-shift))
    out.push_back(OpticalElement::cnot2lvl("p0", rail("2b", s[0]), rail("2b", s[1])));
  for (const auto& s : detail::qutrit_shift_swaps(shift))
    out.push_back(OpticalElement::mode_swap(rail("2b", s[0]), rail("2b", s[1])));
  return out;
}

// Rotation interference on the qutrit rails. The qubit factor of the encoded
// charge pair is untouched by rotations, so only the three qutrit blocks are
// carried. Reading the ancilla pair in the parity basis (|00> +- |11>)/sqrt(2)
// turns the relative phase between the branches into the interference signal.
inline InterferenceResult photonic_rotation_interference(
    GroupElement g, const CnotConstruction* construction = nullptr) {
  if (!g.is_rotation())
    throw std::invalid_argument("photonic_rotation_interference: element must be a rotation");
  const int shift = (g.token() == "c+") ? -1 : +1;

  std::vector<BlockSpec> blocks = {make_block("p", 2), make_block("q", 2)};
  const std::vector<BlockSpec> qutrits = prep_blocks();
  blocks.insert(blocks.end(), qutrits.begin(), qutrits.end());

  FockVector anc(ModeSet({"p0", "p1", "q0", "q1"}, 4, 4));
  anc.set_amp({1, 0, 1, 0}, 1.0 / std::sqrt(2.0));
  anc.set_amp({0, 1, 0, 1}, 1.0 / std::sqrt(2.0));
  FockVector f = tensor(anc, encode_blocks(prep_target_state(), qutrits));

  CnotEngine engine(construction);
  for (const OpticalElement& e : rotation_interference_elements(shift))
    f = (e.kind == OpticalElement::Kind::cnot2lvl)
            ? engine.apply(f, e.modes[0], e.modes[1], e.modes[2])
            : apply_element(f, e);

  const HeraldedDecode decode = decode_blocks(f, PostSelection{blocks, {}});
  const Eigen::MatrixXcd rho = reduced_density(decode.logical, {"p", "q"});
  Eigen::VectorXcd even(4), odd(4);
  even << 1.0, 0.0, 0.0, 1.0;
  odd << 1.0, 0.0, 0.0, -1.0;
  even /= std::sqrt(2.0);
  odd /= std::sqrt(2.0);

  InterferenceResult out;
  out.p_plus = (even.adjoint() * rho * even)(0).real();
  out.p_minus = (odd.adjoint() * rho * odd)(0).real();
  out.success_probability = decode.success_probability * f.norm_sq();
  return out;
}

// Interference experiment for any group element at the photonic layer. The
// identity needs no dynamics; rotations use the entangled-ancilla chain;
// reflections run the full gate protocol.
inline InterferenceResult photonic_fusion_experiment(
    GroupElement g, const CnotConstruction* construction = nullptr) {
  if (g.is_identity()) return InterferenceResult{1.0, 0.0, 1.0};
  if (g.is_rotation()) return photonic_rotation_interference(g, construction);
  return run_photonic_tt_protocol(g.index() - 1, true, construction);
}

// ---------------------------------------------------------------------------
// Block-level photon-transfer diagnostic.

// One use of a post-selected controlled exchange, abstracted to the blocks it
// touches. A faulty input can scatter photons arbitrarily between them.
struct TransferUse {
  std::string control_block;
  std::string target_block;
};

// Whether some redistribution along the uses ends with exactly one photon in
// every block, i.e. whether naive counting at the end would accept the input.
// Reusing one control block across gates opens such paths for bad inputs;
// fresh controls close them.
inline bool naive_postselection_accepts(const std::map<std::string, int>& photons_per_block,
                                        const std::vector<TransferUse>& uses) {
  std::vector<std::string> names;
  for (const auto& [name, count] : photons_per_block) {
    names.push_back(name);
    if (count < 0)
      throw std::invalid_argument("naive_postselection_accepts: negative photon count");
  }
  const auto index_of = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
      throw std::invalid_argument("naive_postselection_accepts: unknown block '" + name + "'");
    return static_cast<int>(it - names.begin());
  };

  std::set<std::vector<int>> frontier;
  std::vector<int> start;
  for (const std::string& name : names) start.push_back(photons_per_block.at(name));
  frontier.insert(start);

  for (const TransferUse& use : uses) {
    const int c = index_of(use.control_block);
    const int t = index_of(use.target_block);
    if (c == t)
      throw std::invalid_argument("naive_postselection_accepts: use touches one block twice");
    std::set<std::vector<int>> next;
    for (const std::vector<int>& state : frontier) {
      const int total = state[c] + state[t];
      for (int k = 0; k <= total; ++k) {
        std::vector<int> moved = state;
        moved[c] = k;
        moved[t] = total - k;
        next.insert(std::move(moved));
      }
    }
    frontier = std::move(next);
  }

  const std::vector<int> accept(names.size(), 1);
  return frontier.find(accept) != frontier.end();
}

}  // namespace anyonsim
