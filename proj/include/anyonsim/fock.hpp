#pragma once

// Sparse Fock-space simulation for post-selected linear optics: occupation
// maps over named modes, beam splitters and phase shifters, a two-mode
// squeezed source, and heralded decoding back into qudit registers.

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anyonsim/hilbert.hpp"

namespace anyonsim {

class ModeSet {
public:
  ModeSet() = default;

  explicit ModeSet(std::vector<std::string> labels, int max_per_mode = 64, int max_total = 64)
      : labels_(std::move(labels)), max_per_mode_(max_per_mode), max_total_(max_total) {
    if (labels_.empty()) throw std::invalid_argument("ModeSet: no modes");
    if (max_per_mode_ < 1 || max_total_ < 1)
      throw std::invalid_argument("ModeSet: photon limits must be positive");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("ModeSet: duplicate mode label '" + labels_[i] + "'");
  }

  int num_modes() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }
  int max_per_mode() const { return max_per_mode_; }
  int max_total() const { return max_total_; }

  int index(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("ModeSet: no mode labelled '" + std::string(label) + "'");
  }

  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.labels_ == b.labels_ && a.max_per_mode_ == b.max_per_mode_ &&
           a.max_total_ == b.max_total_;
  }
  friend bool operator!=(const ModeSet& a, const ModeSet& b) { return !(a == b); }

private:
  std::vector<std::string> labels_;
  int max_per_mode_ = 64;
  int max_total_ = 64;
};

// Thrown when an operation would populate occupations beyond the declared
// limits; truncation is never silent.
class TruncationOverflow : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FockVector {
public:
  FockVector() = default;
  explicit FockVector(ModeSet modes) : modes_(std::move(modes)) {}

  static FockVector vacuum(const ModeSet& modes) {
    FockVector f(modes);
    f.amps_[std::vector<int>(modes.num_modes(), 0)] = 1.0;
    return f;
  }

  static FockVector basis(const ModeSet& modes, const std::vector<int>& occ) {
    FockVector f(modes);
    f.check_occupation(occ);
    f.amps_[occ] = 1.0;
    return f;
  }

  const ModeSet& modes() const { return modes_; }
  const std::map<std::vector<int>, cd>& amplitudes() const { return amps_; }

  cd amp(const std::vector<int>& occ) const {
    const auto it = amps_.find(occ);
    return it == amps_.end() ? cd(0.0, 0.0) : it->second;
  }

  void add_amp(const std::vector<int>& occ, cd value) {
    check_occupation(occ);
    amps_[occ] += value;
  }

  void set_amp(const std::vector<int>& occ, cd value) {
    check_occupation(occ);
    amps_[occ] = value;
  }

  double norm_sq() const {
    double acc = 0.0;
    for (const auto& [occ, a] : amps_) acc += std::norm(a);
    return acc;
  }
  double norm() const { return std::sqrt(norm_sq()); }

  FockVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("FockVector::normalized: zero vector");
    FockVector f(modes_);
    for (const auto& [occ, a] : amps_) f.amps_[occ] = a / n;
    return f;
  }

  void prune(double eps = 1e-15) {
    for (auto it = amps_.begin(); it != amps_.end();)
      it = (std::abs(it->second) <= eps) ? amps_.erase(it) : std::next(it);
  }

  void check_occupation(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != modes_.num_modes())
      throw std::invalid_argument("FockVector: occupation length does not match modes");
    int total = 0;
    for (int n : occ) {
      if (n < 0) throw std::invalid_argument("FockVector: negative occupation");
      if (n > modes_.max_per_mode())
        throw TruncationOverflow("FockVector: occupation " + std::to_string(n) +
                                 " exceeds per-mode limit " +
                                 std::to_string(modes_.max_per_mode()));
      total += n;
    }
    if (total > modes_.max_total())
      throw TruncationOverflow("FockVector: total photons " + std::to_string(total) +
                               " exceed limit " + std::to_string(modes_.max_total()));
  }

private:
  ModeSet modes_;
  std::map<std::vector<int>, cd> amps_;
};

// JSON form mirrors the sparse map: mode labels with their limits, then one
// entry per nonzero occupation tuple.
inline void to_json(nlohmann::json& j, const FockVector& f) {
  j = nlohmann::json{{"modes", f.modes().labels()},
                     {"max_per_mode", f.modes().max_per_mode()},
                     {"max_total", f.modes().max_total()},
                     {"amplitudes", nlohmann::json::array()}};
  for (const auto& [occ, amp] : f.amplitudes())
    j["amplitudes"].push_back({{"occupation", occ}, {"amp", {amp.real(), amp.imag()}}});
}

inline void from_json(const nlohmann::json& j, FockVector& f) {
  const ModeSet modes(j.at("modes").get<std::vector<std::string>>(),
                      j.at("max_per_mode").get<int>(), j.at("max_total").get<int>());
  f = FockVector(modes);
  for (const auto& item : j.at("amplitudes")) {
    const auto amp = item.at("amp");
    f.set_amp(item.at("occupation").get<std::vector<int>>(),
              cd(amp.at(0).get<double>(), amp.at(1).get<double>()));
  }
}

inline cd inner(const FockVector& a, const FockVector& b) {
  if (a.modes() != b.modes())
    throw std::invalid_argument("inner: Fock states live on different mode sets");
  cd acc = 0.0;
  for (const auto& [occ, amp] : a.amplitudes()) acc += std::conj(amp) * b.amp(occ);
  return acc;
}

inline FockVector tensor(const FockVector& a, const FockVector& b) {
  std::vector<std::string> labels = a.modes().labels();
  labels.insert(labels.end(), b.modes().labels().begin(), b.modes().labels().end());
  ModeSet modes(std::move(labels),
                std::max(a.modes().max_per_mode(), b.modes().max_per_mode()),
                a.modes().max_total() + b.modes().max_total());
  FockVector out(modes);
  for (const auto& [oa, aa] : a.amplitudes()) {
    for (const auto& [ob, ab] : b.amplitudes()) {
      std::vector<int> occ = oa;
      occ.insert(occ.end(), ob.begin(), ob.end());
      out.add_amp(occ, aa * ab);
    }
  }
  return out;
}

inline std::map<int, double> photon_number_distribution(const FockVector& f) {
  std::map<int, double> dist;
  for (const auto& [occ, a] : f.amplitudes()) {
    int total = 0;
    for (int n : occ) total += n;
    dist[total] += std::norm(a);
  }
  return dist;
}

namespace detail {

inline double factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171, 1.0);
    for (int k = 1; k < 171; ++k) t[k] = t[k - 1] * k;
    return t;
  }();
  return table.at(n);
}

inline double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace detail

// Symmetric beam splitter with reflectivity R: creation operators transform
// as a+ -> i sqrt(R) a+ + sqrt(1-R) b+ and likewise with the roles swapped.
inline FockVector apply_beam_splitter(const FockVector& f, const std::string& mode1,
                                      const std::string& mode2, double reflectivity) {
  if (reflectivity < 0.0 || reflectivity > 1.0)
    throw std::invalid_argument("apply_beam_splitter: reflectivity must lie in [0,1]");
  const int m1 = f.modes().index(mode1);
  const int m2 = f.modes().index(mode2);
  if (m1 == m2) throw std::invalid_argument("apply_beam_splitter: modes must differ");

  const cd t00 = cd(0.0, std::sqrt(reflectivity));
  const cd t01 = std::sqrt(1.0 - reflectivity);
  const cd t10 = t01;
  const cd t11 = t00;

  FockVector out(f.modes());
  for (const auto& [occ, amp] : f.amplitudes()) {
    const int n1 = occ[m1], n2 = occ[m2];
    const double in_fact = detail::factorial(n1) * detail::factorial(n2);
    for (int j = 0; j <= n1; ++j) {
      for (int k = 0; k <= n2; ++k) {
        const int p = j + k;
        const int q = n1 + n2 - p;
        const cd coeff = detail::binomial(n1, j) * detail::binomial(n2, k) *
                         std::pow(t00, j) * std::pow(t01, n1 - j) * std::pow(t10, k) *
                         std::pow(t11, n2 - k) *
                         std::sqrt(detail::factorial(p) * detail::factorial(q) / in_fact);
        if (coeff == cd(0.0, 0.0)) continue;
        std::vector<int> new_occ = occ;
        new_occ[m1] = p;
        new_occ[m2] = q;
        out.add_amp(new_occ, amp * coeff);
      }
    }
  }
  out.prune();
  return out;
}

inline FockVector apply_phase_shift(const FockVector& f, const std::string& mode, double phase) {
  const int m = f.modes().index(mode);
  FockVector out(f.modes());
  for (const auto& [occ, amp] : f.amplitudes())
    out.add_amp(occ, amp * std::polar(1.0, phase * occ[m]));
  return out;
}

inline FockVector apply_mode_swap(const FockVector& f, const std::string& mode1,
                                  const std::string& mode2) {
  const int m1 = f.modes().index(mode1);
  const int m2 = f.modes().index(mode2);
  FockVector out(f.modes());
  for (const auto& [occ, amp] : f.amplitudes()) {
    std::vector<int> new_occ = occ;
    std::swap(new_occ[m1], new_occ[m2]);
    out.add_amp(new_occ, amp);
  }
  return out;
}

// Post-selected two-photon gate in its ideal action on the computational
// subspace: when exactly one photon sits in the control mode, the two target
// modes exchange their occupations. A Fock-basis permutation, so photon
// number is conserved and no heralding is consumed here.
inline FockVector apply_cnot2lvl_fock(const FockVector& f, const std::string& control,
                                      const std::string& target0, const std::string& target1) {
  const int c = f.modes().index(control);
  const int t0 = f.modes().index(target0);
  const int t1 = f.modes().index(target1);
  if (c == t0 || c == t1 || t0 == t1)
    throw std::invalid_argument("apply_cnot2lvl_fock: modes must be distinct");
  FockVector out(f.modes());
  for (const auto& [occ, amp] : f.amplitudes()) {
    std::vector<int> new_occ = occ;
    if (occ[c] == 1) std::swap(new_occ[t0], new_occ[t1]);
    out.add_amp(new_occ, amp);
  }
  return out;
}

// Two-mode squeezed source truncated at n_max photon pairs. Amplitudes are
// exactly sqrt(1-lambda^2) lambda^n, so the state is left unnormalized: the
// missing weight lambda^(2(n_max+1)) is the reported truncation deficit.
inline FockVector spdc_state(double lambda, int n_max, const std::string& signal,
                             const std::string& idler) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("spdc_state: lambda must lie in [0,1)");
  if (n_max < 1) throw std::invalid_argument("spdc_state: n_max must be at least 1");
  FockVector f(ModeSet({signal, idler}, n_max, 2 * n_max));
  const double base = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n <= n_max; ++n) f.set_amp({n, n}, base * std::pow(lambda, n));
  return f;
}

// ---------------------------------------------------------------------------
// Rail blocks: one photon spread over d modes encodes a d-level site.

struct BlockSpec {
  std::string name;                // becomes the register site label
  std::vector<std::string> rails;  // rail k carries logical level k
};

// Accept patterns with exactly one photon per block and none elsewhere.
struct PostSelection {
  std::vector<BlockSpec> blocks;
  std::vector<std::string> vacuum;
};

namespace detail {

inline void check_coverage(const PostSelection& sel, const ModeSet& modes) {
  std::map<std::string, int> seen;
  for (const BlockSpec& b : sel.blocks) {
    if (b.rails.empty()) throw std::invalid_argument("PostSelection: empty block");
    for (const std::string& r : b.rails) seen[r] += 1;
  }
  for (const std::string& v : sel.vacuum) seen[v] += 1;
  for (const std::string& label : modes.labels()) {
    const auto it = seen.find(label);
    if (it == seen.end())
      throw std::invalid_argument("PostSelection: mode '" + label + "' is not covered");
    if (it->second != 1)
      throw std::invalid_argument("PostSelection: mode '" + label + "' is listed twice");
    seen.erase(it);
  }
  if (!seen.empty())
    throw std::invalid_argument("PostSelection: unknown mode '" + seen.begin()->first + "'");
}

}  // namespace detail

inline bool pattern_accepts(const PostSelection& sel, const ModeSet& modes,
                            const std::vector<int>& occ) {
  for (const std::string& v : sel.vacuum)
    if (occ[modes.index(v)] != 0) return false;
  for (const BlockSpec& b : sel.blocks) {
    int total = 0;
    bool single = true;
    for (const std::string& r : b.rails) {
      const int n = occ[modes.index(r)];
      total += n;
      if (n > 1) single = false;
    }
    if (total != 1 || !single) return false;
  }
  return true;
}

// Acceptance probability of the pattern, relative to the state's own norm so
// that unnormalized (truncated) inputs are handled consistently.
inline double herald_probability(const FockVector& f, const PostSelection& sel) {
  detail::check_coverage(sel, f.modes());
  double accepted = 0.0;
  for (const auto& [occ, amp] : f.amplitudes())
    if (pattern_accepts(sel, f.modes(), occ)) accepted += std::norm(amp);
  const double total = f.norm_sq();
  if (total == 0.0) throw std::invalid_argument("herald_probability: zero state");
  return accepted / total;
}

struct HeraldedDecode {
  double success_probability = 0.0;
  StateVector logical;  // normalized when success_probability > 0
};

// Conditions on the acceptance pattern and reads the photon positions back
// as a qudit register state. Single-rail blocks act as pure heralds and do
// not appear in the register; at least one block must carry information.
inline HeraldedDecode decode_blocks(const FockVector& f, const PostSelection& sel) {
  detail::check_coverage(sel, f.modes());

  std::vector<const BlockSpec*> decoded;
  std::vector<int> dims;
  std::vector<std::string> labels;
  for (const BlockSpec& b : sel.blocks) {
    if (b.rails.size() < 2) continue;
    decoded.push_back(&b);
    dims.push_back(static_cast<int>(b.rails.size()));
    labels.push_back(b.name);
  }
  if (decoded.empty())
    throw std::invalid_argument(
        "decode_blocks: no block with two or more rails; use herald_probability");
  QuditRegister reg(dims, labels);

  StateVector logical = StateVector::zero(reg);
  double accepted = 0.0;
  for (const auto& [occ, amp] : f.amplitudes()) {
    if (!pattern_accepts(sel, f.modes(), occ)) continue;
    accepted += std::norm(amp);
    std::vector<int> multi(decoded.size(), 0);
    for (std::size_t k = 0; k < decoded.size(); ++k)
      for (std::size_t r = 0; r < decoded[k]->rails.size(); ++r)
        if (occ[f.modes().index(decoded[k]->rails[r])] == 1) multi[k] = static_cast<int>(r);
    logical.amp(multi) += amp;
  }

  const double total = f.norm_sq();
  if (total == 0.0) throw std::invalid_argument("decode_blocks: zero state");
  HeraldedDecode out;
  out.success_probability = accepted / total;
  out.logical = (accepted > 0.0) ? logical.normalized() : logical;
  return out;
}

// Writes a register state into rail blocks, one photon per block.
inline FockVector encode_blocks(const StateVector& s, const std::vector<BlockSpec>& blocks,
                                int max_per_mode = 64) {
  if (static_cast<int>(blocks.size()) != s.reg().num_sites())
    throw std::invalid_argument("encode_blocks: need one block per register site");
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (static_cast<int>(blocks[k].rails.size()) != s.reg().dim(static_cast<int>(k)))
      throw std::invalid_argument("encode_blocks: rail count of block '" + blocks[k].name +
                                  "' does not match the site dimension");
    labels.insert(labels.end(), blocks[k].rails.begin(), blocks[k].rails.end());
  }
  ModeSet modes(std::move(labels), max_per_mode,
                std::max<int>(static_cast<int>(blocks.size()), max_per_mode));
  FockVector f(modes);
  for (int idx = 0; idx < s.reg().total_dim(); ++idx) {
    const cd amp = s.amplitudes()(idx);
    if (amp == cd(0.0, 0.0)) continue;
    std::vector<int> occ(modes.num_modes(), 0);
    const auto multi = s.reg().unflatten(idx);
    for (std::size_t k = 0; k < blocks.size(); ++k)
      occ[modes.index(blocks[k].rails[multi[k]])] = 1;
    f.set_amp(occ, amp);
  }
  return f;
}

}  // namespace anyonsim
