#pragma once

// Dense state vectors and local operators over heterogeneous tensor-product
// registers. Index convention throughout: row-major mixed radix with site 0
// the most significant digit, for in-memory layout and serialization alike.

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace anyonsim {

using cd = std::complex<double>;

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

class QuditRegister {
public:
  QuditRegister() = default;

  QuditRegister(std::vector<int> dims, std::vector<std::string> labels)
      : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (dims_.empty()) throw std::invalid_argument("QuditRegister: empty register");
    if (dims_.size() != labels_.size())
      throw std::invalid_argument("QuditRegister: dims/labels length mismatch");
    for (int d : dims_)
      if (d < 2) throw std::invalid_argument("QuditRegister: site dimension must be >= 2");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("QuditRegister: duplicate site label '" + labels_[i] + "'");

    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
      strides_[i] = strides_[i + 1] * dims_[i + 1];
    total_ = strides_[0] * dims_[0];
  }

  int num_sites() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return total_; }
  int dim(int site) const { return dims_.at(site); }
  int stride(int site) const { return strides_.at(site); }
  const std::string& label(int site) const { return labels_.at(site); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }

  int site_index(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("QuditRegister: no site labelled '" + std::string(label) + "'");
  }

  int flatten(const std::vector<int>& multi) const {
    if (static_cast<int>(multi.size()) != num_sites())
      throw std::invalid_argument("QuditRegister::flatten: wrong number of digits");
    int idx = 0;
    for (int s = 0; s < num_sites(); ++s) {
      if (multi[s] < 0 || multi[s] >= dims_[s])
        throw std::out_of_range("QuditRegister::flatten: digit out of range");
      idx += multi[s] * strides_[s];
    }
    return idx;
  }

  int digit(int index, int site) const { return (index / strides_.at(site)) % dims_.at(site); }

  std::vector<int> unflatten(int index) const {
    if (index < 0 || index >= total_)
      throw std::out_of_range("QuditRegister::unflatten: index out of range");
    std::vector<int> multi(num_sites());
    for (int s = 0; s < num_sites(); ++s) multi[s] = digit(index, s);
    return multi;
  }

  friend bool operator==(const QuditRegister& a, const QuditRegister& b) {
    return a.dims_ == b.dims_ && a.labels_ == b.labels_;
  }
  friend bool operator!=(const QuditRegister& a, const QuditRegister& b) { return !(a == b); }

private:
  std::vector<int> dims_;
  std::vector<std::string> labels_;
  std::vector<int> strides_;
  int total_ = 0;
};

// State vector with a declared normalization flag. The flag records intent;
// consumers that require normalized input check the numerical norm as well.
class StateVector {
public:
  StateVector() = default;

  StateVector(QuditRegister reg, Eigen::VectorXcd amplitudes, bool normalized = false)
      : reg_(std::move(reg)), amps_(std::move(amplitudes)), normalized_(normalized) {
    if (amps_.size() != reg_.total_dim())
      throw std::invalid_argument("StateVector: amplitude count does not match register");
  }

  static StateVector zero(const QuditRegister& reg) {
    return StateVector(reg, Eigen::VectorXcd::Zero(reg.total_dim()), false);
  }

  static StateVector basis_state(const QuditRegister& reg, const std::vector<int>& multi) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(reg.total_dim());
    v(reg.flatten(multi)) = 1.0;
    return StateVector(reg, std::move(v), true);
  }

  const QuditRegister& reg() const { return reg_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  cd amp(const std::vector<int>& multi) const { return amps_(reg_.flatten(multi)); }
  cd& amp(const std::vector<int>& multi) { return amps_(reg_.flatten(multi)); }

  double norm() const { return amps_.norm(); }
  bool normalized_flag() const { return normalized_; }
  void set_normalized_flag(bool f) { normalized_ = f; }

  bool is_normalized(double tol = 1e-9) const { return std::abs(norm() - 1.0) <= tol; }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("StateVector::normalized: zero vector");
    return StateVector(reg_, amps_ / n, true);
  }

private:
  QuditRegister reg_;
  Eigen::VectorXcd amps_;
  bool normalized_ = false;
};

// Operator supported on a subset of sites, given in the declared site order
// with the first listed site as the most significant factor.
struct LocalOperator {
  std::vector<std::string> sites;
  Eigen::MatrixXcd matrix;
};

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<int> dims = a.reg().dims();
  std::vector<std::string> labels = a.reg().labels();
  dims.insert(dims.end(), b.reg().dims().begin(), b.reg().dims().end());
  labels.insert(labels.end(), b.reg().labels().begin(), b.reg().labels().end());
  QuditRegister reg(std::move(dims), std::move(labels));  // rejects duplicate labels

  Eigen::VectorXcd amps(reg.total_dim());
  const int nb = b.reg().total_dim();
  for (int i = 0; i < a.reg().total_dim(); ++i)
    for (int j = 0; j < nb; ++j) amps(i * nb + j) = a.amplitudes()(i) * b.amplitudes()(j);
  return StateVector(std::move(reg), std::move(amps),
                     a.normalized_flag() && b.normalized_flag());
}

inline StateVector apply_local(const LocalOperator& op, const StateVector& state) {
  const QuditRegister& reg = state.reg();
  const int n_op = static_cast<int>(op.sites.size());
  if (n_op == 0) throw std::invalid_argument("apply_local: operator touches no sites");

  std::vector<int> sites(n_op), sdims(n_op), sstrides(n_op);
  int op_dim = 1;
  for (int k = 0; k < n_op; ++k) {
    sites[k] = reg.site_index(op.sites[k]);
    sdims[k] = reg.dim(sites[k]);
    sstrides[k] = reg.stride(sites[k]);
    op_dim *= sdims[k];
  }
  for (int i = 0; i < n_op; ++i)
    for (int j = i + 1; j < n_op; ++j)
      if (sites[i] == sites[j])
        throw std::invalid_argument("apply_local: repeated site '" + op.sites[i] + "'");
  if (op.matrix.rows() != op_dim || op.matrix.cols() != op_dim)
    throw std::invalid_argument("apply_local: matrix is " + std::to_string(op.matrix.rows()) +
                                "x" + std::to_string(op.matrix.cols()) + ", expected dimension " +
                                std::to_string(op_dim));

  // Decompose each full index into (operator sub-index, untouched rest) and
  // contract one matrix column per input amplitude.
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(reg.total_dim());
  std::vector<int> digits(n_op);
  for (int idx = 0; idx < reg.total_dim(); ++idx) {
    const cd x = state.amplitudes()(idx);
    if (x == cd(0.0, 0.0)) continue;
    int sub = 0;
    int rest = idx;
    for (int k = 0; k < n_op; ++k) {
      const int d = (idx / sstrides[k]) % sdims[k];
      sub = sub * sdims[k] + d;
      rest -= d * sstrides[k];
    }
    for (int row = 0; row < op_dim; ++row) {
      const cd m = op.matrix(row, sub);
      if (m == cd(0.0, 0.0)) continue;
      int target = rest;
      int r = row;
      for (int k = n_op - 1; k >= 0; --k) {
        target += (r % sdims[k]) * sstrides[k];
        r /= sdims[k];
      }
      out(target) += m * x;
    }
  }
  return StateVector(reg, std::move(out), false);
}

// Inner product <a|b>, conjugate-linear in the first argument.
inline cd inner(const StateVector& a, const StateVector& b) {
  if (a.reg() != b.reg())
    throw std::invalid_argument("inner: states live on different registers");
  return a.amplitudes().dot(b.amplitudes());
}

namespace detail {

inline void require_normalized(const StateVector& s, const char* who) {
  if (!s.is_normalized())
    throw std::invalid_argument(std::string(who) + ": state is not normalized (norm " +
                                std::to_string(s.norm()) + ")");
}

}  // namespace detail

// Born distribution over the joint basis of the listed sites, in declared
// order with the first site most significant.
inline Eigen::VectorXd joint_distribution(const StateVector& state,
                                          const std::vector<std::string>& site_labels) {
  detail::require_normalized(state, "site_distribution");
  const QuditRegister& reg = state.reg();
  const int n = static_cast<int>(site_labels.size());
  std::vector<int> sites(n), sdims(n), sstrides(n);
  int joint = 1;
  for (int k = 0; k < n; ++k) {
    sites[k] = reg.site_index(site_labels[k]);
    sdims[k] = reg.dim(sites[k]);
    sstrides[k] = reg.stride(sites[k]);
    joint *= sdims[k];
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(joint);
  for (int idx = 0; idx < reg.total_dim(); ++idx) {
    int sub = 0;
    for (int k = 0; k < n; ++k) sub = sub * sdims[k] + (idx / sstrides[k]) % sdims[k];
    p(sub) += std::norm(state.amplitudes()(idx));
  }
  return p;
}

inline Eigen::VectorXd site_distribution(const StateVector& state, std::string_view label) {
  return joint_distribution(state, {std::string(label)});
}

// Reduced density matrix of the listed sites, tracing out the rest.
inline Eigen::MatrixXcd reduced_density(const StateVector& state,
                                        const std::vector<std::string>& site_labels) {
  detail::require_normalized(state, "reduced_density");
  const QuditRegister& reg = state.reg();
  const int n = static_cast<int>(site_labels.size());
  std::vector<int> sites(n), sdims(n), sstrides(n);
  int joint = 1;
  for (int k = 0; k < n; ++k) {
    sites[k] = reg.site_index(site_labels[k]);
    sdims[k] = reg.dim(sites[k]);
    sstrides[k] = reg.stride(sites[k]);
    joint *= sdims[k];
  }
  // Group amplitudes by the untouched remainder of the index.
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(joint, joint);
  std::vector<std::pair<int, int>> decomposed(reg.total_dim());
  for (int idx = 0; idx < reg.total_dim(); ++idx) {
    int sub = 0;
    int rest = idx;
    for (int k = 0; k < n; ++k) {
      const int d = (idx / sstrides[k]) % sdims[k];
      sub = sub * sdims[k] + d;
      rest -= d * sstrides[k];
    }
    decomposed[idx] = {sub, rest};
  }
  for (int i = 0; i < reg.total_dim(); ++i) {
    const cd ai = state.amplitudes()(i);
    if (ai == cd(0.0, 0.0)) continue;
    for (int j = 0; j < reg.total_dim(); ++j) {
      if (decomposed[i].second != decomposed[j].second) continue;
      const cd aj = state.amplitudes()(j);
      if (aj == cd(0.0, 0.0)) continue;
      rho(decomposed[i].first, decomposed[j].first) += ai * std::conj(aj);
    }
  }
  return rho;
}

// Projects one site onto the (normalized) single-site vector bra. Returns the
// Born probability and the post-measurement state on the full register, still
// unnormalized: its squared norm equals the probability.
inline std::pair<double, StateVector> project_site(const StateVector& state,
                                                   const std::string& site_label,
                                                   const Eigen::VectorXcd& bra) {
  const QuditRegister& reg = state.reg();
  const int site = reg.site_index(site_label);
  const int d = reg.dim(site);
  if (bra.size() != d)
    throw std::invalid_argument("project_site: projector length does not match site dimension");
  if (std::abs(bra.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("project_site: projector vector is not normalized");

  // |phi><phi| on the chosen site.
  Eigen::MatrixXcd proj = bra * bra.adjoint();
  StateVector projected = apply_local(LocalOperator{{site_label}, proj}, state);
  const double n = projected.norm();
  return {n * n, projected};
}

// Reorders the register sites into the given label order.
inline StateVector permute_sites(const StateVector& state,
                                 const std::vector<std::string>& new_order) {
  const QuditRegister& reg = state.reg();
  if (static_cast<int>(new_order.size()) != reg.num_sites())
    throw std::invalid_argument("permute_sites: wrong number of labels");
  std::vector<int> old_site(new_order.size());
  std::vector<int> dims(new_order.size());
  for (std::size_t k = 0; k < new_order.size(); ++k) {
    old_site[k] = reg.site_index(new_order[k]);
    dims[k] = reg.dim(old_site[k]);
  }
  QuditRegister out_reg(dims, new_order);
  Eigen::VectorXcd amps(out_reg.total_dim());
  std::vector<int> multi(reg.num_sites());
  for (int idx = 0; idx < out_reg.total_dim(); ++idx) {
    for (int k = 0; k < out_reg.num_sites(); ++k)
      multi[old_site[k]] = out_reg.digit(idx, k);
    amps(idx) = state.amplitudes()(reg.flatten(multi));
  }
  return StateVector(std::move(out_reg), std::move(amps), state.normalized_flag());
}

inline void to_json(nlohmann::json& j, const StateVector& s) {
  nlohmann::json amps = nlohmann::json::array();
  for (int i = 0; i < s.reg().total_dim(); ++i)
    amps.push_back({s.amplitudes()(i).real(), s.amplitudes()(i).imag()});
  j = nlohmann::json{{"dims", s.reg().dims()},
                     {"labels", s.reg().labels()},
                     {"amplitudes", std::move(amps)},
                     {"normalized", s.normalized_flag()}};
}

inline void from_json(const nlohmann::json& j, StateVector& s) {
  QuditRegister reg(j.at("dims").get<std::vector<int>>(),
                    j.at("labels").get<std::vector<std::string>>());
  const auto& amps = j.at("amplitudes");
  if (static_cast<int>(amps.size()) != reg.total_dim())
    throw std::invalid_argument("StateVector: amplitude count does not match register");
  Eigen::VectorXcd v(reg.total_dim());
  for (int i = 0; i < reg.total_dim(); ++i)
    v(i) = cd(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
  s = StateVector(std::move(reg), std::move(v), j.at("normalized").get<bool>());
}

}  // namespace anyonsim
