#pragma once

// The symmetric group S3 and its representation theory: element arithmetic,
// the three irreducible representations with their characters, conjugacy
// classes, and the left/right regular permutation actions on C^6.

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace anyonsim {

using cd = std::complex<double>;

class GroupElement;
GroupElement multiply(GroupElement a, GroupElement b);
GroupElement inverse(GroupElement a);

// Fixed basis order: 0:e  1:t0  2:t1  3:t2  4:c+  5:c-
// t_k is the reflection fixing k, c+/c- are the three-cycles.
class GroupElement {
public:
  static constexpr int order = 6;

  constexpr GroupElement() = default;

  static GroupElement from_index(int i) {
    if (i < 0 || i >= order)
      throw std::out_of_range("GroupElement::from_index: index " + std::to_string(i));
    GroupElement g;
    g.idx_ = i;
    return g;
  }

  static GroupElement from_token(std::string_view token) {
    for (int i = 0; i < order; ++i)
      if (token == tokens()[i]) return from_index(i);
    throw std::invalid_argument("GroupElement::from_token: unknown token '" +
                                std::string(token) + "'");
  }

  static GroupElement identity() { return {}; }

  static std::array<GroupElement, order> all() {
    std::array<GroupElement, order> out;
    for (int i = 0; i < order; ++i) out[i] = from_index(i);
    return out;
  }

  constexpr int index() const { return idx_; }
  const std::string& token() const { return tokens()[idx_]; }

  bool is_identity() const { return idx_ == 0; }
  bool is_reflection() const { return idx_ >= 1 && idx_ <= 3; }
  bool is_rotation() const { return idx_ >= 4; }

  friend bool operator==(GroupElement a, GroupElement b) { return a.idx_ == b.idx_; }
  friend bool operator!=(GroupElement a, GroupElement b) { return a.idx_ != b.idx_; }
  friend bool operator<(GroupElement a, GroupElement b) { return a.idx_ < b.idx_; }
  friend GroupElement operator*(GroupElement a, GroupElement b) { return multiply(a, b); }

private:
  static const std::array<std::string, order>& tokens() {
    static const std::array<std::string, order> t = {"e", "t0", "t1", "t2", "c+", "c-"};
    return t;
  }

  int idx_ = 0;
};

namespace detail {

// Two-dimensional irrep: t_k -> sigma_x exp(i 2pi/3 k sigma_z), c+- -> exp(+-i 2pi/3 sigma_z).
inline const std::array<Eigen::Matrix2cd, 6>& two_dim_matrices() {
  static const std::array<Eigen::Matrix2cd, 6> mats = [] {
    constexpr double w = 2.0 * std::numbers::pi / 3.0;
    auto expz = [](double a) {
      Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
      m(0, 0) = std::polar(1.0, a);
      m(1, 1) = std::polar(1.0, -a);
      return m;
    };
    Eigen::Matrix2cd sx;
    sx << 0.0, 1.0, 1.0, 0.0;
    std::array<Eigen::Matrix2cd, 6> out;
    out[0] = Eigen::Matrix2cd::Identity();
    for (int k = 0; k < 3; ++k) out[1 + k] = sx * expz(w * k);
    out[4] = expz(w);
    out[5] = expz(-w);
    return out;
  }();
  return mats;
}

// The two-dimensional irrep is faithful, so the multiplication table follows
// from matching matrix products against the six representation matrices.
inline const std::array<std::array<int, 6>, 6>& product_table() {
  static const std::array<std::array<int, 6>, 6> table = [] {
    const auto& r2 = two_dim_matrices();
    std::array<std::array<int, 6>, 6> t{};
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const Eigen::Matrix2cd p = r2[i] * r2[j];
        int match = -1;
        for (int k = 0; k < 6; ++k) {
          if ((p - r2[k]).cwiseAbs().maxCoeff() < 1e-9) {
            match = k;
            break;
          }
        }
        if (match < 0) throw std::logic_error("S3 product table: no matching element");
        t[i][j] = match;
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail

inline GroupElement multiply(GroupElement a, GroupElement b) {
  return GroupElement::from_index(detail::product_table()[a.index()][b.index()]);
}

inline GroupElement inverse(GroupElement a) {
  for (GroupElement b : GroupElement::all())
    if (multiply(a, b).is_identity()) return b;
  throw std::logic_error("inverse: group table is broken");
}

inline GroupElement conjugate(GroupElement g, GroupElement by) {
  return by * g * inverse(by);
}

// Conjugacy class of g, in basis order and without duplicates.
inline std::vector<GroupElement> conjugacy_class(GroupElement g) {
  std::array<bool, GroupElement::order> seen{};
  for (GroupElement a : GroupElement::all()) seen[conjugate(g, a).index()] = true;
  std::vector<GroupElement> out;
  for (int i = 0; i < GroupElement::order; ++i)
    if (seen[i]) out.push_back(GroupElement::from_index(i));
  return out;
}

enum class IrrepLabel { trivial, sign, two_dim };

// Unitary irreducible representation. Matrices are 1x1 for trivial/sign and
// 2x2 for the faithful representation.
class Irrep {
public:
  static const Irrep& trivial() {
    static const Irrep r(IrrepLabel::trivial);
    return r;
  }
  static const Irrep& sign() {
    static const Irrep r(IrrepLabel::sign);
    return r;
  }
  static const Irrep& two_dim() {
    static const Irrep r(IrrepLabel::two_dim);
    return r;
  }

  static const std::array<const Irrep*, 3>& all() {
    static const std::array<const Irrep*, 3> v = {&trivial(), &sign(), &two_dim()};
    return v;
  }

  static const Irrep& from_name(std::string_view name) {
    for (const Irrep* r : all())
      if (name == r->name()) return *r;
    throw std::invalid_argument("Irrep::from_name: unknown irrep '" + std::string(name) + "'");
  }

  IrrepLabel label() const { return label_; }
  int dim() const { return static_cast<int>(mats_[0].rows()); }

  const std::string& name() const {
    static const std::array<std::string, 3> names = {"trivial", "sign", "two_dim"};
    return names[static_cast<int>(label_)];
  }

  const Eigen::MatrixXcd& matrix(GroupElement g) const { return mats_[g.index()]; }
  cd character(GroupElement g) const { return mats_[g.index()].trace(); }

  friend bool operator==(const Irrep& a, const Irrep& b) { return a.label_ == b.label_; }

private:
  explicit Irrep(IrrepLabel label) : label_(label) {
    switch (label) {
      case IrrepLabel::trivial:
        for (auto& m : mats_) m = Eigen::MatrixXcd::Ones(1, 1);
        break;
      case IrrepLabel::sign:
        // -1 on the reflections, +1 on the rotations and the identity.
        for (int i = 0; i < 6; ++i) {
          mats_[i] = Eigen::MatrixXcd::Ones(1, 1);
          if (i >= 1 && i <= 3) mats_[i] *= -1.0;
        }
        break;
      case IrrepLabel::two_dim:
        for (int i = 0; i < 6; ++i) mats_[i] = detail::two_dim_matrices()[i];
        break;
    }
  }

  IrrepLabel label_;
  std::array<Eigen::MatrixXcd, 6> mats_;
};

enum class Side { left, right };

// Regular permutation actions on C^6: left sends |x> to |gx>, right sends
// |x> to |xg>. They commute for any pair of group elements.
inline Eigen::MatrixXcd regular_matrix(Side side, GroupElement g) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(6, 6);
  for (GroupElement x : GroupElement::all()) {
    const GroupElement y = (side == Side::left) ? g * x : x * g;
    m(y.index(), x.index()) = 1.0;
  }
  return m;
}

// Multiplicity of the trivial irrep in R1 x R2 x R3, by character averaging.
// This counts the independent invariant tensors of the triple.
inline int trivial_multiplicity(const Irrep& r1, const Irrep& r2, const Irrep& r3) {
  cd acc = 0.0;
  for (GroupElement g : GroupElement::all())
    acc += r1.character(g) * r2.character(g) * r3.character(g);
  acc /= 6.0;
  const int n = static_cast<int>(std::lround(acc.real()));
  if (std::abs(acc - cd(n, 0.0)) > 1e-9)
    throw std::logic_error("trivial_multiplicity: non-integer character average");
  return n;
}

// Multiplicity of rp inside conj(r) x r; nonzero exactly when a charge of
// type r can radiate or absorb a probe charge of type rp.
inline int fusion_multiplicity(const Irrep& r, const Irrep& rp) {
  cd acc = 0.0;
  for (GroupElement g : GroupElement::all())
    acc += std::norm(r.character(g)) * std::conj(rp.character(g));
  acc /= 6.0;
  const int n = static_cast<int>(std::lround(acc.real()));
  if (std::abs(acc - cd(n, 0.0)) > 1e-9)
    throw std::logic_error("fusion_multiplicity: non-integer character average");
  return n;
}

}  // namespace anyonsim
