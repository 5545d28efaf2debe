#pragma once

// Single-triangle S3 gauge model: three group-valued edges around one face.
// Provides the ground state, local gauge transformations with their vertex
// projectors, the face projector, diagonal charge (ribbon) operators,
// charge-pair states, fusion amplitudes and charge-probe expectations.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anyonsim/hilbert.hpp"
#include "anyonsim/s3.hpp"

namespace anyonsim {

enum class Vertex { v1, v2, v3 };
enum class Edge { e1, e2, e3 };

inline const std::string& vertex_name(Vertex v) {
  static const std::array<std::string, 3> names = {"v1", "v2", "v3"};
  return names[static_cast<int>(v)];
}

inline Vertex vertex_from_name(std::string_view name) {
  for (Vertex v : {Vertex::v1, Vertex::v2, Vertex::v3})
    if (name == vertex_name(v)) return v;
  throw std::invalid_argument("vertex_from_name: unknown vertex '" + std::string(name) + "'");
}

// Edge k lives on register site label "k". Orientations: e1 = v1->v2,
// e2 = v1->v3, e3 = v2->v3.
inline const std::string& edge_site(Edge e) {
  static const std::array<std::string, 3> labels = {"1", "2", "3"};
  return labels[static_cast<int>(e)];
}

inline Vertex edge_tail(Edge e) { return e == Edge::e3 ? Vertex::v2 : Vertex::v1; }
inline Vertex edge_head(Edge e) { return e == Edge::e1 ? Vertex::v2 : Vertex::v3; }

// Ordered vertex pair (tail, head) of some edge; the pair a charge state
// lives on.
struct ChargePair {
  Vertex from;
  Vertex to;
};

inline Edge connecting_edge(ChargePair p) {
  for (Edge e : {Edge::e1, Edge::e2, Edge::e3})
    if (edge_tail(e) == p.from && edge_head(e) == p.to) return e;
  throw std::invalid_argument("connecting_edge: vertices " + vertex_name(p.from) + "," +
                              vertex_name(p.to) + " are not the tail/head of any edge");
}

inline QuditRegister plaquette_register() {
  return QuditRegister({6, 6, 6}, {"1", "2", "3"});
}

// Plaquette plus one ancillary qubit used for controlled transformations.
inline QuditRegister plaquette_register_with_ancilla() {
  return QuditRegister({6, 6, 6, 2}, {"1", "2", "3", "anc"});
}

// Equal superposition over flux-free configurations (g1, g1 g3, g3); the
// unique state fixed by every vertex projector and the face projector.
inline StateVector ground_state() {
  StateVector s = StateVector::zero(plaquette_register());
  for (GroupElement g1 : GroupElement::all())
    for (GroupElement g3 : GroupElement::all())
      s.amp({g1.index(), (g1 * g3).index(), g3.index()}) = 1.0 / 6.0;
  s.set_normalized_flag(true);
  return s;
}

// Gauge transformation at a vertex: left multiplication on outgoing edges,
// right multiplication by the inverse on incoming edges.
inline LocalOperator gauge_transform(GroupElement h, Vertex v) {
  const Eigen::MatrixXcd l = regular_matrix(Side::left, h);
  const Eigen::MatrixXcd r = regular_matrix(Side::right, inverse(h));
  switch (v) {
    case Vertex::v1: return {{"1", "2"}, kron(l, l)};
    case Vertex::v2: return {{"1", "3"}, kron(r, l)};
    case Vertex::v3: return {{"2", "3"}, kron(r, r)};
  }
  throw std::logic_error("gauge_transform: bad vertex");
}

// Group average of the gauge transformations at v; a rank-deficient
// orthogonal projector.
inline LocalOperator vertex_projector(Vertex v) {
  LocalOperator acc = gauge_transform(GroupElement::identity(), v);
  acc.matrix.setZero();
  for (GroupElement g : GroupElement::all()) acc.matrix += gauge_transform(g, v).matrix;
  acc.matrix /= 6.0;
  return acc;
}

// Projector onto configurations whose oriented boundary product is the
// identity. Walking v1 -> v2 -> v3 -> v1 crosses e1 and e3 along their
// orientation and e2 against it; composing the crossed labels in walk order
// gives g1 g3 g2^{-1} = e, i.e. g2 = g1 g3.
inline LocalOperator face_projector() {
  const QuditRegister reg = plaquette_register();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(reg.total_dim(), reg.total_dim());
  for (int idx = 0; idx < reg.total_dim(); ++idx) {
    const auto digits = reg.unflatten(idx);
    const GroupElement g1 = GroupElement::from_index(digits[0]);
    const GroupElement g2 = GroupElement::from_index(digits[1]);
    const GroupElement g3 = GroupElement::from_index(digits[2]);
    if (g1 * g3 * inverse(g2) == GroupElement::identity()) m(idx, idx) = 1.0;
  }
  return {{"1", "2", "3"}, std::move(m)};
}

// Diagonal charge-detecting operator on one edge, eigenvalue conj(chi_R(g))
// on edge value g. Hermitian for S3 since all characters are real.
inline LocalOperator ribbon_operator(const Irrep& r, Edge e) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(6, 6);
  for (GroupElement g : GroupElement::all())
    m(g.index(), g.index()) = std::conj(r.character(g));
  return {{edge_site(e)}, std::move(m)};
}

// -sum_v A_v - B_f expectation; the ground state sits at -4.
inline double stabilizer_energy(const StateVector& s) {
  detail::require_normalized(s, "stabilizer_energy");
  double energy = 0.0;
  for (Vertex v : {Vertex::v1, Vertex::v2, Vertex::v3})
    energy -= inner(s, apply_local(vertex_projector(v), s)).real();
  energy -= inner(s, apply_local(face_projector(), s)).real();
  return energy;
}

// Charge pair in irrep r with internal matrix m, sitting at the endpoints of
// the connecting edge. Amplitudes live on flux-free configurations only and
// are tr{m r(edge value)^dagger}/6. Normalization requires |m|_F^2 = dim r.
inline StateVector charge_pair_state(const Irrep& r, const Eigen::MatrixXcd& m, ChargePair pair) {
  if (m.rows() != r.dim() || m.cols() != r.dim())
    throw std::invalid_argument("charge_pair_state: matrix shape does not match irrep");
  if (std::abs(m.squaredNorm() - r.dim()) > 1e-9)
    throw std::invalid_argument("charge_pair_state: |m|_F^2 must equal the irrep dimension");

  const Edge edge = connecting_edge(pair);
  StateVector s = StateVector::zero(plaquette_register());
  for (GroupElement g1 : GroupElement::all()) {
    for (GroupElement g3 : GroupElement::all()) {
      const GroupElement g2 = g1 * g3;
      GroupElement label = g1;
      if (edge == Edge::e2) label = g2;
      if (edge == Edge::e3) label = g3;
      const cd amp = (m * r.matrix(label).adjoint()).trace() / 6.0;
      s.amp({g1.index(), g2.index(), g3.index()}) = amp;
    }
  }
  s.set_normalized_flag(true);
  return s;
}

// Pure charge pair |1_r>, internal matrix proportional to the identity.
inline StateVector charge_pair_state(const Irrep& r, ChargePair pair) {
  return charge_pair_state(r, Eigen::MatrixXcd::Identity(r.dim(), r.dim()), pair);
}

// ---------------------------------------------------------------------------
// Fusion amplitude F = <1_r| T_h(vertex) |1_r> by three routes that must
// agree: the closed form tr{r(h)}/dim, a regular-representation trace, and a
// direct state-vector overlap.

inline cd fusion_amplitude(const Irrep& r, GroupElement h) {
  return r.character(h) / static_cast<double>(r.dim());
}

inline cd fusion_amplitude_ground_trace(const Irrep& r, GroupElement h) {
  const Eigen::MatrixXcd w = ribbon_operator(r, Edge::e2).matrix;
  const Eigen::MatrixXcd l = regular_matrix(Side::left, h);
  const Eigen::MatrixXcd w_h = l * w * l.adjoint();
  return (w * w_h).trace() / 6.0;
}

inline cd fusion_amplitude_overlap(const Irrep& r, GroupElement h) {
  const ChargePair pair{Vertex::v1, Vertex::v3};
  const StateVector base = charge_pair_state(r, pair);
  const StateVector moved = apply_local(gauge_transform(h, Vertex::v1), base);
  return inner(base, moved);
}

enum class ProbeBasis { x, y };

inline ProbeBasis probe_basis_from_name(std::string_view name) {
  if (name == "x") return ProbeBasis::x;
  if (name == "y") return ProbeBasis::y;
  throw std::invalid_argument("probe_basis_from_name: unknown basis '" + std::string(name) + "'");
}

// Interference experiment: an ancilla qubit in (|0>+|1>)/sqrt(2) controls
// T_h(v) on a |1_2> charge pair; measuring the ancilla along x (y) gives
// P+- = (1 +- Re F)/2 (respectively Im F).
inline std::pair<double, double> controlled_gauge_experiment(GroupElement h, Vertex v,
                                                             ProbeBasis basis) {
  const StateVector charge = charge_pair_state(Irrep::two_dim(), {Vertex::v1, Vertex::v3});

  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const StateVector anc(QuditRegister({2}, {"anc"}), plus, true);
  const StateVector psi = tensor(charge, anc);

  // Ancilla-controlled gauge transformation, ancilla declared first.
  const LocalOperator t = gauge_transform(h, v);
  Eigen::MatrixXcd zero22 = Eigen::MatrixXcd::Zero(2, 2), one22 = zero22;
  zero22(0, 0) = 1.0;
  one22(1, 1) = 1.0;
  LocalOperator ctrl;
  ctrl.sites = {"anc"};
  ctrl.sites.insert(ctrl.sites.end(), t.sites.begin(), t.sites.end());
  ctrl.matrix = kron(zero22, Eigen::MatrixXcd::Identity(t.matrix.rows(), t.matrix.cols())) +
                kron(one22, t.matrix);
  const StateVector out = apply_local(ctrl, psi);

  const cd i_unit(0.0, 1.0);
  Eigen::VectorXcd up(2), down(2);
  if (basis == ProbeBasis::x) {
    up << 1.0, 1.0;
    down << 1.0, -1.0;
  } else {
    up << 1.0, i_unit;
    down << 1.0, -i_unit;
  }
  up /= std::sqrt(2.0);
  down /= std::sqrt(2.0);
  return {project_site(out, "anc", up).first, project_site(out, "anc", down).first};
}

// Expectation of the charge detector W_2 on the connecting edge after the
// pair was moved by T_h: closed trace form over C^6.
inline double w_expectation_after(GroupElement h) {
  const Eigen::MatrixXcd w = ribbon_operator(Irrep::two_dim(), Edge::e2).matrix;
  const Eigen::MatrixXcd l = regular_matrix(Side::left, inverse(h));
  const cd val = (w * w * (l * w * l.adjoint())).trace() / 6.0;
  return val.real();
}

// Same expectation evaluated on the explicit post-transformation state.
inline double w_expectation_after_direct(GroupElement h) {
  const Irrep& r = Irrep::two_dim();
  const StateVector s = charge_pair_state(r, r.matrix(h), {Vertex::v1, Vertex::v3});
  return inner(s, apply_local(ribbon_operator(r, Edge::e2), s)).real();
}

// ---------------------------------------------------------------------------
// Invariant-subspace projectors and charge probes.

// (1/6) sum_g R1(g) x R2(g) x R3(g), optionally with conjugated factors.
// Projects onto the invariant tensors of the triple.
inline Eigen::MatrixXcd q_projector(const Irrep& r1, const Irrep& r2, const Irrep& r3,
                                    std::array<bool, 3> conjugated = {false, false, false}) {
  const int d = r1.dim() * r2.dim() * r3.dim();
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  for (GroupElement g : GroupElement::all()) {
    Eigen::MatrixXcd m1 = r1.matrix(g), m2 = r2.matrix(g), m3 = r3.matrix(g);
    if (conjugated[0]) m1 = m1.conjugate();
    if (conjugated[1]) m2 = m2.conjugate();
    if (conjugated[2]) m3 = m3.conjugate();
    q += kron(kron(m1, m2), m3);
  }
  return q / 6.0;
}

// Expectation of the rp charge detector in the pair state with internal
// matrix m of irrep r, contracted through the invariant projector
// Q[r, conj rp, conj r]. Rows (a,c,d), columns (b,c',e); the probe value is
// sum_{abcde} Q_{(a,c,d),(b,c,e)} conj(m_ab) m_de.
inline double fusion_probe(const Irrep& r, const Irrep& rp, const Eigen::MatrixXcd& m) {
  if (m.rows() != r.dim() || m.cols() != r.dim())
    throw std::invalid_argument("fusion_probe: matrix shape does not match irrep");
  const Eigen::MatrixXcd q = q_projector(r, rp, r, {false, true, true});
  const int dr = r.dim(), dp = rp.dim();
  cd acc = 0.0;
  for (int a = 0; a < dr; ++a)
    for (int b = 0; b < dr; ++b)
      for (int c = 0; c < dp; ++c)
        for (int d = 0; d < dr; ++d)
          for (int e = 0; e < dr; ++e)
            acc += q((a * dp + c) * dr + d, (b * dp + c) * dr + e) * std::conj(m(a, b)) * m(d, e);
  return acc.real();
}

inline double fusion_probe(const Irrep& r, const Irrep& rp, GroupElement h) {
  return fusion_probe(r, rp, Eigen::MatrixXcd(r.matrix(h)));
}

// The same expectation from the explicit charge-pair state.
inline double fusion_probe_direct(const Irrep& r, const Irrep& rp, const Eigen::MatrixXcd& m) {
  const ChargePair pair{Vertex::v1, Vertex::v3};
  const StateVector s = charge_pair_state(r, m, pair);
  const LocalOperator w = ribbon_operator(rp, connecting_edge(pair));
  return inner(s, apply_local(w, s)).real();
}

inline double fusion_probe_direct(const Irrep& r, const Irrep& rp, GroupElement h) {
  return fusion_probe_direct(r, rp, Eigen::MatrixXcd(r.matrix(h)));
}

// Distribution of the edge value's conjugacy class after moving a |1_2> pair
// with T_g, together with the charge-detector expectation. This is what the
// ancilla-free readout measures.
struct ProbeStats {
  double p_identity = 0.0;
  double p_rot_plus = 0.0;
  double p_rot_minus = 0.0;
  double w = 0.0;
};

inline ProbeStats probe_stats_abstract(GroupElement g, ChargePair pair = {Vertex::v1, Vertex::v3},
                                       Vertex op_vertex = Vertex::v1) {
  const Irrep& r = Irrep::two_dim();
  const StateVector moved =
      apply_local(gauge_transform(g, op_vertex), charge_pair_state(r, pair)).normalized();
  const Eigen::VectorXd p = site_distribution(moved, edge_site(connecting_edge(pair)));
  ProbeStats st;
  st.p_identity = p(0);
  st.p_rot_plus = p(4);
  st.p_rot_minus = p(5);
  st.w = 2.0 * st.p_identity - st.p_rot_plus - st.p_rot_minus;
  return st;
}

}  // namespace anyonsim
