#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "anyonsim/plaquette.hpp"

using namespace anyonsim;

namespace {

// Analytic oracle for charge-probe expectations:
// (1/6) sum_l conj(chi_rp(l)) |tr{m r(l)^dag}|^2.
double probe_oracle(const Irrep& r, const Irrep& rp, const Eigen::MatrixXcd& m) {
  cd acc = 0.0;
  for (GroupElement l : GroupElement::all())
    acc += std::conj(rp.character(l)) * std::norm((m * r.matrix(l).adjoint()).trace());
  return acc.real() / 6.0;
}

Eigen::MatrixXcd random_internal_matrix(const Irrep& r, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd m(r.dim(), r.dim());
  for (int i = 0; i < r.dim(); ++i)
    for (int j = 0; j < r.dim(); ++j) m(i, j) = cd(gauss(rng), gauss(rng));
  return m * (std::sqrt(static_cast<double>(r.dim())) / m.norm());
}

}  // namespace

TEST_CASE("triangle topology", "[plaquette]") {
  CHECK(edge_site(connecting_edge({Vertex::v1, Vertex::v2})) == "1");
  CHECK(edge_site(connecting_edge({Vertex::v1, Vertex::v3})) == "2");
  CHECK(edge_site(connecting_edge({Vertex::v2, Vertex::v3})) == "3");
  CHECK_THROWS_AS(connecting_edge({Vertex::v3, Vertex::v1}), std::invalid_argument);
  CHECK_THROWS_AS(connecting_edge({Vertex::v1, Vertex::v1}), std::invalid_argument);
  CHECK(vertex_from_name("v2") == Vertex::v2);
  CHECK_THROWS_AS(vertex_from_name("v4"), std::invalid_argument);
}

TEST_CASE("gauge transformations form commuting representations", "[plaquette]") {
  const StateVector gs = ground_state();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v(216);
  for (int i = 0; i < 216; ++i) v(i) = cd(gauss(rng), gauss(rng));
  const StateVector random(plaquette_register(), v, false);

  for (Vertex vx : {Vertex::v1, Vertex::v2, Vertex::v3}) {
    for (GroupElement g : GroupElement::all()) {
      const Eigen::MatrixXcd m = gauge_transform(g, vx).matrix;
      CHECK((m * m.adjoint() - Eigen::MatrixXcd::Identity(36, 36)).cwiseAbs().maxCoeff() < 1e-12);
      for (GroupElement h : GroupElement::all()) {
        CHECK((gauge_transform(g, vx).matrix * gauge_transform(h, vx).matrix -
               gauge_transform(g * h, vx).matrix)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
      }
    }
  }

  // Transformations at different vertices commute even on the shared edge.
  for (Vertex a : {Vertex::v1, Vertex::v2, Vertex::v3}) {
    for (Vertex b : {Vertex::v1, Vertex::v2, Vertex::v3}) {
      if (a == b) continue;
      for (GroupElement g : GroupElement::all()) {
        for (GroupElement h : GroupElement::all()) {
          const StateVector ab =
              apply_local(gauge_transform(g, a), apply_local(gauge_transform(h, b), random));
          const StateVector ba =
              apply_local(gauge_transform(h, b), apply_local(gauge_transform(g, a), random));
          CHECK((ab.amplitudes() - ba.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("ground state is the unique shared +1 eigenstate", "[plaquette]") {
  const StateVector gs = ground_state();
  CHECK(gs.is_normalized(1e-12));

  for (Vertex v : {Vertex::v1, Vertex::v2, Vertex::v3}) {
    for (GroupElement g : GroupElement::all()) {
      const StateVector moved = apply_local(gauge_transform(g, v), gs);
      CHECK((moved.amplitudes() - gs.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const StateVector proj = apply_local(vertex_projector(v), gs);
    CHECK((proj.amplitudes() - gs.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const StateVector faced = apply_local(face_projector(), gs);
  CHECK((faced.amplitudes() - gs.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(std::abs(stabilizer_energy(gs) - (-4.0)) < 1e-12);
}

TEST_CASE("projectors are projectors", "[plaquette]") {
  for (Vertex v : {Vertex::v1, Vertex::v2, Vertex::v3}) {
    const Eigen::MatrixXcd a = vertex_projector(v).matrix;
    CHECK((a * a - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a - a.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Eigen::MatrixXcd b = face_projector().matrix;
  CHECK((b * b - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b - b.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  // Exactly one sixth of the 216 configurations are flux free.
  CHECK(std::abs(b.trace() - cd(36.0, 0.0)) < 1e-12);

  // A configuration with g2 != g1 g3 carries flux and is annihilated.
  const StateVector fluxed = StateVector::basis_state(plaquette_register(), {0, 1, 0});
  CHECK(apply_local(face_projector(), fluxed).norm() < 1e-15);
  const StateVector fluxfree = StateVector::basis_state(plaquette_register(), {1, 4, 2});
  // t0 * t1 = c+, so (t0, c+, t1) is flux free.
  CHECK(std::abs(apply_local(face_projector(), fluxfree).norm() - 1.0) < 1e-15);
}

TEST_CASE("ribbon operators are Hermitian charge detectors", "[plaquette]") {
  const Eigen::MatrixXcd w = ribbon_operator(Irrep::two_dim(), Edge::e2).matrix;
  CHECK((w - w.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  const std::array<double, 6> eig = {2, 0, 0, 0, -1, -1};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const cd expected = (i == j) ? cd(eig[i], 0.0) : cd(0.0, 0.0);
      CHECK(std::abs(w(i, j) - expected) < 1e-12);
    }
  }
  // The ground state is charge free: <W_r> = chi_r(e) would need a charge,
  // the flat average gives (1/6) sum_l chi_r(l), zero for nontrivial r.
  const StateVector gs = ground_state();
  CHECK(std::abs(inner(gs, apply_local(ribbon_operator(Irrep::two_dim(), Edge::e2), gs))) <
        1e-12);
  CHECK(std::abs(inner(gs, apply_local(ribbon_operator(Irrep::sign(), Edge::e1), gs))) < 1e-12);
  CHECK(std::abs(inner(gs, apply_local(ribbon_operator(Irrep::trivial(), Edge::e3), gs)) - 1.0) <
        1e-12);
}

TEST_CASE("charge pair states are normalized and covariant", "[plaquette]") {
  std::mt19937_64 rng(22);
  const ChargePair pair{Vertex::v1, Vertex::v3};

  // Trivial charge with m = 1 is just the ground state.
  const StateVector trivial = charge_pair_state(Irrep::trivial(), pair);
  CHECK((trivial.amplitudes() - ground_state().amplitudes()).cwiseAbs().maxCoeff() < 1e-15);

  for (const Irrep* r : Irrep::all()) {
    for (GroupElement h : GroupElement::all()) {
      const StateVector s = charge_pair_state(*r, Eigen::MatrixXcd(r->matrix(h)), pair);
      CHECK(s.is_normalized(1e-12));
    }
    const Eigen::MatrixXcd m = random_internal_matrix(*r, rng);
    CHECK(charge_pair_state(*r, m, pair).is_normalized(1e-12));
  }

  CHECK_THROWS_AS(charge_pair_state(Irrep::two_dim(),
                                    2.0 * Eigen::MatrixXcd::Identity(2, 2), pair),
                  std::invalid_argument);
  CHECK_THROWS_AS(charge_pair_state(Irrep::two_dim(), Eigen::MatrixXcd::Identity(1, 1), pair),
                  std::invalid_argument);

  // Transformations at the endpoints act on the internal matrix from the
  // left and right; the third vertex leaves the pair invariant.
  for (const ChargePair p :
       {ChargePair{Vertex::v1, Vertex::v3}, ChargePair{Vertex::v1, Vertex::v2},
        ChargePair{Vertex::v2, Vertex::v3}}) {
    const Irrep& r = Irrep::two_dim();
    Vertex spectator = Vertex::v1;
    for (Vertex v : {Vertex::v1, Vertex::v2, Vertex::v3})
      if (v != p.from && v != p.to) spectator = v;
    for (GroupElement h : GroupElement::all()) {
      const Eigen::MatrixXcd m = random_internal_matrix(r, rng);
      const StateVector base = charge_pair_state(r, m, p);

      const StateVector at_from = apply_local(gauge_transform(h, p.from), base);
      const StateVector want_from =
          charge_pair_state(r, Eigen::MatrixXcd(r.matrix(h) * m), p);
      CHECK((at_from.amplitudes() - want_from.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);

      const StateVector at_to = apply_local(gauge_transform(h, p.to), base);
      const StateVector want_to =
          charge_pair_state(r, Eigen::MatrixXcd(m * r.matrix(inverse(h))), p);
      CHECK((at_to.amplitudes() - want_to.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);

      const StateVector at_other = apply_local(gauge_transform(h, spectator), base);
      CHECK((at_other.amplitudes() - base.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("charge pair overlaps follow Schur orthogonality", "[plaquette]") {
  std::mt19937_64 rng(23);
  const ChargePair pair{Vertex::v1, Vertex::v3};
  for (const Irrep* r1 : Irrep::all()) {
    for (const Irrep* r2 : Irrep::all()) {
      const Eigen::MatrixXcd m1 = random_internal_matrix(*r1, rng);
      const Eigen::MatrixXcd m2 = random_internal_matrix(*r2, rng);
      const cd got = inner(charge_pair_state(*r1, m1, pair), charge_pair_state(*r2, m2, pair));
      const cd want = (r1 == r2)
                          ? (m1.adjoint() * m2).trace() / static_cast<double>(r1->dim())
                          : cd(0.0, 0.0);
      CHECK(std::abs(got - want) < 1e-12);
    }
  }
}

TEST_CASE("fusion amplitude routes agree and take the closed-form values", "[plaquette]") {
  for (const Irrep* r : Irrep::all()) {
    for (GroupElement h : GroupElement::all()) {
      const cd f = fusion_amplitude(*r, h);
      CHECK(std::abs(f - fusion_amplitude_ground_trace(*r, h)) < 1e-12);
      CHECK(std::abs(f - fusion_amplitude_overlap(*r, h)) < 1e-12);
    }
  }

  const std::array<double, 6> f_two = {1.0, 0.0, 0.0, 0.0, -0.5, -0.5};
  const std::array<double, 6> f_sign = {1.0, -1.0, -1.0, -1.0, 1.0, 1.0};
  for (int i = 0; i < 6; ++i) {
    const GroupElement h = GroupElement::from_index(i);
    CHECK(std::abs(fusion_amplitude(Irrep::two_dim(), h) - f_two[i]) < 1e-12);
    CHECK(std::abs(fusion_amplitude(Irrep::sign(), h) - f_sign[i]) < 1e-12);
    CHECK(std::abs(fusion_amplitude(Irrep::trivial(), h) - 1.0) < 1e-12);
  }
}

TEST_CASE("controlled interference reads out the fusion amplitude", "[plaquette]") {
  for (GroupElement h : GroupElement::all()) {
    const double f = fusion_amplitude(Irrep::two_dim(), h).real();
    auto [px_up, px_down] = controlled_gauge_experiment(h, Vertex::v1, ProbeBasis::x);
    CHECK(std::abs(px_up + px_down - 1.0) < 1e-12);
    CHECK(std::abs((px_up - px_down) - f) < 1e-12);

    // All fusion amplitudes are real here, so the y readout is balanced.
    auto [py_up, py_down] = controlled_gauge_experiment(h, Vertex::v1, ProbeBasis::y);
    CHECK(std::abs(py_up + py_down - 1.0) < 1e-12);
    CHECK(std::abs(py_up - py_down) < 1e-12);
  }

  auto [p_up, p_down] =
      controlled_gauge_experiment(GroupElement::from_token("c+"), Vertex::v1, ProbeBasis::x);
  CHECK(std::abs(p_up - 0.25) < 1e-12);
  CHECK(std::abs(p_down - 0.75) < 1e-12);

  // The pair lives on (v1, v3); v2 only sees gauge-invariant structure.
  for (GroupElement h : GroupElement::all()) {
    auto [q_up, q_down] = controlled_gauge_experiment(h, Vertex::v2, ProbeBasis::x);
    CHECK(std::abs(q_up - 1.0) < 1e-12);
    CHECK(std::abs(q_down) < 1e-12);
  }
}

TEST_CASE("charge detector expectation after a move", "[plaquette]") {
  const std::array<double, 6> expected = {1.0, 0.0, 0.0, 0.0, -0.5, -0.5};
  for (int i = 0; i < 6; ++i) {
    const GroupElement h = GroupElement::from_index(i);
    CHECK(std::abs(w_expectation_after(h) - expected[i]) < 1e-12);
    CHECK(std::abs(w_expectation_after_direct(h) - expected[i]) < 1e-12);
  }
}

TEST_CASE("invariant projectors have the multiplicity rank", "[plaquette]") {
  for (const Irrep* r1 : Irrep::all()) {
    for (const Irrep* r2 : Irrep::all()) {
      for (const Irrep* r3 : Irrep::all()) {
        const Eigen::MatrixXcd q = q_projector(*r1, *r2, *r3);
        CHECK((q * q - q).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((q - q.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(q.trace().real() - trivial_multiplicity(*r1, *r2, *r3)) < 1e-12);
        CHECK(std::abs(q.trace().imag()) < 1e-12);
      }
    }
  }
}

TEST_CASE("charge probes agree across projector, state and analytic routes", "[plaquette]") {
  std::mt19937_64 rng(24);
  for (const Irrep* r : Irrep::all()) {
    for (const Irrep* rp : Irrep::all()) {
      for (GroupElement h : GroupElement::all()) {
        const Eigen::MatrixXcd m = r->matrix(h);
        const double q_path = fusion_probe(*r, *rp, m);
        CHECK(std::abs(q_path - fusion_probe_direct(*r, *rp, m)) < 1e-12);
        CHECK(std::abs(q_path - probe_oracle(*r, *rp, m)) < 1e-12);
      }
      // Random internal matrices and scaled matrix units.
      for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXcd m = random_internal_matrix(*r, rng);
        const double q_path = fusion_probe(*r, *rp, m);
        CHECK(std::abs(q_path - fusion_probe_direct(*r, *rp, m)) < 1e-12);
        CHECK(std::abs(q_path - probe_oracle(*r, *rp, m)) < 1e-12);
      }
      for (int a = 0; a < r->dim(); ++a) {
        for (int b = 0; b < r->dim(); ++b) {
          Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(r->dim(), r->dim());
          unit(a, b) = std::sqrt(static_cast<double>(r->dim()));
          const double q_path = fusion_probe(*r, *rp, unit);
          CHECK(std::abs(q_path - fusion_probe_direct(*r, *rp, unit)) < 1e-12);
          CHECK(std::abs(q_path - probe_oracle(*r, *rp, unit)) < 1e-12);
        }
      }
    }
  }

  // Frozen reference values.
  const Irrep& td = Irrep::two_dim();
  const Irrep& tr = Irrep::trivial();
  const Irrep& sg = Irrep::sign();
  const GroupElement e = GroupElement::identity();
  const GroupElement cp = GroupElement::from_token("c+");
  const GroupElement cm = GroupElement::from_token("c-");
  const GroupElement t0 = GroupElement::from_token("t0");
  CHECK(std::abs(fusion_probe(td, td, e) - 1.0) < 1e-12);
  CHECK(std::abs(fusion_probe(td, td, cp) + 0.5) < 1e-12);
  CHECK(std::abs(fusion_probe(td, td, cm) + 0.5) < 1e-12);
  CHECK(std::abs(fusion_probe(td, td, t0) - 0.0) < 1e-12);
  for (GroupElement h : GroupElement::all()) {
    CHECK(std::abs(fusion_probe(td, tr, h) - 1.0) < 1e-12);
    CHECK(std::abs(fusion_probe(tr, td, h)) < 1e-12);
    CHECK(std::abs(fusion_probe(sg, sg, h)) < 1e-12);
  }
  CHECK(std::abs(fusion_probe(td, sg, e) - 1.0) < 1e-12);
  CHECK(std::abs(fusion_probe(td, sg, t0) + 1.0) < 1e-12);
}

TEST_CASE("ancilla-free probe statistics", "[plaquette]") {
  auto check_stats = [](const ProbeStats& st, double pe, double pp, double pm, double w) {
    CHECK(std::abs(st.p_identity - pe) < 1e-12);
    CHECK(std::abs(st.p_rot_plus - pp) < 1e-12);
    CHECK(std::abs(st.p_rot_minus - pm) < 1e-12);
    CHECK(std::abs(st.w - w) < 1e-12);
  };

  check_stats(probe_stats_abstract(GroupElement::identity()), 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0);
  check_stats(probe_stats_abstract(GroupElement::from_token("c+")), 1.0 / 6, 2.0 / 3, 1.0 / 6,
              -0.5);
  check_stats(probe_stats_abstract(GroupElement::from_token("c-")), 1.0 / 6, 1.0 / 6, 2.0 / 3,
              -0.5);
  for (const char* t : {"t0", "t1", "t2"})
    check_stats(probe_stats_abstract(GroupElement::from_token(t)), 0.0, 0.0, 0.0, 0.0);

  // The detector expectation matches the closed trace form for every move.
  for (GroupElement g : GroupElement::all())
    CHECK(std::abs(probe_stats_abstract(g).w - w_expectation_after(g)) < 1e-12);
}
