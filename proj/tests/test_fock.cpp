#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "anyonsim/fock.hpp"

using namespace anyonsim;

namespace {

// Independent beam-splitter oracle: the amplitude between number states of a
// two-mode passive transformation is a matrix permanent of the single-particle
// matrix with rows and columns repeated according to the occupations,
//   <p,q|U|n1,n2> = perm(A) / sqrt(n1! n2! p! q!).
cd permanent(const std::vector<std::vector<cd>>& a, unsigned used, int row) {
  const int n = static_cast<int>(a.size());
  if (row == n) return 1.0;
  cd acc = 0.0;
  for (int col = 0; col < n; ++col) {
    if (used & (1u << col)) continue;
    acc += a[row][col] * permanent(a, used | (1u << col), row + 1);
  }
  return acc;
}

double fact(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

cd bs_oracle_amp(double reflectivity, int n1, int n2, int p, int q) {
  if (n1 + n2 != p + q) return 0.0;
  const cd t00(0.0, std::sqrt(reflectivity));
  const cd t01(std::sqrt(1.0 - reflectivity), 0.0);
  const cd table[2][2] = {{t00, t01}, {t01, t00}};
  std::vector<int> rows, cols;
  for (int i = 0; i < p; ++i) rows.push_back(0);
  for (int i = 0; i < q; ++i) rows.push_back(1);
  for (int i = 0; i < n1; ++i) cols.push_back(0);
  for (int i = 0; i < n2; ++i) cols.push_back(1);
  const int n = n1 + n2;
  std::vector<std::vector<cd>> a(n, std::vector<cd>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a[r][c] = table[rows[r]][cols[c]];
  return (n == 0 ? cd(1.0) : permanent(a, 0u, 0)) /
         std::sqrt(fact(n1) * fact(n2) * fact(p) * fact(q));
}

FockVector random_state(const ModeSet& modes, int max_occ, std::mt19937& rng) {
  std::uniform_int_distribution<int> occ_dist(0, max_occ);
  std::uniform_real_distribution<double> amp_dist(-1.0, 1.0);
  FockVector f(modes);
  for (int draw = 0; draw < 12; ++draw) {
    std::vector<int> occ(modes.num_modes());
    for (int& n : occ) n = occ_dist(rng);
    f.set_amp(occ, cd(amp_dist(rng), amp_dist(rng)));
  }
  return f.normalized();
}

}  // namespace

TEST_CASE("mode sets validate their construction", "[fock]") {
  CHECK_THROWS_AS(ModeSet(std::vector<std::string>{}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSet({"a", "a"}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSet({"a"}, 0, 4), std::invalid_argument);

  const ModeSet m({"a", "b", "c"}, 3, 5);
  CHECK(m.num_modes() == 3);
  CHECK(m.index("b") == 1);
  CHECK(m.label(2) == "c");
  CHECK_THROWS_AS(m.index("z"), std::invalid_argument);
  CHECK(m == ModeSet({"a", "b", "c"}, 3, 5));
  CHECK(m != ModeSet({"a", "b", "c"}, 3, 6));
}

TEST_CASE("fock vectors enforce occupation limits", "[fock]") {
  const ModeSet m({"a", "b"}, 2, 3);
  FockVector f(m);
  f.set_amp({2, 1}, 1.0);
  CHECK(f.amp({2, 1}) == cd(1.0));
  CHECK(f.amp({0, 0}) == cd(0.0));
  CHECK_THROWS_AS(f.set_amp({3, 0}, 1.0), TruncationOverflow);
  CHECK_THROWS_AS(f.set_amp({2, 2}, 1.0), TruncationOverflow);
  CHECK_THROWS_AS(f.set_amp({-1, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(f.set_amp({1, 1, 1}, 1.0), std::invalid_argument);

  const FockVector vac = FockVector::vacuum(m);
  CHECK(vac.amp({0, 0}) == cd(1.0));
  CHECK(vac.norm() == Catch::Approx(1.0));
  CHECK_THROWS_AS(FockVector::basis(m, {0, 4}), TruncationOverflow);
}

TEST_CASE("beam splitter matches the permanent oracle", "[fock]") {
  const ModeSet m({"a", "b"}, 8, 8);
  for (const double r : {0.0, 0.17, 0.5, 0.83, 1.0}) {
    for (int n1 = 0; n1 <= 3; ++n1) {
      for (int n2 = 0; n2 <= 3; ++n2) {
        const FockVector out =
            apply_beam_splitter(FockVector::basis(m, {n1, n2}), "a", "b", r);
        for (int p = 0; p <= n1 + n2; ++p) {
          const int q = n1 + n2 - p;
          const cd expected = bs_oracle_amp(r, n1, n2, p, q);
          CHECK(std::abs(out.amp({p, q}) - expected) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("beam splitter conventions on one and two photons", "[fock]") {
  const ModeSet m({"a", "b"}, 4, 4);
  const double r = 0.3;

  const FockVector one = apply_beam_splitter(FockVector::basis(m, {1, 0}), "a", "b", r);
  CHECK(std::abs(one.amp({1, 0}) - cd(0.0, std::sqrt(r))) < 1e-15);
  CHECK(std::abs(one.amp({0, 1}) - cd(std::sqrt(1.0 - r), 0.0)) < 1e-15);

  // Balanced splitter on |1,1>: the coincidence amplitude cancels and both
  // photons bunch, each branch carrying amplitude i/sqrt(2).
  const FockVector hom = apply_beam_splitter(FockVector::basis(m, {1, 1}), "a", "b", 0.5);
  CHECK(std::abs(hom.amp({1, 1})) < 1e-15);
  CHECK(std::abs(hom.amp({2, 0}) - cd(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(hom.amp({0, 2}) - cd(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);

  // Fully reflective: each photon picks up a factor i and stays put.
  const FockVector refl = apply_beam_splitter(FockVector::basis(m, {2, 1}), "a", "b", 1.0);
  CHECK(std::abs(refl.amp({2, 1}) - std::pow(cd(0.0, 1.0), 3)) < 1e-15);

  CHECK_THROWS_AS(apply_beam_splitter(one, "a", "a", 0.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_beam_splitter(one, "a", "b", 1.5), std::invalid_argument);
}

TEST_CASE("beam splitters preserve norm and photon number", "[fock]") {
  std::mt19937 rng(2026);
  const ModeSet m({"a", "b", "c"}, 9, 9);
  for (int trial = 0; trial < 40; ++trial) {
    const FockVector f = random_state(m, 3, rng);
    std::uniform_real_distribution<double> r_dist(0.0, 1.0);
    const FockVector g = apply_beam_splitter(f, trial % 2 ? "a" : "b", "c", r_dist(rng));
    CHECK(g.norm() == Catch::Approx(1.0).margin(1e-12));
    const auto before = photon_number_distribution(f);
    const auto after = photon_number_distribution(g);
    REQUIRE(before.size() == after.size());
    for (const auto& [n, w] : before) CHECK(after.at(n) == Catch::Approx(w).margin(1e-12));
  }
}

TEST_CASE("beam splitter pairs compose to the expected unitary", "[fock]") {
  // Two balanced splitters in sequence act as the square of the one-photon
  // matrix, which is a full mode swap with phase i.
  const ModeSet m({"a", "b"}, 4, 4);
  FockVector f = FockVector::basis(m, {1, 0});
  f = apply_beam_splitter(f, "a", "b", 0.5);
  f = apply_beam_splitter(f, "a", "b", 0.5);
  CHECK(std::abs(f.amp({0, 1}) - cd(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(f.amp({1, 0})) < 1e-12);
}

TEST_CASE("phase shifts act linearly in the photon number", "[fock]") {
  const ModeSet m({"a", "b"}, 4, 6);
  FockVector f(m);
  f.set_amp({0, 1}, 0.5);
  f.set_amp({3, 2}, 0.5);
  const double phi = 0.731;
  const FockVector g = apply_phase_shift(f, "a", phi);
  CHECK(std::abs(g.amp({0, 1}) - 0.5) < 1e-15);
  CHECK(std::abs(g.amp({3, 2}) - 0.5 * std::polar(1.0, 3.0 * phi)) < 1e-15);

  const FockVector h = apply_phase_shift(FockVector::basis(m, {1, 0}), "a", M_PI);
  CHECK(std::abs(h.amp({1, 0}) + 1.0) < 1e-15);
}

TEST_CASE("mode swap agrees with a fully transmissive splitter", "[fock]") {
  std::mt19937 rng(7);
  const ModeSet m({"a", "b", "c"}, 6, 9);
  const FockVector f = random_state(m, 2, rng);
  const FockVector swapped = apply_mode_swap(f, "a", "c");
  const FockVector through = apply_beam_splitter(f, "a", "c", 0.0);
  for (const auto& [occ, amp] : swapped.amplitudes()) CHECK(std::abs(through.amp(occ) - amp) < 1e-12);
  CHECK(swapped.norm() == Catch::Approx(1.0).margin(1e-12));

  // Swapping twice restores the original state.
  const FockVector twice = apply_mode_swap(swapped, "a", "c");
  for (const auto& [occ, amp] : f.amplitudes()) CHECK(std::abs(twice.amp(occ) - amp) < 1e-15);
}

TEST_CASE("controlled rail exchange follows the control photon", "[fock]") {
  const ModeSet m({"c", "t0", "t1"}, 2, 4);
  const FockVector on = apply_cnot2lvl_fock(FockVector::basis(m, {1, 1, 0}), "c", "t0", "t1");
  CHECK(on.amp({1, 0, 1}) == cd(1.0));
  const FockVector off = apply_cnot2lvl_fock(FockVector::basis(m, {0, 1, 0}), "c", "t0", "t1");
  CHECK(off.amp({0, 1, 0}) == cd(1.0));
  CHECK_THROWS_AS(apply_cnot2lvl_fock(on, "c", "t0", "t0"), std::invalid_argument);
}

TEST_CASE("overflow during an operation raises instead of clipping", "[fock]") {
  const ModeSet tight({"a", "b"}, 1, 2);
  const FockVector f = FockVector::basis(tight, {1, 1});
  CHECK_THROWS_AS(apply_beam_splitter(f, "a", "b", 0.5), TruncationOverflow);
}

TEST_CASE("tensor products and inner products combine mode sets", "[fock]") {
  const ModeSet ma({"a1", "a2"}, 2, 2);
  const ModeSet mb({"b1"}, 2, 2);
  FockVector fa(ma);
  fa.set_amp({1, 0}, cd(0.0, 1.0));
  const FockVector fb = FockVector::basis(mb, {1});
  const FockVector joint = tensor(fa, fb);
  CHECK(joint.modes().labels() == std::vector<std::string>{"a1", "a2", "b1"});
  CHECK(joint.amp({1, 0, 1}) == cd(0.0, 1.0));

  CHECK(std::abs(inner(joint, joint) - cd(1.0)) < 1e-15);
  FockVector other(joint.modes());
  other.set_amp({1, 0, 1}, 0.5);
  // First argument enters conjugated.
  CHECK(std::abs(inner(joint, other) - cd(0.0, -0.5)) < 1e-15);
  CHECK_THROWS_AS(inner(fa, fb), std::invalid_argument);
}

TEST_CASE("squeezed pair source has geometric amplitudes", "[fock]") {
  const double lambda = 0.1;
  const int n_max = 3;
  const FockVector f = spdc_state(lambda, n_max, "s", "i");
  const double base = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n <= n_max; ++n)
    CHECK(std::abs(f.amp({n, n}) - base * std::pow(lambda, n)) < 1e-15);

  // Norm deficit of the truncation is exactly lambda^(2(n_max+1)).
  CHECK(f.norm_sq() == Catch::Approx(1.0 - std::pow(lambda, 2 * (n_max + 1))).margin(1e-15));

  CHECK_THROWS_AS(spdc_state(1.0, 3, "s", "i"), std::invalid_argument);
  CHECK_THROWS_AS(spdc_state(-0.1, 3, "s", "i"), std::invalid_argument);
  CHECK_THROWS_AS(spdc_state(0.5, 0, "s", "i"), std::invalid_argument);
}

TEST_CASE("block encoding round-trips register states", "[fock]") {
  std::mt19937 rng(11);
  const QuditRegister reg({2, 3}, {"p", "q"});
  Eigen::VectorXcd amps(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 6; ++i) amps(i) = cd(dist(rng), dist(rng));
  amps.normalize();
  const StateVector s(reg, amps, true);

  const std::vector<BlockSpec> blocks = {{"p", {"p0", "p1"}}, {"q", {"q0", "q1", "q2"}}};
  const FockVector f = encode_blocks(s, blocks);
  CHECK(f.norm() == Catch::Approx(1.0).margin(1e-12));
  CHECK(std::abs(f.amp({0, 1, 0, 1, 0}) - s.amp({1, 1})) < 1e-15);

  const HeraldedDecode back = decode_blocks(f, PostSelection{blocks, {}});
  CHECK(back.success_probability == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(back.logical.reg() == reg);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(back.logical.amplitudes()(i) - amps(i)) < 1e-12);

  const std::vector<BlockSpec> wrong = {{"p", {"p0", "p1", "p2"}}, {"q", {"q0", "q1", "q2"}}};
  CHECK_THROWS_AS(encode_blocks(s, wrong), std::invalid_argument);
}

TEST_CASE("post-selection keeps only single-photon block patterns", "[fock]") {
  const ModeSet m({"p0", "p1", "w"}, 2, 4);
  const PostSelection sel{{{"p", {"p0", "p1"}}}, {"w"}};

  CHECK(pattern_accepts(sel, m, {1, 0, 0}));
  CHECK(pattern_accepts(sel, m, {0, 1, 0}));
  CHECK_FALSE(pattern_accepts(sel, m, {1, 1, 0}));
  CHECK_FALSE(pattern_accepts(sel, m, {2, 0, 0}));
  CHECK_FALSE(pattern_accepts(sel, m, {0, 0, 0}));
  CHECK_FALSE(pattern_accepts(sel, m, {1, 0, 1}));

  FockVector f(m);
  f.set_amp({1, 0, 0}, std::sqrt(0.18));
  f.set_amp({0, 1, 0}, std::sqrt(0.18));
  f.set_amp({2, 0, 0}, std::sqrt(0.40));
  f.set_amp({1, 0, 1}, std::sqrt(0.24));
  const HeraldedDecode d = decode_blocks(f, sel);
  CHECK(d.success_probability == Catch::Approx(0.36).margin(1e-12));
  CHECK(std::abs(d.logical.amp({0}) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(d.logical.amp({1}) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(d.logical.is_normalized());

  // Coverage must be exact: every mode placed once, no unknown modes.
  CHECK_THROWS_AS(decode_blocks(f, PostSelection{{{"p", {"p0", "p1"}}}, {}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decode_blocks(f, PostSelection{{{"p", {"p0", "p1"}}}, {"w", "p0"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decode_blocks(f, PostSelection{{{"p", {"p0", "p1"}}}, {"w", "z"}}),
                  std::invalid_argument);
}

TEST_CASE("single-crystal heralding succeeds with the pair branch weight", "[fock]") {
  const double lambda = 0.1;
  const FockVector f = spdc_state(lambda, 3, "s", "i");
  const PostSelection sel{{{"s", {"s"}}, {"i", {"i"}}}, {}};
  // Relative to the truncated norm; the absolute pair weight is
  // lambda^2 (1 - lambda^2).
  const double pair = lambda * lambda * (1.0 - lambda * lambda);
  CHECK(herald_probability(f, sel) == Catch::Approx(pair / f.norm_sq()).margin(1e-15));
  // Single-rail blocks carry no register content, so a decode is refused.
  CHECK_THROWS_AS(decode_blocks(f, sel), std::invalid_argument);
}

TEST_CASE("sparse states round-trip through JSON", "[fock]") {
  const ModeSet m({"p0", "p1", "w"}, 3, 4);
  FockVector f(m);
  f.set_amp({1, 0, 0}, cd(0.25, -0.5));
  f.set_amp({0, 2, 1}, cd(-0.125, 0.0));
  f.set_amp({1, 1, 2}, cd(0.0, 0.75));

  const nlohmann::json j = f;
  CHECK(j.at("modes").get<std::vector<std::string>>() == m.labels());
  CHECK(j.at("max_per_mode").get<int>() == 3);
  CHECK(j.at("max_total").get<int>() == 4);
  CHECK(j.at("amplitudes").size() == 3);

  const FockVector back = j.get<FockVector>();
  CHECK(back.modes() == m);
  CHECK(std::abs(inner(f, back) - f.norm_sq()) < 1e-15);
  CHECK(back.amp({0, 2, 1}) == cd(-0.125, 0.0));

  // Limits survive the round trip and keep rejecting overfull occupations.
  FockVector mutated = back;
  CHECK_THROWS_AS(mutated.set_amp({0, 0, 4}, 1.0), TruncationOverflow);
}
