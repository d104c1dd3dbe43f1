#include "soblab/norms.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace soblab;

namespace {
struct Fixture {
  Manifold m = make_path(2);
  SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
};
}  // namespace

TEST_CASE("Lebesgue norms: hand values and the sup norm") {
  Fixture fx;
  CHECK(lebesgue_norm(fx.m, RealField(RealField::Ones(2)), 2.0) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  RealField f(2);
  f << 1.0, 0.0;
  CHECK(lebesgue_norm(fx.m, f, kInf) == 1.0);
  RealField g(2);
  g << 3.0, 4.0;
  CHECK(lebesgue_norm(fx.m, g, 2.0) == Catch::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("norms are absolutely homogeneous and triangle-like") {
  const Manifold m = make_cycle(12);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    RealField f(12), g(12);
    for (int i = 0; i < 12; ++i) {
      f(i) = rng.next_normal();
      g(i) = rng.next_normal();
    }
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
      const double nf = lebesgue_norm(m, f, p);
      CHECK(lebesgue_norm(m, RealField(-2.5 * f), p) ==
            Catch::Approx(2.5 * nf).epsilon(1e-12));
      CHECK(lebesgue_norm(m, RealField(f + g), p) <=
            nf + lebesgue_norm(m, g, p) + 1e-12);
    }
    CHECK(bmo_norm(m, RealField(2.0 * f)) == Catch::Approx(2.0 * bmo_norm(m, f)).epsilon(1e-12));
    CHECK(sobolev_norm(op, RealField(3.0 * f), 0.5, 2.0, true) ==
          Catch::Approx(3.0 * sobolev_norm(op, f, 0.5, 2.0, true)).epsilon(1e-12));
  }
}

TEST_CASE("Sobolev norms: constants, hand value, alpha = 0") {
  Fixture fx;
  const RealField c = RealField::Constant(2, 7.0);
  CHECK(sobolev_norm(fx.op, c, 1.0, 2.0, /*homogeneous=*/true) == 0.0);
  RealField f(2);
  f << 1.0, 0.0;
  CHECK(sobolev_norm(fx.op, f, 1.0, 2.0, /*homogeneous=*/true) ==
        Catch::Approx(1.0).epsilon(1e-12));
  for (double p : {1.0, 2.0, 3.0})
    CHECK(sobolev_norm(fx.op, f, 0.0, p, /*homogeneous=*/true) ==
          Catch::Approx(lebesgue_norm(fx.m, f, p)).epsilon(1e-14));
}

TEST_CASE("classical BMO by enumeration of balls") {
  Fixture fx;
  RealField f(2);
  f << 1.0, 0.0;
  // balls: {0} and {1} oscillate 0; {0,1} has mean 1/2 and average deviation 1/2
  CHECK(bmo_norm(fx.m, f) == Catch::Approx(0.5).margin(1e-12));
  CHECK(bmo_norm(fx.m, RealField(RealField::Constant(2, 9.0))) == 0.0);
}

TEST_CASE("both BMO flavors are shift-invariant and kill constants") {
  const Manifold m = make_cycle(8);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  SplitMix64 rng(9);
  RealField f(8);
  for (int i = 0; i < 8; ++i) f(i) = rng.next_normal();
  const RealField shifted = f + RealField::Constant(8, 17.5);
  CHECK(bmo_norm(m, shifted) == Catch::Approx(bmo_norm(m, f)).margin(1e-12));
  CHECK(bmo_semigroup_norm(m, op, shifted, 2.0) ==
        Catch::Approx(bmo_semigroup_norm(m, op, f, 2.0)).margin(1e-12));
  const RealField c = RealField::Constant(8, -3.0);
  CHECK(bmo_norm(m, c) == 0.0);
  CHECK(bmo_semigroup_norm(m, op, c, 2.0) <= 1e-12);
}

TEST_CASE("maximal function: hand value and order properties") {
  Fixture fx;
  RealField f(2);
  f << 1.0, 0.0;
  const RealField mf = maximal_function(fx.m, f, 1.0);
  CHECK(mf(0) == Catch::Approx(1.0).margin(1e-14));
  CHECK(mf(1) == Catch::Approx(0.5).margin(1e-14));

  const Manifold m = make_torus_grid(4, 4);
  SplitMix64 rng(12);
  RealField g(16);
  for (int i = 0; i < 16; ++i) g(i) = rng.next_normal();
  const RealField m1 = maximal_function(m, g, 1.0);
  const RealField m2 = maximal_function(m, g, 2.0);
  const double sup = g.cwiseAbs().maxCoeff();
  for (int i = 0; i < 16; ++i) {
    CHECK(m1(i) >= std::abs(g(i)));  // singleton balls, exact
    CHECK(m1(i) <= m2(i) + 1e-12);   // power-mean monotonicity in s
    CHECK(m2(i) <= sup + 1e-12);
  }
  const RealField mc = maximal_function(m, RealField(RealField::Constant(16, -2.0)), 1.5);
  CHECK((mc.array() - 2.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding report: constant field ratio on path(2)") {
  Fixture fx;
  // f == 1: (1+L)^{s/m} 1 = 1, so ||f||_inf / ||f||_{W^{s,p}} = 1/sqrt(2) at p=2
  const RealField ones = RealField::Ones(2);
  const double wn = sobolev_norm(fx.op, ones, 1.5, 2.0, false);
  CHECK(lebesgue_norm(fx.m, ones, kInf) / wn == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  const RealField b = fractional_power(fx.op, 1.5 / fx.op.order_m, ones, true);
  CHECK((b - ones).cwiseAbs().maxCoeff() < 1e-12);

  const EmbeddingReport rep = embedding_report(fx.op, fx.m, 1.5, 2.0, kInf, 8, 21);
  CHECK(!rep.resolvent_ratios.empty());
  CHECK(rep.max_resolvent_ratio > 0.0);
  CHECK(std::isfinite(rep.max_direct_ratio));
}

TEST_CASE("embedding report flags violated hypotheses instead of failing") {
  const Manifold m = make_cycle(16);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  const EmbeddingReport ok = embedding_report(op, m, 2.0, 2.0, 4.0, 4, 5);
  CHECK(!ok.hypothesis_violated);
  const EmbeddingReport bad = embedding_report(op, m, 0.05, 2.0, kInf, 4, 5);
  CHECK(bad.hypothesis_violated);  // s < d/p regime, still reported
  CHECK(!bad.resolvent_ratios.empty());
  const EmbeddingReport down = embedding_report(op, m, 1.0, 3.0, 2.0, 4, 5);
  CHECK(down.hypothesis_violated);  // q < p, flagged not fatal
  CHECK(!down.resolvent_ratios.empty());
}

TEST_CASE("log-embedding report: zero field and rescaling bookkeeping") {
  const Manifold m = make_cycle(16);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  const LogEmbeddingReport rep = log_embedding_report(op, m, 1.5, 2.0, 5, 31, false);
  REQUIRE(rep.ratios.size() == 4 * 5);  // rescalings 1, 10, 100, 1000 per trial
  for (double r : rep.ratios) {
    CHECK(r >= 0.0);
    CHECK(std::isfinite(r));
  }
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.total_measure == 16.0);

  // homogeneity bookkeeping: BMO doubles while the log term grows slowly
  SplitMix64 rng(7);
  RealField f(16);
  for (int i = 0; i < 16; ++i) f(i) = rng.next_normal();
  CHECK(bmo_norm(m, RealField(2.0 * f)) == Catch::Approx(2.0 * bmo_norm(m, f)).epsilon(1e-12));

  const LogEmbeddingReport semi = log_embedding_report(op, m, 1.5, 2.0, 3, 31, true);
  CHECK(semi.max_ratio > 0.0);
}

TEST_CASE("embedding ratios are stable across the size ladder") {
  double emb_lo = kInf, emb_hi = 0.0;
  for (int n : {32, 64, 128}) {
    const Manifold m = make_cycle(n);
    const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
    const EmbeddingReport rep = embedding_report(op, m, 1.0, 2.0, 4.0, 20, 2026);
    emb_lo = std::min(emb_lo, rep.max_resolvent_ratio);
    emb_hi = std::max(emb_hi, rep.max_resolvent_ratio);
  }
  CHECK(emb_hi / emb_lo < 4.0);

  double log_lo = kInf, log_hi = 0.0;
  for (int n : {64, 128}) {
    const Manifold m = make_cycle(n);
    const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
    const LogEmbeddingReport rep = log_embedding_report(op, m, 1.0, 2.0, 50, 2026, false);
    log_lo = std::min(log_lo, rep.max_ratio);
    log_hi = std::max(log_hi, rep.max_ratio);
  }
  CHECK(log_hi / log_lo < 4.0);
}

TEST_CASE("equivalence report: ratios bounded and deterministic") {
  const Manifold m = make_cycle(32);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  const EquivalenceReport a = equivalence_report(op, 0.5, 2.0, 20, 77);
  const EquivalenceReport b = equivalence_report(op, 0.5, 2.0, 20, 77);
  REQUIRE(!a.ratios.empty());
  CHECK(a.ratios == b.ratios);
  CHECK(a.min_ratio > 0.0);
  CHECK(a.max_ratio < kInf);
  CHECK(a.interval_constant() >= 1.0);
  for (double r : a.ratios) {
    CHECK(r >= a.min_ratio);
    CHECK(r <= a.max_ratio);
  }
}

TEST_CASE("ensemble fields are seeded, diverse, and trial-stable") {
  const Manifold m = make_cycle(16);
  const SpectralOperator op = assemble_operator(m, OperatorForm::combinatorial);
  const RealField a = ensemble_field(op, 5, 3);
  const RealField b = ensemble_field(op, 5, 3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const RealField c = ensemble_field(op, 6, 3);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  // prefix property: field at index i does not depend on how many trials run
  const RealField d = ensemble_field(op, 5, 3);
  CHECK((a - d).cwiseAbs().maxCoeff() == 0.0);
  const RealField z = project_zero_mean(op, a);
  CHECK(std::abs(op.mean(z)) < 1e-12);
}
