// Lift/drag functional: beta vectors, closed-curve identities, and the
// exact linearization against a finite-difference oracle.
#include <cmath>
#include <random>

#include "doctest.h"
#include "goalfv/functional.hpp"

using namespace goalfv;

namespace {

MeshHierarchy wall_square(int refinements) {
  MeshHierarchy m = MeshHierarchy::build(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
      {{0, 1, BoundaryMarker::wall},
       {1, 2, BoundaryMarker::farfield},
       {2, 3, BoundaryMarker::farfield},
       {3, 0, BoundaryMarker::farfield}});
  if (refinements > 0) m.uniform_refine(refinements);
  return m;
}

}  // namespace

TEST_CASE("beta vectors") {
  FunctionalSpec drag{FunctionalKind::Drag, 0.0, 1.0};
  FunctionalSpec lift{FunctionalKind::Lift, 0.0, 1.0};
  CHECK(beta_vector(drag).x == doctest::Approx(1.0));
  CHECK(beta_vector(drag).y == doctest::Approx(0.0));
  CHECK(beta_vector(lift).x == doctest::Approx(0.0));
  CHECK(beta_vector(lift).y == doctest::Approx(1.0));

  for (double a : {-33.0, 0.0, 1.25, 7.5, 90.0}) {
    FunctionalSpec d{FunctionalKind::Drag, a, 2.5};
    FunctionalSpec l{FunctionalKind::Lift, a, 2.5};
    CHECK(std::abs(dot(beta_vector(d), beta_vector(l))) < 1e-15);
  }
}

TEST_CASE("normalization constant") {
  FlowConfig cfg;
  cfg.mach = 0.8;
  const FunctionalSpec spec = make_functional(FunctionalKind::Drag, cfg);
  CHECK(spec.c_norm == doctest::Approx(0.5 * 0.8 * 0.8).epsilon(1e-14));
}

TEST_CASE("uniform pressure over a closed wall integrates to zero") {
  FlowConfig cfg;
  cfg.mach = 0.4;
  const MeshHierarchy m = generate_naca_omesh("0012", 32, 6, 15.0);
  const PatchCache cache = build_patch_cache(m);
  // constant state: traces are exact, boundary pressure is uniform
  const std::vector<State4> u(m.active_count(), freestream_state(cfg));
  for (FunctionalKind kind : {FunctionalKind::Drag, FunctionalKind::Lift}) {
    const FunctionalSpec spec = make_functional(kind, cfg);
    const double j = evaluate_functional(u, m, cache, cfg, spec, {});
    CHECK(std::abs(j) <= 1e-12);
  }
}

TEST_CASE("no wall edges is an error") {
  FlowConfig cfg;
  MeshHierarchy m = MeshHierarchy::build(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
      {{0, 1, BoundaryMarker::farfield},
       {1, 2, BoundaryMarker::farfield},
       {2, 3, BoundaryMarker::farfield},
       {3, 0, BoundaryMarker::farfield}});
  m.uniform_refine(1);
  const PatchCache cache = build_patch_cache(m);
  const std::vector<State4> u(m.active_count(), freestream_state(cfg));
  CHECK_THROWS_AS(
      evaluate_functional(u, m, cache, cfg, make_functional(FunctionalKind::Drag, cfg), {}),
      MeshError);
}

TEST_CASE("linearization matches finite differences of the functional") {
  FlowConfig cfg;
  cfg.mach = 0.6;
  cfg.alpha_deg = 1.5;
  const MeshHierarchy m = wall_square(2);
  const PatchCache cache = build_patch_cache(m);
  const FunctionalSpec spec = make_functional(FunctionalKind::Drag, cfg);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  const State4 inf = freestream_state(cfg);
  std::vector<State4> u(m.active_count());
  for (auto& s : u) {
    s = inf;
    for (int c = 0; c < 4; ++c) s[c] *= 1.0 + d(rng);
    s.E += 0.2;
  }

  ResidualOptions opts;
  opts.use_limiter = false;  // smooth path for the FD oracle
  const std::vector<State4> dj = linearize_functional(u, m, cache, cfg, spec, opts);

  // perturb every element that carries sensitivity plus a few that do not
  const double j0 = evaluate_functional(u, m, cache, cfg, spec, opts);
  (void)j0;
  int nonzero = 0;
  for (int i = 0; i < m.active_count(); ++i) {
    for (int c = 0; c < 4; ++c) {
      const double h = 1e-6 * (1.0 + std::abs(u[i][c]));
      auto up = u, um = u;
      up[i][c] += h;
      um[i][c] -= h;
      const double fp = evaluate_functional(up, m, cache, cfg, spec, opts);
      const double fm = evaluate_functional(um, m, cache, cfg, spec, opts);
      const double fd = (fp - fm) / (2.0 * h);
      if (std::abs(fd) > 1e-12 || std::abs(dj[i][c]) > 1e-12) {
        CHECK(dj[i][c] == doctest::Approx(fd).epsilon(1e-6));
        ++nonzero;
      } else {
        CHECK(std::abs(dj[i][c] - fd) < 1e-10);
      }
    }
  }
  CHECK(nonzero > 0);
}

TEST_CASE("linearization is local to wall stencils") {
  FlowConfig cfg;
  cfg.mach = 0.5;
  const MeshHierarchy m = wall_square(3);
  const PatchCache cache = build_patch_cache(m);
  const FunctionalSpec spec = make_functional(FunctionalKind::Drag, cfg);
  const std::vector<State4> u(m.active_count(), freestream_state(cfg));
  const std::vector<State4> dj = linearize_functional(u, m, cache, cfg, spec, {});

  // elements whose patch does not touch a wall element carry zero sensitivity
  std::vector<char> wall_stencil(m.active_count(), 0);
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    if (m.edges()[e].marker != BoundaryMarker::wall) continue;
    const int i = m.active_index_of(m.edges()[e].left);
    wall_stencil[i] = 1;
    for (int s = cache.offsets[i]; s < cache.offsets[i + 1]; ++s)
      wall_stencil[cache.neighbors[s]] = 1;
  }
  int far_zero = 0;
  for (int i = 0; i < m.active_count(); ++i) {
    if (wall_stencil[i]) continue;
    for (int c = 0; c < 4; ++c) CHECK(dj[i][c] == 0.0);
    ++far_zero;
  }
  CHECK(far_zero > 0);
}

TEST_CASE("linearization scales inversely with the normalization") {
  FlowConfig cfg;
  cfg.mach = 0.6;
  const MeshHierarchy m = wall_square(2);
  const PatchCache cache = build_patch_cache(m);
  std::vector<State4> u(m.active_count(), freestream_state(cfg));
  u[0].rho *= 1.01;

  FunctionalSpec s1{FunctionalKind::Drag, cfg.alpha_deg, 1.0};
  FunctionalSpec s2{FunctionalKind::Drag, cfg.alpha_deg, 2.0};
  const auto d1 = linearize_functional(u, m, cache, cfg, s1, {});
  const auto d2 = linearize_functional(u, m, cache, cfg, s2, {});
  for (int i = 0; i < m.active_count(); ++i)
    for (int c = 0; c < 4; ++c)
      CHECK(d2[i][c] == doctest::Approx(0.5 * d1[i][c]).epsilon(1e-14));
}
