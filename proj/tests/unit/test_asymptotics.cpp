#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nlstefan/asymptotics.hpp"
#include "oracles.hpp"

using namespace nlstefan;

namespace {

Grid box_grid() { return Grid::make_1d(321, 0.05, -8.0); }

SimConfig long_config(double t_end = 3000.0) {
  SimConfig c;
  c.kernel = KernelSpec{KernelProfile::tent, 1.0};
  c.dt = 0.1;
  c.t_end = t_end;
  c.snapshot_stride = 0;
  return c;
}

// Two height-2 width-1 blocks of opposite sign centered at +-c.
Field opposed_blocks(const Grid& g, double c) {
  Field f = oracles::block_1d(g, c - 0.5, c + 0.5, 2.0);
  Field neg = oracles::block_1d(g, -c - 0.5, -c + 0.5, 2.0);
  for (index_t i = 0; i < f.size(); ++i) f[i] -= neg[i];
  return f;
}

// Antisymmetric data whose phases erode each other without either vanishing.
Field antisymmetric_blocks(const Grid& g) {
  Field f(g);
  for (index_t i = 0; i < g.node_count(); ++i) {
    double x = g.coord(i, 0);
    if (x > 1e-12 && x <= 1.5 + 1e-12) f[i] = -2.0;
    if (x < -1e-12 && x >= -1.5 - 1e-12) f[i] = 2.0;
  }
  return f;
}

// A big positive block heating a shallow negative dip next to it; the dip
// loses its phase while the positive mesa is still relaxing.
Field melting_dip(const Grid& g) {
  Field f = oracles::block_1d(g, -1.0, 1.0, 1.8);
  Field dip = oracles::block_1d(g, 1.8, 2.2, 1.15);
  for (index_t i = 0; i < f.size(); ++i) f[i] -= dip[i];
  return f;
}

}  // namespace

TEST_CASE("one-phase projection of subcritical data is the identity") {
  Grid g = box_grid();
  Field f = oracles::block_1d(g, -1.0, 1.0, 0.8);
  OnePhaseProjection p = project_one_phase_full(f, long_config());
  CHECK(p.t_reached == 0.0);
  CHECK(p.residual == 0.0);
  for (index_t i = 0; i < f.size(); ++i) CHECK(p.limit[i] == f[i]);
}

TEST_CASE("one-phase projection flattens a supercritical block") {
  Grid g = box_grid();
  Field f = oracles::block_1d(g, -1.0, 1.0, 2.5);
  SimConfig c = long_config();
  OnePhaseProjection p = project_one_phase_full(f, c);

  CHECK(p.residual <= default_gamma_stop_tol(f));
  CHECK(integral(p.limit) == Catch::Approx(integral(f)).epsilon(0).margin(1e-9));
  CHECK(min_value(p.w_inf) >= 0.0);
  // Excess above the obstacle at stop is stopping noise only.
  CHECK(max_value(p.limit) <= 1.0 + p.residual / g.h + 1e-12);

  // The limit is carried by the accumulated potential.
  DiscreteKernel k = build_kernel(c.kernel.profile, c.kernel.radius, g.dim, g.h);
  Field recon = axpy(axpy(f, 1.0, convolve(k, p.w_inf)), -1.0, p.w_inf);
  for (index_t i = 0; i < f.size(); ++i)
    CHECK(p.limit[i] == Catch::Approx(recon[i]).epsilon(0).margin(1e-11));

  CHECK_THROWS_AS(project_one_phase_full(axpy(f, -2.0, f), c), std::invalid_argument);
}

TEST_CASE("interaction classifier separates the three regimes") {
  Grid g = box_grid();
  SimConfig c = long_config(20.0);  // classifier extends its own horizon

  Field one_signed = oracles::block_1d(g, -1.0, 1.0, 2.0);
  InteractionReport r0 = check_noninteraction(one_signed, c);
  CHECK(r0.level == InteractionLevel::strong);
  CHECK(r0.dist_projected_supports == std::numeric_limits<double>::infinity());

  InteractionReport far = check_noninteraction(opposed_blocks(g, 4.0), c);
  CHECK(far.level == InteractionLevel::strong);
  CHECK(far.dist_projected_supports > 2.0);

  InteractionReport mid = check_noninteraction(opposed_blocks(g, 1.5), c);
  CHECK(mid.level == InteractionLevel::temperature);
  CHECK(mid.dist_temperature_envelopes >= 1.0);
  CHECK(mid.dist_projected_supports <= 2.0);

  InteractionReport close = check_noninteraction(opposed_blocks(g, 0.8), c);
  CHECK(close.level == InteractionLevel::none);
  CHECK(close.dist_temperature_envelopes < 1.0);
}

TEST_CASE("the two stationary solvers agree on one-signed data") {
  Grid g = box_grid();
  Field f = oracles::block_1d(g, -1.0, 1.0, 2.5);
  SimConfig c = long_config();
  c.stop = StoppingRule::gamma_l1(1e-12 * (1.0 + l1_norm(f)));
  DiscreteKernel k = build_kernel(c.kernel.profile, c.kernel.radius, g.dim, g.h);

  BopResult bt = solve_bop_time(f, c);
  BopResult bd = solve_bop_direct(f, k);

  CHECK(bt.method == BopMethod::time_integration);
  CHECK(bd.method == BopMethod::direct_sweep);
  CHECK(bd.sweeps >= 1);
  CHECK(l1_distance(bt.w_inf, bd.w_inf) <= 1e-6);
  CHECK(l1_distance(bt.f_tilde, bd.f_tilde) <= 1e-6);
  CHECK(bt.residuals.complementarity <= 1e-8);
  CHECK(bd.residuals.complementarity <= 1e-8);
  CHECK(bt.residuals.bound <= 1e-8);
  CHECK(bd.residuals.bound <= 1e-8);

  // Mass: the potential redistributes but does not create.
  CHECK(integral(bt.f_tilde) == Catch::Approx(integral(f)).epsilon(0).margin(1e-9));
}

TEST_CASE("direct solver is order-robust and odd") {
  Grid g = box_grid();
  Field f = oracles::block_1d(g, -1.0, 1.0, 2.5);
  DiscreteKernel k = build_kernel(KernelProfile::tent, 1.0, 1, g.h);

  BopResult asc = solve_bop_direct(f, k);
  BopResult desc = solve_bop_direct(f, k, 200000, 1e-12, SweepOrder::descending);
  CHECK(l1_distance(asc.w_inf, desc.w_inf) <= 1e-8);

  Field nf = axpy(Field(g), -1.0, f);
  BopResult neg = solve_bop_direct(nf, k);
  for (index_t i = 0; i < f.size(); ++i) {
    CHECK(neg.w_inf[i] == -asc.w_inf[i]);
    CHECK(neg.f_tilde[i] == -asc.f_tilde[i]);
  }
}

TEST_CASE("direct solver rejects bad setups") {
  Grid g = box_grid();
  Field f = oracles::block_1d(g, -1.0, 1.0, 2.5);
  DiscreteKernel k = build_kernel(KernelProfile::tent, 1.0, 1, g.h);
  CHECK_THROWS_AS(solve_bop_direct(f, k, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_bop_direct(f, k, 100, 0.0), std::invalid_argument);
  CHECK_THROWS_WITH(solve_bop_direct(f, k, 2, 1e-15),
                    Catch::Matchers::ContainsSubstring("no convergence"));
  DiscreteKernel wrong = build_kernel(KernelProfile::tent, 1.0, 1, 0.1);
  CHECK_THROWS_WITH(solve_bop_direct(f, wrong, 100, 1e-12),
                    Catch::Matchers::ContainsSubstring("grids disagree"));
}

TEST_CASE("time route refuses interacting phases") {
  Grid g = box_grid();
  SimConfig c = long_config();
  CHECK_THROWS_WITH(solve_bop_time(opposed_blocks(g, 0.8), c),
                    Catch::Matchers::ContainsSubstring("phases interact"));
}

TEST_CASE("separated phases evolve as the difference of one-phase runs") {
  Grid g = box_grid();
  Field f = opposed_blocks(g, 4.0);
  SimConfig c = long_config(2.0);
  c.snapshot_stride = 1;

  Trajectory split = decompose_noninteracting(f, c);
  Trajectory full = integrate(f, c);
  REQUIRE(split.snap_times.size() == full.snap_times.size());
  double worst = 0.0;
  for (size_t k = 0; k < split.snapshots.size(); ++k)
    worst = std::max(worst, linf_norm(axpy(full.snapshots[k], -1.0, split.snapshots[k])));
  CHECK(worst <= 1e-10);

  CHECK_THROWS_WITH(decompose_noninteracting(opposed_blocks(g, 0.8), c),
                    Catch::Matchers::ContainsSubstring("strongly separated"));
}

TEST_CASE("general projection classifies separated data as noninteracting") {
  Grid g = box_grid();
  Field f = opposed_blocks(g, 4.0);
  SimConfig c = long_config();
  GeneralProjection p = project_general(f, c);
  CHECK(p.status == ProjectionStatus::noninteracting);
  CHECK(p.interaction.level == InteractionLevel::strong);
  // Overshoot above the obstacle is stopping noise, of order tol / h.
  CHECK(linf_norm(p.limit) <= 1.0 + 1e-5);
}

TEST_CASE("general projection of mutually eroding phases converges") {
  Grid g = box_grid();
  Field f = antisymmetric_blocks(g);
  GeneralProjection p = project_general(f, long_config());
  CHECK(p.status == ProjectionStatus::converged);
  CHECK(p.interaction.level == InteractionLevel::none);
  // Antisymmetry survives to the limit.
  for (index_t i = 0; i < g.node_count(); ++i) {
    index_t j = g.node_count() - 1 - i;
    CHECK(p.limit[i] == Catch::Approx(-p.limit[j]).epsilon(0).margin(1e-9));
  }
}

TEST_CASE("general projection continues through a phase loss") {
  Grid g = box_grid();
  Field f = melting_dip(g);
  GeneralProjection p = project_general(f, long_config());
  CHECK(p.status == ProjectionStatus::phase_loss_continuation);
  CHECK(min_value(p.limit) >= -1.0 - 1e-9);
}

TEST_CASE("general projection reports an exhausted horizon as unresolved") {
  Grid g = box_grid();
  Field f = antisymmetric_blocks(g);
  GeneralProjection p = project_general(f, long_config(1.0));
  CHECK(p.status == ProjectionStatus::unresolved);
}
