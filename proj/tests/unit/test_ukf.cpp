#include <doctest.h>

#include <cmath>

#include "sohkit/errors.hpp"
#include "sohkit/profiles.hpp"
#include "sohkit/ukf.hpp"

using namespace sohkit;

namespace {

bool psd_within(const Eigen::Matrix3d& p, double jitter = 1e-12) {
    Eigen::LLT<Eigen::Matrix3d> llt(p + jitter * Eigen::Matrix3d::Identity());
    return llt.info() == Eigen::Success;
}

}  // namespace

TEST_CASE("sigma points: count, weights, recombination") {
    UkfState state;
    state.mean = Eigen::Vector3d(0.6, 0.01, 0.012);
    state.covariance = Eigen::Vector3d(1e-3, 1e-4, 1e-6).asDiagonal();
    const UkfConfig cfg;

    const SigmaPoints sp = sigma_points(state, cfg);
    CHECK(sp.points.size() == 7);

    double wsum = 0.0;
    for (double w : sp.mean_weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

    // recombining untouched points reproduces mean and covariance
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int i = 0; i < 7; ++i) mean += sp.mean_weights[std::size_t(i)] * sp.points[std::size_t(i)];
    CHECK((mean - state.mean).norm() < 1e-9);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 7; ++i) {
        const Eigen::Vector3d d = sp.points[std::size_t(i)] - mean;
        cov += sp.cov_weights[std::size_t(i)] * (d * d.transpose());
    }
    CHECK((cov - state.covariance).norm() < 1e-9);
}

TEST_CASE("sigma points: unit-basis offsets when n + lambda = 1") {
    UkfState state;
    state.mean = Eigen::Vector3d::Zero();
    state.covariance = Eigen::Matrix3d::Identity();
    UkfConfig cfg;
    cfg.alpha = 1.0;
    cfg.kappa = -2.0;  // lambda = 1*(3-2) - 3 = -2, so n + lambda = 1

    const SigmaPoints sp = sigma_points(state, cfg);
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d unit = Eigen::Vector3d::Zero();
        unit(i) = 1.0;
        CHECK((sp.points[std::size_t(1 + i)] - unit).norm() < 1e-12);
        CHECK((sp.points[std::size_t(4 + i)] + unit).norm() < 1e-12);
    }
}

TEST_CASE("sigma points reject a degenerate covariance") {
    UkfState state;
    state.covariance = Eigen::Matrix3d::Zero();
    state.covariance(0, 0) = -1.0;
    CHECK_THROWS_AS(sigma_points(state, UkfConfig{}), NumericError);
}

TEST_CASE("predict: equilibrium and noise growth") {
    const CellParams cell;
    UkfConfig cfg;

    SUBCASE("zero current keeps soc, decays v_rc") {
        cfg.process_noise_diag = Eigen::Vector3d(1e-30, 1e-30, 1e-30);
        UkfState s;
        s.mean = Eigen::Vector3d(0.7, 0.05, 0.01);
        s.covariance = Eigen::Vector3d(1e-4, 1e-4, 1e-8).asDiagonal();
        const UkfState next = predict(s, cfg, cell, 0.0, 298.15, 1.0);
        CHECK(next.mean(0) == doctest::Approx(0.7).epsilon(1e-9));
        CHECK(next.mean(1) < 0.05);
        CHECK(next.mean(1) > 0.0);
        CHECK(next.mean(2) == doctest::Approx(0.01).epsilon(1e-9));
    }

    SUBCASE("covariance trace grows under near-identity dynamics") {
        CellParams slow = cell;
        slow.r1_ohm = 1e6;
        slow.c1_farad = 1e6;  // v_rc decay ~ 1e-12 per second
        UkfState s;
        s.mean = Eigen::Vector3d(0.5, 0.0, 0.01);
        s.covariance = Eigen::Vector3d(1e-6, 1e-6, 1e-8).asDiagonal();
        const UkfState next = predict(s, cfg, slow, 0.0, 298.15, 1.0);
        CHECK(next.covariance.trace() > s.covariance.trace());
    }

    SUBCASE("deterministic") {
        UkfState s;
        const UkfState a = predict(s, cfg, cell, 1.5, 298.15, 1.0);
        const UkfState b = predict(s, cfg, cell, 1.5, 298.15, 1.0);
        CHECK(a.mean == b.mean);
        CHECK(a.covariance == b.covariance);
    }
}

TEST_CASE("update: zero innovation leaves the mean, gain shrinks covariance") {
    const CellParams cell;
    const UkfConfig cfg;
    UkfState s;
    // interior of an ocv segment: h is linear there, so the transform's
    // predicted measurement equals h(mean)
    s.mean = Eigen::Vector3d(0.62, 0.0, 0.01);
    s.covariance = Eigen::Vector3d(1e-4, 1e-6, 1e-8).asDiagonal();

    const double i_meas = 2.0;
    const double h_mean = ocv(cell, 0.62) - i_meas * 0.01 - 0.0;

    SUBCASE("measurement equals prediction") {
        const UkfState next = update(s, cfg, cell, i_meas, h_mean);
        CHECK((next.mean - s.mean).norm() < 1e-9);
    }

    SUBCASE("posterior trace never exceeds prior trace") {
        const UkfState next = update(s, cfg, cell, i_meas, h_mean + 0.05);
        CHECK(next.covariance.trace() <= s.covariance.trace() + 1e-15);
        CHECK(psd_within(next.covariance));
    }
}

TEST_CASE("filter converges from a +0.2 soc mis-initialization") {
    // noiseless simulated discharge as ground truth
    SimSpec spec;
    spec.sim_id = "ukf_convergence";
    spec.profile.kind = ProfileKind::Constant;
    spec.profile.amplitude_a = 13.5;
    spec.cell.aging = AgingParams::disabled();
    spec.max_duration_s = 2.0 * 3600.0;

    const Trace truth = run_simulation(spec, false);
    REQUIRE(truth.rows() == 7201);

    UkfConfig cfg;
    UkfState est;
    est.mean = Eigen::Vector3d(truth.soc_true[0] + 0.2, 0.0, spec.cell.r0_init_ohm);
    est.covariance = Eigen::Vector3d(0.05, 1e-4, 1e-8).asDiagonal();

    double worst_after_600 = 0.0;
    for (std::size_t n = 0; n < truth.rows(); ++n) {
        if (n > 0)
            est = predict(est, cfg, spec.cell, truth.current_a[n - 1],
                          truth.t_cell_c[n] + defaults::kKelvinOffset, 1.0);
        est = update(est, cfg, spec.cell, truth.current_a[n], truth.voltage_v[n]);
        REQUIRE(psd_within(est.covariance));
        if (truth.time_s[n] >= 600.0)
            worst_after_600 = std::max(worst_after_600,
                                       std::abs(est.soc_est() - truth.soc_true[n]));
    }
    CHECK(worst_after_600 < 0.02);
}

TEST_CASE("noiseless rmse under correct initialization") {
    SimSpec spec;
    spec.sim_id = "ukf_rmse";
    spec.profile.kind = ProfileKind::Constant;
    spec.profile.amplitude_a = 13.5;
    spec.cell.aging = AgingParams::disabled();
    spec.max_duration_s = 2.0 * 3600.0;

    const Trace truth = run_simulation(spec, false);

    UkfConfig cfg;
    UkfState est;
    est.mean = Eigen::Vector3d(truth.soc_true[0], 0.0, spec.cell.r0_init_ohm);
    est.covariance = Eigen::Vector3d(1e-4, 1e-6, 1e-8).asDiagonal();

    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < truth.rows(); ++n) {
        if (n > 0)
            est = predict(est, cfg, spec.cell, truth.current_a[n - 1],
                          truth.t_cell_c[n] + defaults::kKelvinOffset, 1.0);
        est = update(est, cfg, spec.cell, truth.current_a[n], truth.voltage_v[n]);
        if (truth.time_s[n] >= 300.0) {  // burn-in
            const double e = est.soc_est() - truth.soc_true[n];
            sse += e * e;
            ++count;
        }
    }
    CHECK(std::sqrt(sse / double(count)) < 0.02);
}

TEST_CASE("soh_from_r0 inverts the growth law") {
    const CellParams cell;  // gamma = 1, r0_init = 0.01
    CHECK(soh_from_r0(cell, 0.01) == doctest::Approx(1.0));
    CHECK(soh_from_r0(cell, 0.02) == doctest::Approx(0.0));
    CHECK(soh_from_r0(cell, 0.015) == doctest::Approx(0.5));
    CHECK_THROWS_AS(soh_from_r0(cell, 0.0), NumericError);
}
