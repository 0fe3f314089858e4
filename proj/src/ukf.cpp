#include "sohkit/ukf.hpp"

#include <algorithm>
#include <cmath>

#include "sohkit/errors.hpp"

namespace sohkit {

namespace {

constexpr int kN = 3;

double lambda_of(const UkfConfig& cfg) {
    return cfg.alpha * cfg.alpha * (kN + cfg.kappa) - kN;
}

// soc/v_rc dynamics of the cell model; r0 is a random walk. The filter infers
// the fade level (and with it the effective capacity) from its own r0 state.
// Sigma points are never clamped: with a small alpha the +/- weights are huge
// and clamping would destroy their cancellation.
Eigen::Vector3d propagate(const Eigen::Vector3d& x, const CellParams& params,
                          double current_a, double dt_s) {
    const double gamma = params.aging.gamma_r_growth;
    double loss_est = 0.0;
    if (gamma > 0.0)
        loss_est = std::clamp((x(2) / params.r0_init_ohm - 1.0) / gamma, 0.0, 1.0);
    const double eff_capacity_ah = params.nominal_capacity_ah * std::max(1.0 - loss_est, 1e-6);

    Eigen::Vector3d out;
    out(0) = x(0) - current_a * dt_s / (3600.0 * eff_capacity_ah);
    out(1) = x(1) + dt_s * (-x(1) / (params.r1_ohm * params.c1_farad) +
                            current_a / params.c1_farad);
    out(2) = x(2);
    return out;
}

// open-circuit voltage extended linearly beyond [0, 1] so the measurement
// function stays smooth for out-of-range sigma points
double ocv_extended(const CellParams& params, double soc) {
    const auto& tab = params.ocv_table;
    if (soc < 0.0) {
        const double slope =
            (tab[1].second - tab[0].second) / (tab[1].first - tab[0].first);
        return tab.front().second + slope * soc;
    }
    if (soc > 1.0) {
        const auto n = tab.size();
        const double slope = (tab[n - 1].second - tab[n - 2].second) /
                             (tab[n - 1].first - tab[n - 2].first);
        return tab.back().second + slope * (soc - 1.0);
    }
    return ocv(params, soc);
}

double measure(const Eigen::Vector3d& x, const CellParams& params, double current_a) {
    return ocv_extended(params, x(0)) - current_a * x(2) - x(1);
}

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& p) {
    return 0.5 * (p + p.transpose());
}

}  // namespace

void UkfConfig::validate() const {
    if (alpha <= 0) throw ConfigError("ukf alpha must be > 0");
    if ((process_noise_diag.array() <= 0).any() || measurement_noise <= 0)
        throw ConfigError("ukf noise variances must be > 0");
}

SigmaPoints sigma_points(const UkfState& state, const UkfConfig& cfg) {
    const double lambda = lambda_of(cfg);
    const double scale = kN + lambda;

    Eigen::LLT<Eigen::Matrix3d> llt(scale * state.covariance);
    if (llt.info() != Eigen::Success)
        throw NumericError("sigma_points: covariance not positive definite");
    const Eigen::Matrix3d sqrt_p = llt.matrixL();

    SigmaPoints sp;
    sp.points[0] = state.mean;
    for (int i = 0; i < kN; ++i) {
        sp.points[1 + i] = state.mean + sqrt_p.col(i);
        sp.points[1 + kN + i] = state.mean - sqrt_p.col(i);
    }
    sp.mean_weights[0] = lambda / scale;
    sp.cov_weights[0] = lambda / scale + (1.0 - cfg.alpha * cfg.alpha + cfg.beta);
    for (int i = 1; i < 2 * kN + 1; ++i) {
        sp.mean_weights[i] = 1.0 / (2.0 * scale);
        sp.cov_weights[i] = sp.mean_weights[i];
    }
    return sp;
}

UkfState predict(const UkfState& state, const UkfConfig& cfg, const CellParams& params,
                 double current_a, double /*t_cell_k*/, double dt_s) {
    if (!(dt_s > 0)) throw NumericError("ukf predict: dt must be > 0");
    SigmaPoints sp = sigma_points(state, cfg);

    std::array<Eigen::Vector3d, 7> propagated;
    for (int i = 0; i < 2 * kN + 1; ++i)
        propagated[i] = propagate(sp.points[i], params, current_a, dt_s);

    UkfState out;
    out.mean.setZero();
    for (int i = 0; i < 2 * kN + 1; ++i) out.mean += sp.mean_weights[i] * propagated[i];

    Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 2 * kN + 1; ++i) {
        const Eigen::Vector3d d = propagated[i] - out.mean;
        p += sp.cov_weights[i] * (d * d.transpose());
    }
    p += cfg.process_noise_diag.asDiagonal();
    out.covariance = symmetrize(p);
    return out;
}

UkfState update(const UkfState& state, const UkfConfig& cfg, const CellParams& params,
                double current_a, double measured_voltage_v) {
    SigmaPoints sp = sigma_points(state, cfg);

    std::array<double, 7> predicted_v;
    double v_mean = 0.0;
    for (int i = 0; i < 2 * kN + 1; ++i) {
        predicted_v[i] = measure(sp.points[i], params, current_a);
        v_mean += sp.mean_weights[i] * predicted_v[i];
    }

    double s = cfg.measurement_noise;
    Eigen::Vector3d cross = Eigen::Vector3d::Zero();
    for (int i = 0; i < 2 * kN + 1; ++i) {
        const double dv = predicted_v[i] - v_mean;
        s += sp.cov_weights[i] * dv * dv;
        cross += sp.cov_weights[i] * (sp.points[i] - state.mean) * dv;
    }
    if (!(s > 0)) throw NumericError("ukf update: innovation variance <= 0");

    const Eigen::Vector3d gain = cross / s;
    UkfState out;
    out.mean = state.mean + gain * (measured_voltage_v - v_mean);
    out.covariance = symmetrize(state.covariance - gain * s * gain.transpose());
    return out;
}

double soh_from_r0(const CellParams& params, double r0_est_ohm) {
    if (!(r0_est_ohm > 0)) throw NumericError("soh_from_r0: resistance must be > 0");
    const double gamma = params.aging.gamma_r_growth;
    if (gamma <= 0.0) return 1.0;  // resistance carries no fade information
    const double loss = std::clamp((r0_est_ohm / params.r0_init_ohm - 1.0) / gamma, 0.0, 1.0);
    return 1.0 - loss;
}

}  // namespace sohkit
