#pragma once

#include <array>

#include <Eigen/Dense>

#include "sohkit/constants.hpp"
#include "sohkit/ecm.hpp"

namespace sohkit {

/// Unscented Kalman filter over the state [soc, v_rc, r0]. The series
/// resistance follows a random walk; soc and v_rc follow the cell dynamics.
struct UkfConfig {
    double alpha = defaults::kUkfAlpha;
    double beta = defaults::kUkfBeta;
    double kappa = defaults::kUkfKappa;
    Eigen::Vector3d process_noise_diag{defaults::kUkfProcessNoiseSoc,
                                       defaults::kUkfProcessNoiseVrc,
                                       defaults::kUkfProcessNoiseR0};
    double measurement_noise = defaults::kUkfMeasurementNoiseV2;  // V^2

    void validate() const;
};

struct UkfState {
    Eigen::Vector3d mean{0.5, 0.0, defaults::kR0InitOhm};  // soc, v_rc, r0
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity() * 1e-4;

    double soc_est() const { return mean(0); }
    double v_rc_est() const { return mean(1); }
    double r0_est() const { return mean(2); }
};

struct SigmaPoints {
    std::array<Eigen::Vector3d, 7> points;  // mean + 2n columns
    std::array<double, 7> mean_weights;
    std::array<double, 7> cov_weights;
};

/// Unscented transform points for n = 3; throws NumericError when the
/// covariance is not positive definite.
SigmaPoints sigma_points(const UkfState& state, const UkfConfig& cfg);

/// Time update: propagates sigma points through the cell dynamics under the
/// given current and adds process noise.
UkfState predict(const UkfState& state, const UkfConfig& cfg, const CellParams& params,
                 double current_a, double t_cell_k, double dt_s);

/// Measurement update against the observed terminal voltage;
/// h(x) = ocv(soc) - current * r0 - v_rc.
UkfState update(const UkfState& state, const UkfConfig& cfg, const CellParams& params,
                double current_a, double measured_voltage_v);

/// SOH read-out from the estimated series resistance, inverting the
/// resistance-growth law of the cell model.
double soh_from_r0(const CellParams& params, double r0_est_ohm);

}  // namespace sohkit
