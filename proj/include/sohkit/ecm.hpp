#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sohkit/constants.hpp"

namespace sohkit {

/// Free parameters of the calendar and cycle capacity-loss terms.
struct AgingParams {
    double k_cal = defaults::kCalRatePerSqrtHour;  // per sqrt-hour
    double ea_over_r = defaults::kEaOverRKelvin;   // Arrhenius activation, K
    double t_ref = defaults::kTRefKelvin;          // K
    double soc_stress_slope = defaults::kSocStressSlope;
    double k_cyc = defaults::kCycRatePerCycle;     // per completed cycle
    double alpha_dod = defaults::kAlphaDod;
    double beta_current = defaults::kBetaCurrentPerCRate;  // per C-rate
    double theta_temp = defaults::kThetaTempPerKelvin;     // per K
    double gamma_r_growth = defaults::kGammaR0Growth;

    void validate() const;

    static AgingParams disabled() {
        AgingParams a;
        a.k_cal = 0.0;
        a.k_cyc = 0.0;
        return a;
    }
};

/// First-order Thevenin cell: series resistance, one RC branch, lumped thermal mass.
struct CellParams {
    double nominal_capacity_ah = defaults::kNominalCapacityAh;
    double r0_init_ohm = defaults::kR0InitOhm;
    double r1_ohm = defaults::kR1Ohm;
    double c1_farad = defaults::kC1Farad;
    double c_th = defaults::kCThJPerK;  // J/K
    double r_th = defaults::kRThKPerW;  // K/W
    std::vector<std::pair<double, double>> ocv_table;  // (soc, volts), strictly increasing
    AgingParams aging;

    CellParams();

    void validate() const;
};

enum class Phase : std::uint8_t { Idle = 0, Charging = 1, Discharging = 2 };

/// Per-cycle bookkeeping. A cycle opens when discharging starts and closes when
/// discharging starts again after a charging segment.
struct CycleTracker {
    Phase phase = Phase::Idle;
    double soc_at_phase_start = 0.0;
    double cycle_soc_min = 0.0;
    double cycle_soc_max = 0.0;
    double mean_abs_current_accum = 0.0;
    double mean_soc_accum = 0.0;
    double mean_temp_accum = 0.0;
    std::int64_t sample_count = 0;
    bool cycle_open = false;
    Phase last_active_phase = Phase::Idle;
};

/// Aggregates of one completed charge/discharge cycle.
struct CycleRecord {
    double dod = 0.0;               // cycle_soc_max - cycle_soc_min
    double mean_abs_current = 0.0;  // A
    double mean_soc = 0.0;
    double mean_temp = 0.0;         // K
};

struct BatteryState {
    double soc = 1.0;
    double v_rc = 0.0;        // RC branch polarization, V
    double temp_cell = defaults::kTRefKelvin;
    double capacity_loss = 0.0;  // fraction of nominal capacity lost
    double elapsed = 0.0;        // s
    CycleTracker cycle_tracker;
    std::int64_t saturation_count = 0;  // soc clamp events (protection circuitry)
};

struct StepResult {
    BatteryState state;
    double voltage = 0.0;  // terminal voltage under the applied current
    std::optional<CycleRecord> completed_cycle;
};

struct TrackResult {
    CycleTracker tracker;
    std::optional<CycleRecord> completed_cycle;
};

/// Open-circuit voltage by piecewise-linear interpolation of the cell table.
/// Throws NumericError for soc outside [0, 1].
double ocv(const CellParams& params, double soc);

/// Advances the cell by dt under the given current (positive = discharge) and
/// ambient temperature. Applies calendar loss every step and cycle loss when a
/// cycle completes, so capacity_loss is non-decreasing across steps. The
/// returned voltage is sampled at the pre-step state under the applied current.
StepResult step(const CellParams& params, const BatteryState& state, double current_a,
                double t_ambient_k, double dt_s);

/// Per-sample cycle state machine; |current| below 1 mA counts as idle.
TrackResult track_cycle(const CycleTracker& tracker, double soc, double current_a,
                        double temp_k);

/// Incremental square-root-of-time calendar loss over [elapsed, elapsed+dt].
double calendar_loss(const AgingParams& aging, double dt_s, double mean_soc,
                     double mean_temp_k, double elapsed_s);

/// Capacity loss attributed to one completed cycle.
double cycle_loss(const AgingParams& aging, const CycleRecord& rec,
                  double nominal_capacity_ah);

/// State of health: 1 - capacity_loss, clamped to [0, 1].
double soh(const BatteryState& state);

}  // namespace sohkit
