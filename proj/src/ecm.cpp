#include "sohkit/ecm.hpp"

#include <algorithm>
#include <cmath>

#include "sohkit/errors.hpp"

namespace sohkit {

namespace {

Phase classify(double current_a) {
    if (std::abs(current_a) < defaults::kIdleCurrentBandA) return Phase::Idle;
    return current_a > 0.0 ? Phase::Discharging : Phase::Charging;
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite input: ") + name);
}

}  // namespace

void AgingParams::validate() const {
    if (k_cal < 0 || k_cyc < 0 || ea_over_r < 0 || soc_stress_slope < 0 ||
        alpha_dod < 0 || beta_current < 0 || theta_temp < 0 || gamma_r_growth < 0)
        throw ConfigError("aging rates and exponents must be >= 0");
    if (t_ref <= 0) throw ConfigError("aging t_ref must be > 0");
}

CellParams::CellParams() {
    ocv_table.reserve(defaults::kOcvSoc.size());
    for (std::size_t i = 0; i < defaults::kOcvSoc.size(); ++i)
        ocv_table.emplace_back(defaults::kOcvSoc[i], defaults::kOcvVolt[i]);
}

void CellParams::validate() const {
    if (nominal_capacity_ah <= 0) throw ConfigError("nominal_capacity_ah must be > 0");
    if (r0_init_ohm <= 0 || r1_ohm <= 0 || c1_farad <= 0 || c_th <= 0 || r_th <= 0)
        throw ConfigError("cell electrical/thermal parameters must be > 0");
    if (ocv_table.size() < 2) throw ConfigError("ocv_table needs at least 2 knots");
    if (ocv_table.front().first != 0.0 || ocv_table.back().first != 1.0)
        throw ConfigError("ocv_table soc knots must cover [0, 1]");
    for (std::size_t i = 1; i < ocv_table.size(); ++i) {
        if (ocv_table[i].first <= ocv_table[i - 1].first)
            throw ConfigError("ocv_table soc values must be strictly increasing");
        if (ocv_table[i].second <= ocv_table[i - 1].second)
            throw ConfigError("ocv_table voltage values must be strictly increasing");
    }
    aging.validate();
}

double ocv(const CellParams& params, double soc) {
    if (!(soc >= 0.0 && soc <= 1.0))
        throw NumericError("ocv: soc outside [0, 1]");
    const auto& tab = params.ocv_table;
    auto it = std::upper_bound(tab.begin(), tab.end(), soc,
                               [](double s, const auto& knot) { return s < knot.first; });
    if (it == tab.begin()) return tab.front().second;
    if (it == tab.end()) return tab.back().second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (soc - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
}

TrackResult track_cycle(const CycleTracker& tracker, double soc, double current_a,
                        double temp_k) {
    TrackResult out{tracker, std::nullopt};
    CycleTracker& tk = out.tracker;
    const Phase p = classify(current_a);

    if (p == Phase::Discharging) {
        if (tk.cycle_open && tk.last_active_phase == Phase::Charging) {
            // discharge -> charge -> discharge completed
            CycleRecord rec;
            rec.dod = tk.cycle_soc_max - tk.cycle_soc_min;
            rec.mean_abs_current = tk.mean_abs_current_accum / double(tk.sample_count);
            rec.mean_soc = tk.mean_soc_accum / double(tk.sample_count);
            rec.mean_temp = tk.mean_temp_accum / double(tk.sample_count);
            out.completed_cycle = rec;
            tk.cycle_open = false;
            tk.mean_abs_current_accum = 0.0;
            tk.mean_soc_accum = 0.0;
            tk.mean_temp_accum = 0.0;
            tk.sample_count = 0;
        }
        if (!tk.cycle_open) {
            tk.cycle_open = true;
            tk.cycle_soc_min = soc;
            tk.cycle_soc_max = soc;
        }
    }

    if (tk.cycle_open) {
        tk.cycle_soc_min = std::min(tk.cycle_soc_min, soc);
        tk.cycle_soc_max = std::max(tk.cycle_soc_max, soc);
        tk.mean_abs_current_accum += std::abs(current_a);
        tk.mean_soc_accum += soc;
        tk.mean_temp_accum += temp_k;
        tk.sample_count += 1;
    }

    if (p != Phase::Idle) tk.last_active_phase = p;
    if (p != tk.phase) tk.soc_at_phase_start = soc;
    tk.phase = p;
    return out;
}

double calendar_loss(const AgingParams& aging, double dt_s, double mean_soc,
                     double mean_temp_k, double elapsed_s) {
    if (mean_temp_k <= 0) throw NumericError("calendar_loss: temperature must be > 0 K");
    if (aging.k_cal == 0.0) return 0.0;
    const double arrhenius = std::exp(-aging.ea_over_r * (1.0 / mean_temp_k - 1.0 / aging.t_ref));
    const double soc_stress = 1.0 + aging.soc_stress_slope * mean_soc;
    const double dt_sqrt_h = std::sqrt((elapsed_s + dt_s) / 3600.0) - std::sqrt(elapsed_s / 3600.0);
    return aging.k_cal * arrhenius * soc_stress * dt_sqrt_h;
}

double cycle_loss(const AgingParams& aging, const CycleRecord& rec,
                  double nominal_capacity_ah) {
    if (aging.k_cyc == 0.0) return 0.0;
    const double dod_stress = std::pow(rec.dod, aging.alpha_dod);
    const double c_rate = rec.mean_abs_current / nominal_capacity_ah;
    const double current_stress = 1.0 + aging.beta_current * c_rate;
    const double temp_stress = std::exp(aging.theta_temp * (rec.mean_temp - aging.t_ref));
    return aging.k_cyc * dod_stress * current_stress * temp_stress;
}

double soh(const BatteryState& state) {
    return std::clamp(1.0 - state.capacity_loss, 0.0, 1.0);
}

StepResult step(const CellParams& params, const BatteryState& state, double current_a,
                double t_ambient_k, double dt_s) {
    if (!(dt_s > 0)) throw NumericError("step: dt must be > 0");
    require_finite(current_a, "current");
    require_finite(t_ambient_k, "ambient temperature");

    const double r0_now =
        params.r0_init_ohm * (1.0 + params.aging.gamma_r_growth * state.capacity_loss);
    const double voltage = ocv(params, state.soc) - current_a * r0_now - state.v_rc;

    // effective capacity shrinks with fade; keep a floor so a fully dead cell
    // does not divide by zero inside the terminating step
    const double eff_capacity_ah =
        params.nominal_capacity_ah * std::max(1.0 - state.capacity_loss, 1e-6);

    StepResult out;
    BatteryState& s = out.state;
    s = state;

    const double soc_raw = state.soc - current_a * dt_s / (3600.0 * eff_capacity_ah);
    s.soc = std::clamp(soc_raw, 0.0, 1.0);
    if (s.soc != soc_raw) s.saturation_count += 1;

    const double tau_inv = 1.0 / (params.r1_ohm * params.c1_farad);
    s.v_rc = state.v_rc + dt_s * (-state.v_rc * tau_inv + current_a / params.c1_farad);

    const double heat_w = current_a * current_a * r0_now;
    s.temp_cell = state.temp_cell +
                  dt_s * (heat_w - (state.temp_cell - t_ambient_k) / params.r_th) / params.c_th;

    TrackResult tracked = track_cycle(state.cycle_tracker, s.soc, current_a, s.temp_cell);
    s.cycle_tracker = tracked.tracker;
    out.completed_cycle = tracked.completed_cycle;

    double dloss = calendar_loss(params.aging, dt_s, s.soc, s.temp_cell, state.elapsed);
    if (tracked.completed_cycle)
        dloss += cycle_loss(params.aging, *tracked.completed_cycle, params.nominal_capacity_ah);
    s.capacity_loss = std::min(1.0, state.capacity_loss + dloss);

    s.elapsed = state.elapsed + dt_s;
    out.voltage = voltage;

    if (!std::isfinite(s.v_rc) || !std::isfinite(s.temp_cell) || !std::isfinite(voltage))
        throw SimulationError("step: state diverged", state.elapsed);
    return out;
}

}  // namespace sohkit
