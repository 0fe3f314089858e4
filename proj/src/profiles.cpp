#include "sohkit/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "sohkit/errors.hpp"
#include "sohkit/rng.hpp"

namespace sohkit {

namespace {

// counter-based draw keyed on (seed, pulse index): the value at a pulse never
// depends on iteration order
double random_walk_magnitude(std::uint64_t seed, std::uint64_t pulse_index) {
    const int level = int(mix64(seed, pulse_index) % 8);  // 0.25 A steps up to 2.00 A
    return 0.25 * double(level + 1);
}

// filename-safe number: '.' -> 'p', '-' -> 'm'
std::string tag_number(double v) {
    std::string s = format_value(v);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
    }
    return s;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

const char* to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::Constant: return "constant";
        case ProfileKind::Square: return "square";
        case ProfileKind::RandomWalk: return "random_walk";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& name) {
    if (name == "constant") return ProfileKind::Constant;
    if (name == "square") return ProfileKind::Square;
    if (name == "random_walk") return ProfileKind::RandomWalk;
    throw ConfigError("unknown profile kind '" + name + "'");
}

void LoadProfile::validate() const {
    if (!(amplitude_a > 0)) throw ConfigError("profile amplitude must be > 0");
    if (kind == ProfileKind::Square && !(period_s > 0))
        throw ConfigError("square period must be > 0");
    if (kind == ProfileKind::RandomWalk && !(pulse_s > 0))
        throw ConfigError("random-walk pulse duration must be > 0");
    if (!(soc_low >= 0 && soc_low < soc_high && soc_high <= 1))
        throw ConfigError("need 0 <= soc_low < soc_high <= 1");
}

double current_at(const LoadProfile& profile, double t_s, ChargePhase phase) {
    const double sign = phase == ChargePhase::Discharging ? 1.0 : -1.0;
    switch (profile.kind) {
        case ProfileKind::Constant:
            return sign * profile.amplitude_a;
        case ProfileKind::Square: {
            const double in_period = std::fmod(t_s, profile.period_s);
            const bool on = in_period < 0.5 * profile.period_s;
            return on ? sign * profile.amplitude_a : 0.0;
        }
        case ProfileKind::RandomWalk: {
            const auto pulse = std::uint64_t(std::floor(t_s / profile.pulse_s));
            return sign * profile.amplitude_a * random_walk_magnitude(profile.seed, pulse);
        }
    }
    return 0.0;
}

void SimSpec::validate() const {
    profile.validate();
    cell.validate();
    if (!(max_duration_s > 0)) throw ConfigError("max_duration must be > 0");
    if (!(sample_period_s > 0)) throw ConfigError("sample_period must be > 0");
    if (!(t_ambient_k > 0)) throw ConfigError("ambient temperature must be > 0 K");
    if (sim_id.empty()) throw ConfigError("sim_id must not be empty");
}

DoeConfig DoeConfig::from_file(const KeyValueFile& cfg) {
    DoeConfig doe;
    doe.temperatures_c = cfg.get_doubles("temperatures_c", doe.temperatures_c);
    doe.amplitudes_a = cfg.get_doubles("amplitudes_a", doe.amplitudes_a);
    doe.kinds = cfg.get_strings("kinds", doe.kinds);
    if (cfg.has("rw_seeds")) {
        doe.rw_seeds.clear();
        for (auto s : cfg.get_ints("rw_seeds")) doe.rw_seeds.push_back(std::uint64_t(s));
    }
    doe.soc_low = cfg.get_double("soc_low", doe.soc_low);
    doe.soc_high = cfg.get_double("soc_high", doe.soc_high);
    doe.max_hours = cfg.get_double("max_hours", doe.max_hours);
    doe.sample_period_s = cfg.get_double("sample_period_s", doe.sample_period_s);
    doe.soh_floor = cfg.get_double("soh_floor", doe.soh_floor);
    doe.square_period_s = cfg.get_double("square_period_s", doe.square_period_s);
    doe.rw_pulse_s = cfg.get_double("rw_pulse_s", doe.rw_pulse_s);
    doe.reference_amplitude_a = cfg.get_double("reference_amplitude_a", doe.reference_amplitude_a);
    doe.reference_temperature_c =
        cfg.get_double("reference_temperature_c", doe.reference_temperature_c);
    doe.full_factorial = cfg.get_bool("full_factorial", doe.full_factorial);
    doe.validate();
    return doe;
}

void DoeConfig::validate() const {
    if (temperatures_c.empty()) throw ConfigError("doe: temperatures_c is empty");
    if (amplitudes_a.empty()) throw ConfigError("doe: amplitudes_a is empty");
    if (kinds.empty()) throw ConfigError("doe: kinds is empty");
    for (const auto& k : kinds) profile_kind_from_string(k);
    if (std::find(kinds.begin(), kinds.end(), "random_walk") != kinds.end() && rw_seeds.empty())
        throw ConfigError("doe: random_walk requested but rw_seeds is empty");
    for (double a : amplitudes_a)
        if (!(a > 0)) throw ConfigError("doe: amplitudes must be > 0");
    if (!(max_hours > 0) || !(sample_period_s > 0))
        throw ConfigError("doe: max_hours and sample_period_s must be > 0");
    if (!(soc_low >= 0 && soc_low < soc_high && soc_high <= 1))
        throw ConfigError("doe: need 0 <= soc_low < soc_high <= 1");
}

std::vector<SimSpec> generate_campaign(const DoeConfig& doe) {
    doe.validate();

    const std::vector<double> temps = sorted_unique(doe.temperatures_c);
    const std::vector<double> amps = sorted_unique(doe.amplitudes_a);

    // profile instances in canonical order: constant, square, random-walk seeds
    struct Instance {
        ProfileKind kind;
        std::uint64_t seed;
        std::string tag;
    };
    std::vector<Instance> instances;
    std::set<std::string> seen_kind;
    for (const auto& name : doe.kinds) {
        if (!seen_kind.insert(name).second) continue;
        const ProfileKind kind = profile_kind_from_string(name);
        if (kind == ProfileKind::RandomWalk) {
            std::vector<std::uint64_t> seeds = doe.rw_seeds;
            std::sort(seeds.begin(), seeds.end());
            seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
            for (auto s : seeds)
                instances.push_back({kind, s, "rw" + std::to_string(s)});
        } else {
            instances.push_back({kind, 0, kind == ProfileKind::Constant ? "constant" : "square"});
        }
    }

    auto make_spec = [&](const Instance& inst, double temp_c, double amp_a) {
        SimSpec spec;
        spec.profile.kind = inst.kind;
        spec.profile.amplitude_a = amp_a;
        spec.profile.period_s = doe.square_period_s;
        spec.profile.pulse_s = doe.rw_pulse_s;
        spec.profile.seed = inst.seed;
        spec.profile.soc_low = doe.soc_low;
        spec.profile.soc_high = doe.soc_high;
        spec.t_ambient_k = temp_c + defaults::kKelvinOffset;
        spec.max_duration_s = doe.max_hours * 3600.0;
        spec.sample_period_s = doe.sample_period_s;
        spec.soh_floor = doe.soh_floor;
        spec.cell = doe.cell;
        spec.sim_id = inst.tag + "_T" + tag_number(temp_c) + "C_A" + tag_number(amp_a);
        return spec;
    };

    std::vector<SimSpec> specs;
    for (const auto& inst : instances) {
        if (doe.full_factorial) {
            for (double t : temps)
                for (double a : amps) specs.push_back(make_spec(inst, t, a));
        } else {
            for (double t : temps) specs.push_back(make_spec(inst, t, doe.reference_amplitude_a));
            for (double a : amps) {
                if (a == doe.reference_amplitude_a) continue;
                specs.push_back(make_spec(inst, doe.reference_temperature_c, a));
            }
        }
    }

    std::set<std::string> ids;
    for (const auto& s : specs)
        if (!ids.insert(s.sim_id).second)
            throw ConfigError("duplicate sim_id generated: " + s.sim_id);
    return specs;
}

Trace run_simulation(const SimSpec& spec, bool with_ukf, const UkfConfig& ukf_cfg) {
    spec.validate();
    if (with_ukf) ukf_cfg.validate();

    const double dt = spec.sample_period_s;
    const auto max_n = std::int64_t(std::floor(spec.max_duration_s / dt + 1e-9));

    BatteryState state;
    state.soc = spec.profile.soc_high;
    state.v_rc = 0.0;
    state.temp_cell = spec.t_ambient_k;

    UkfState ukf;
    if (with_ukf) {
        ukf.mean = Eigen::Vector3d(state.soc, 0.0, spec.cell.r0_init_ohm);
        ukf.covariance = Eigen::Vector3d(1e-4, 1e-6, 1e-8).asDiagonal();
    }

    Trace trace;
    trace.sim_id = spec.sim_id;
    trace.reserve(std::size_t(std::min<std::int64_t>(max_n + 1, 4 * 3600 * 1000)));

    ChargePhase phase = ChargePhase::Discharging;
    double prev_current = 0.0;

    for (std::int64_t n = 0;; ++n) {
        const double t = double(n) * dt;
        const double current = current_at(spec.profile, t, phase);
        const StepResult res = step(spec.cell, state, current, spec.t_ambient_k, dt);

        if (with_ukf) {
            if (n > 0) ukf = predict(ukf, ukf_cfg, spec.cell, prev_current, state.temp_cell, dt);
            ukf = update(ukf, ukf_cfg, spec.cell, current, res.voltage);
        }

        trace.time_s.push_back(t);
        trace.current_a.push_back(current);
        trace.voltage_v.push_back(res.voltage);
        trace.t_amb_c.push_back(spec.t_ambient_k - defaults::kKelvinOffset);
        trace.t_cell_c.push_back(state.temp_cell - defaults::kKelvinOffset);
        trace.soc_true.push_back(state.soc);
        trace.soh.push_back(soh(state));
        if (with_ukf) {
            trace.soc_est.push_back(ukf.soc_est());
            trace.r0_est.push_back(ukf.r0_est());
        }

        if (soh(state) <= spec.soh_floor) break;  // end of life
        if (n == max_n) break;

        state = res.state;
        prev_current = current;
        if (phase == ChargePhase::Discharging && state.soc <= spec.profile.soc_low)
            phase = ChargePhase::Charging;
        else if (phase == ChargePhase::Charging && state.soc >= spec.profile.soc_high)
            phase = ChargePhase::Discharging;
    }
    return trace;
}

void write_manifest(const std::vector<SimSpec>& specs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open manifest for writing: " + path);
    out << "sim_id,kind,amplitude_a,period_s,pulse_s,seed,soc_low,soc_high,"
           "t_ambient_c,max_hours,sample_period_s,soh_floor\n";
    for (const auto& s : specs) {
        out << s.sim_id << ',' << to_string(s.profile.kind) << ','
            << format_value(s.profile.amplitude_a) << ',' << format_value(s.profile.period_s)
            << ',' << format_value(s.profile.pulse_s) << ',' << s.profile.seed << ','
            << format_value(s.profile.soc_low) << ',' << format_value(s.profile.soc_high) << ','
            << format_value(s.t_ambient_k - defaults::kKelvinOffset) << ','
            << format_value(s.max_duration_s / 3600.0) << ',' << format_value(s.sample_period_s)
            << ',' << format_value(s.soh_floor) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<SimSpec> read_manifest(const std::string& path, const CellParams& cell) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ":1: missing manifest header");

    std::vector<SimSpec> specs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 12)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 12 fields");
        SimSpec s;
        s.sim_id = f[0];
        s.profile.kind = profile_kind_from_string(f[1]);
        s.profile.amplitude_a = parse_double(f[2], "manifest amplitude");
        s.profile.period_s = parse_double(f[3], "manifest period");
        s.profile.pulse_s = parse_double(f[4], "manifest pulse");
        s.profile.seed = std::uint64_t(parse_int(f[5], "manifest seed"));
        s.profile.soc_low = parse_double(f[6], "manifest soc_low");
        s.profile.soc_high = parse_double(f[7], "manifest soc_high");
        s.t_ambient_k = parse_double(f[8], "manifest t_ambient") + defaults::kKelvinOffset;
        s.max_duration_s = parse_double(f[9], "manifest max_hours") * 3600.0;
        s.sample_period_s = parse_double(f[10], "manifest sample_period");
        s.soh_floor = parse_double(f[11], "manifest soh_floor");
        s.cell = cell;
        specs.push_back(std::move(s));
    }
    return specs;
}

CellParams cell_from_file(const KeyValueFile& cfg) {
    CellParams cell;
    cell.nominal_capacity_ah = cfg.get_double("nominal_capacity_ah", cell.nominal_capacity_ah);
    cell.r0_init_ohm = cfg.get_double("r0_init_ohm", cell.r0_init_ohm);
    cell.r1_ohm = cfg.get_double("r1_ohm", cell.r1_ohm);
    cell.c1_farad = cfg.get_double("c1_farad", cell.c1_farad);
    cell.c_th = cfg.get_double("c_th_j_per_k", cell.c_th);
    cell.r_th = cfg.get_double("r_th_k_per_w", cell.r_th);
    if (cfg.has("ocv_soc") || cfg.has("ocv_v")) {
        const auto socs = cfg.get_doubles("ocv_soc");
        const auto volts = cfg.get_doubles("ocv_v");
        if (socs.size() != volts.size())
            throw ConfigError("ocv_soc and ocv_v must have the same length");
        cell.ocv_table.clear();
        for (std::size_t i = 0; i < socs.size(); ++i)
            cell.ocv_table.emplace_back(socs[i], volts[i]);
    }
    AgingParams& a = cell.aging;
    a.k_cal = cfg.get_double("k_cal_per_sqrt_hour", a.k_cal);
    a.ea_over_r = cfg.get_double("ea_over_r_k", a.ea_over_r);
    a.t_ref = cfg.get_double("t_ref_k", a.t_ref);
    a.soc_stress_slope = cfg.get_double("soc_stress_slope", a.soc_stress_slope);
    a.k_cyc = cfg.get_double("k_cyc_per_cycle", a.k_cyc);
    a.alpha_dod = cfg.get_double("alpha_dod", a.alpha_dod);
    a.beta_current = cfg.get_double("beta_current_per_c_rate", a.beta_current);
    a.theta_temp = cfg.get_double("theta_temp_per_k", a.theta_temp);
    a.gamma_r_growth = cfg.get_double("gamma_r_growth", a.gamma_r_growth);
    cell.validate();
    return cell;
}

}  // namespace sohkit
