#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sohkit/config.hpp"
#include "sohkit/ecm.hpp"
#include "sohkit/trace.hpp"
#include "sohkit/ukf.hpp"

namespace sohkit {

enum class ProfileKind : std::uint8_t { Constant = 0, Square = 1, RandomWalk = 2 };

const char* to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

struct LoadProfile {
    ProfileKind kind = ProfileKind::Constant;
    double amplitude_a = 1.0;
    double period_s = defaults::kSquarePeriodS;   // square only
    double pulse_s = defaults::kRandomWalkPulseS; // random walk only
    std::uint64_t seed = 1;                       // random walk only
    double soc_low = defaults::kSocLow;
    double soc_high = defaults::kSocHigh;

    void validate() const;
};

enum class ChargePhase : std::uint8_t { Charging = 0, Discharging = 1 };

/// Load current at time t for the given controller phase. Discharge currents
/// are positive, charge currents negative. Random-walk pulses draw their
/// magnitude from {0.25, 0.50, ..., 2.00} A scaled by the profile amplitude,
/// keyed only on (seed, pulse index).
double current_at(const LoadProfile& profile, double t_s, ChargePhase phase);

struct SimSpec {
    std::string sim_id;
    LoadProfile profile;
    double t_ambient_k = defaults::kTRefKelvin;
    double max_duration_s = defaults::kMaxDurationS;
    double sample_period_s = defaults::kSamplePeriodS;
    double soh_floor = defaults::kSohFloor;
    CellParams cell;

    void validate() const;
};

/// Design-of-experiments axes. The default enumeration sweeps temperature at
/// the reference amplitude and amplitude at the reference temperature for each
/// profile kind; full_factorial crosses every axis instead.
struct DoeConfig {
    std::vector<double> temperatures_c{10, 15, 20, 25, 30, 35, 40};
    std::vector<double> amplitudes_a{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    std::vector<std::string> kinds{"constant", "square", "random_walk"};
    std::vector<std::uint64_t> rw_seeds{1, 2, 3};
    double soc_low = defaults::kSocLow;
    double soc_high = defaults::kSocHigh;
    double max_hours = 1000.0;
    double sample_period_s = defaults::kSamplePeriodS;
    double soh_floor = defaults::kSohFloor;
    double square_period_s = defaults::kSquarePeriodS;
    double rw_pulse_s = defaults::kRandomWalkPulseS;
    double reference_amplitude_a = 1.0;
    double reference_temperature_c = 25.0;
    bool full_factorial = false;
    CellParams cell;

    static DoeConfig from_file(const KeyValueFile& cfg);
    void validate() const;
};

/// Expands the DoE axes into an ordered, deterministic list of simulation
/// specs with unique ids. Axis values are de-duplicated.
std::vector<SimSpec> generate_campaign(const DoeConfig& doe);

/// Runs one spec: alternating discharge-to-soc_low / charge-to-soc_high phases,
/// sampled every sample_period, until max_duration or soh reaches the floor.
/// With with_ukf the estimator runs alongside and fills the estimate columns.
Trace run_simulation(const SimSpec& spec, bool with_ukf = false,
                     const UkfConfig& ukf_cfg = UkfConfig());

/// Campaign manifest: one CSV row of spec fields per simulation.
void write_manifest(const std::vector<SimSpec>& specs, const std::string& path);
std::vector<SimSpec> read_manifest(const std::string& path, const CellParams& cell);

/// Cell parameters from a key-value file; missing keys keep the defaults.
CellParams cell_from_file(const KeyValueFile& cfg);

}  // namespace sohkit
