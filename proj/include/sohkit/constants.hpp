#pragma once

#include <array>
#include <cstdint>

// Frozen default parameter set for the bundled 27 Ah cell and its estimator.
// The aging rates were calibrated once against brute-force reference runs so
// that the default campaign produces non-degenerate capacity-drop labels and
// the hottest sweep point reaches end of life within a 5000 h horizon.

namespace sohkit::defaults {

inline constexpr double kKelvinOffset = 273.15;

// Electrical / thermal
inline constexpr double kNominalCapacityAh = 27.0;
inline constexpr double kR0InitOhm = 0.01;
inline constexpr double kR1Ohm = 0.015;
inline constexpr double kC1Farad = 2000.0;
inline constexpr double kCThJPerK = 1100.0;
inline constexpr double kRThKPerW = 3.0;
inline constexpr double kGammaR0Growth = 1.0;

// Aging (calendar + cycle), see AgingParams
inline constexpr double kCalRatePerSqrtHour = 2.4e-3;
inline constexpr double kEaOverRKelvin = 10000.0;
inline constexpr double kTRefKelvin = 298.15;
inline constexpr double kSocStressSlope = 0.5;
inline constexpr double kCycRatePerCycle = 1.5e-4;
inline constexpr double kAlphaDod = 1.1;
inline constexpr double kBetaCurrentPerCRate = 0.3;
inline constexpr double kThetaTempPerKelvin = 0.05;

// Generic Li-ion open-circuit voltage, 11 knots over soc 0..1
inline constexpr std::array<double, 11> kOcvSoc = {
    0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
inline constexpr std::array<double, 11> kOcvVolt = {
    3.00, 3.45, 3.55, 3.62, 3.67, 3.72, 3.78, 3.85, 3.94, 4.06, 4.20};

// Unscented filter
inline constexpr double kUkfAlpha = 1e-3;
inline constexpr double kUkfBeta = 2.0;
inline constexpr double kUkfKappa = 0.0;
inline constexpr double kUkfProcessNoiseSoc = 1e-10;
inline constexpr double kUkfProcessNoiseVrc = 1e-8;
inline constexpr double kUkfProcessNoiseR0 = 1e-12;
inline constexpr double kUkfMeasurementNoiseV2 = 1e-4;

// Cycling band and sampling
inline constexpr double kSocLow = 0.1;
inline constexpr double kSocHigh = 0.9;
inline constexpr double kSamplePeriodS = 1.0;
inline constexpr double kMaxDurationS = 3.6e6;  // 1000 h
inline constexpr double kSohFloor = 0.0;
inline constexpr double kSquarePeriodS = 1800.0;
inline constexpr double kRandomWalkPulseS = 60.0;

// Idle band for charge/discharge phase detection
inline constexpr double kIdleCurrentBandA = 1e-3;

}  // namespace sohkit::defaults
