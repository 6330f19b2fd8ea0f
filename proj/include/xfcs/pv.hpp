#ifndef XFCS_PV_HPP
#define XFCS_PV_HPP

#include <cmath>
#include <vector>

#include "xfcs/common.hpp"

namespace xfcs::pv {

struct WeatherSeries {
    std::vector<double> irradiance_w_m2;  // per minute, length 1440
    std::vector<double> ambient_c;        // per minute, length 1440

    void validate() const {
        if (irradiance_w_m2.size() != kMinutesPerDay || ambient_c.size() != kMinutesPerDay)
            throw IngestError("weather series must have 1440 per-minute samples");
        for (double v : irradiance_w_m2)
            if (v < 0) throw IngestError("negative irradiance");
    }
};

struct PvParams {
    double noct_c = 45;
    double temp_coeff = 0.007;  // 1/degC
    double derate = 0.92;       // fixed conversion factor
    double losses_pct = 14;     // informational only

    void validate() const {
        if (noct_c <= 20) throw ConfigError("NOCT must exceed 20 degC");
        if (temp_coeff < 0) throw ConfigError("temp_coeff must be >= 0");
    }
};

/// Cell temperature offset from the 25 degC reference.
inline double cell_temperature_delta(double irradiance, double ambient_c, const PvParams& p) {
    return std::abs(25.0 - (ambient_c + (p.noct_c - 20.0) * irradiance / 800.0));
}

/// Per-unit generation estimate for each minute of the day. Values that the
/// temperature term would push negative are clamped to zero.
inline std::vector<double> per_unit_profile(const WeatherSeries& w, const PvParams& p) {
    w.validate();
    std::vector<double> out(kMinutesPerDay, 0.0);
    for (int t = 0; t < kMinutesPerDay; ++t) {
        double dT = cell_temperature_delta(w.irradiance_w_m2[t], w.ambient_c[t], p);
        double v = p.derate * w.irradiance_w_m2[t] * (1.0 - p.temp_coeff * dT) / 1000.0;
        out[t] = std::max(v, 0.0);
    }
    return out;
}

}  // namespace xfcs::pv

#endif
