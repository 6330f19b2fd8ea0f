#ifndef XFCS_COMMON_HPP
#define XFCS_COMMON_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace xfcs {

inline constexpr int kMinutesPerDay = 1440;

/// Raised on malformed configuration or CLI input (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed or inconsistent time-series input.
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when the external MIP backend fails (exit code 3).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Simulation/optimization step grid over one day.
struct TimeGrid {
    int dt_minutes = 1;

    int steps() const { return kMinutesPerDay / dt_minutes; }
    double dt_hours() const { return dt_minutes / 60.0; }

    static TimeGrid of(int dt_minutes) {
        if (dt_minutes < 1 || kMinutesPerDay % dt_minutes != 0)
            throw ConfigError("time step must divide 1440 minutes, got " +
                              std::to_string(dt_minutes));
        return TimeGrid{dt_minutes};
    }
};

/// Parses "HH:MM" into minutes after midnight. Also accepts a plain number
/// of minutes so durations like "5:12" and "78" both work.
inline double parse_clock(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        try {
            return std::stod(text);
        } catch (const std::exception&) {
            throw ConfigError("bad clock value '" + text + "'");
        }
    }
    try {
        double h = std::stod(text.substr(0, colon));
        double m = std::stod(text.substr(colon + 1));
        if (m < 0 || m >= 60) throw ConfigError("minutes out of range in '" + text + "'");
        return h * 60.0 + m;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad clock value '" + text + "'");
    }
}

/// Shortest round-trip decimal rendering, used everywhere a double is
/// written to a file so repeated exports are byte-identical.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "+infinity" : "-infinity";
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("to_chars failed");
    return std::string(buf.data(), ptr);
}

/// Deterministic RNG for the demand model. Normal deviates use a plain
/// Box-Muller transform so identical seeds give identical streams on every
/// platform (std::normal_distribution is implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform() {
        // xorshift64* - stable across compilers, good enough for sampling
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        std::uint64_t r = x * 0x2545F4914F6CDD1DULL;
        return (r >> 11) * 0x1.0p-53;
    }

    double normal(double mean, double stddev) {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

  private:
    std::uint64_t state_;
};

inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace xfcs

#endif
