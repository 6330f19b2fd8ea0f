#ifndef XFCS_FLEET_HPP
#define XFCS_FLEET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "xfcs/common.hpp"

namespace xfcs::fleet {

enum class DayType { weekday, weekend };

inline const char* to_string(DayType d) { return d == DayType::weekday ? "weekday" : "weekend"; }

/// Normal distribution parameters; clock values are minutes after midnight.
struct NormalDist {
    double mean = 0;
    double stddev = 0;
};

struct EvCategory {
    std::string id;                    // EVC1 | EVC2 | EVC3
    double fleet_share = 0;            // fraction of the fleet
    double battery_capacity_kwh = 0;
    double consumption_kwh_per_mile = 0;
    NormalDist departure_weekday;      // minutes
    NormalDist departure_weekend;      // minutes
};

struct FleetConfig {
    int n_evs = 0;
    std::vector<EvCategory> categories;
    double mileage_coeff = 0.0296;     // 1/mile, exponential mileage distribution
    NormalDist soc_thr_dist{30, 15};   // % at which an EV heads to the station
    NormalDist soc_target_dist{80, 10};
    double soc_lower = 10;             // % clamp, also the "empty" floor
    double soc_upper = 90;             // % clamp, also the departure SoC
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (n_evs < 0) throw ConfigError("n_evs must be >= 0");
        if (mileage_coeff <= 0) throw ConfigError("mileage_coeff must be > 0");
        if (soc_lower < 0 || soc_upper > 100 || soc_lower >= soc_upper)
            throw ConfigError("soc bounds must satisfy 0 <= lower < upper <= 100");
        double total = 0;
        for (const auto& c : categories) {
            if (c.battery_capacity_kwh <= 0) throw ConfigError(c.id + ": capacity must be > 0");
            if (c.consumption_kwh_per_mile <= 0)
                throw ConfigError(c.id + ": consumption must be > 0");
            total += c.fleet_share;
        }
        if (!categories.empty() && std::abs(total - 1.0) > 1e-9)
            throw ConfigError("category fleet shares must sum to 1");
    }
};

/// Hourly probability of an EV being on the road.
struct DrivingProfile {
    std::array<double, 24> weekday_probs{};
    std::array<double, 24> weekend_probs{};

    const std::array<double, 24>& probs(DayType d) const {
        return d == DayType::weekday ? weekday_probs : weekend_probs;
    }
    void validate() const {
        for (double p : weekday_probs)
            if (p < 0 || p > 1) throw ConfigError("weekday driving prob out of [0,1]");
        for (double p : weekend_probs)
            if (p < 0 || p > 1) throw ConfigError("weekend driving prob out of [0,1]");
    }
};

struct StationConfig {
    int n_ports = 3;
    int n_waiting = 5;
    double port_power_kw = 350;
    double dt_hours = 1.0 / 60.0;      // demand model runs at minute scale
    int horizon_minutes = kMinutesPerDay;

    void validate() const {
        if (n_ports < 1) throw ConfigError("n_ports must be >= 1");
        if (n_waiting < 0) throw ConfigError("n_waiting must be >= 0");
        if (port_power_kw <= 0) throw ConfigError("port_power must be > 0");
        if (dt_hours <= 0) throw ConfigError("dt must be > 0");
    }
};

/// Shape of the constant-voltage taper after the constant-power phase.
struct CvParams {
    double cutoff_soc = 80;            // % where CP hands over to CV
    double min_power_fraction = 0.05;  // stop charging below this fraction of rated power
    double decay_time_constant = 10;   // minutes

    void validate() const {
        if (cutoff_soc <= 0 || cutoff_soc > 100) throw ConfigError("cutoff_soc must be in (0,100]");
        if (min_power_fraction <= 0 || min_power_fraction >= 1)
            throw ConfigError("min_power_fraction must be in (0,1)");
        if (decay_time_constant <= 0) throw ConfigError("decay_time_constant must be > 0");
    }
};

struct MileageBin {
    int index = 0;
    double q_low = 0;       // miles
    double q_high = 0;      // miles, may be +infinity for the terminal bin
    double q_avg = 0;       // miles
    double prob = 0;        // mass of the exponential mileage density on [q_low, q_high)
};

struct ChargingSession {
    int ev_index = -1;
    int arrival_minute = 0;
    int start_minute = 0;
    int duration_minutes = 0;
    double soc_arrival = 0;   // %
    double soc_target = 0;    // %, adjusted down if the day ends mid-charge
    double battery_capacity_kwh = 0;
    std::vector<double> energy_per_minute;  // kWh, indexed from start_minute

    double total_energy() const {
        double s = 0;
        for (double e : energy_per_minute) s += e;
        return s;
    }
};

struct DemandProfile {
    DayType day_type = DayType::weekday;
    std::vector<double> energy_kwh = std::vector<double>(kMinutesPerDay, 0.0);
    int rejected_count = 0;

    double total() const {
        double s = 0;
        for (double e : energy_kwh) s += e;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Mileage discretization
// ---------------------------------------------------------------------------

/// Discretizes the exponential daily-mileage density into bins. For the open
/// terminal bin (q_high = inf) q_avg is the conditional mean q_low + 1/coeff.
inline std::vector<MileageBin> build_mileage_bins(double mileage_coeff,
                                                  const std::vector<double>& edges) {
    if (mileage_coeff <= 0) throw ConfigError("mileage_coeff must be > 0");
    if (edges.size() < 2) throw ConfigError("need at least two mileage edges");
    if (edges.front() < 0) throw ConfigError("first mileage edge must be >= 0");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw ConfigError("mileage edges must be strictly increasing");

    std::vector<MileageBin> bins;
    bins.reserve(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        MileageBin b;
        b.index = static_cast<int>(i);
        b.q_low = edges[i];
        b.q_high = edges[i + 1];
        if (std::isinf(b.q_high)) {
            b.q_avg = b.q_low + 1.0 / mileage_coeff;
            b.prob = std::exp(-mileage_coeff * b.q_low);
        } else {
            b.q_avg = 0.5 * (b.q_low + b.q_high);
            b.prob = std::exp(-mileage_coeff * b.q_low) - std::exp(-mileage_coeff * b.q_high);
        }
        bins.push_back(b);
    }
    return bins;
}

/// Default discretization: 1-mile bins up to 150 miles plus an open tail.
inline std::vector<MileageBin> default_mileage_bins(double mileage_coeff) {
    std::vector<double> edges;
    for (int m = 0; m <= 150; ++m) edges.push_back(m);
    edges.push_back(std::numeric_limits<double>::infinity());
    return build_mileage_bins(mileage_coeff, edges);
}

// ---------------------------------------------------------------------------
// SoC evolution and arrival statistics
// ---------------------------------------------------------------------------

struct SocTrajectory {
    std::vector<double> hourly_soc;            // value at the end of each driven hour
    std::optional<double> crossing_minute;     // first minute SoC <= threshold
};

/// Steps the SoC down hour by hour while the EV drives, starting at
/// depart_minute. The decrement per hour h is q_avg * probs[h] * cpm / cap.
/// The crossing minute is interpolated linearly inside the hour and reported
/// before the SoC is clamped at soc_floor.
inline SocTrajectory evolve_soc(double initial_soc, double soc_thr, double battery_capacity_kwh,
                                double consumption_kwh_per_mile, double q_avg_miles,
                                const std::array<double, 24>& hourly_probs, double depart_minute,
                                double soc_floor) {
    SocTrajectory out;
    if (initial_soc <= soc_thr) {
        out.crossing_minute = depart_minute;
        return out;
    }
    int first_hour = static_cast<int>(depart_minute / 60.0);
    double soc = initial_soc;
    for (int h = std::max(first_hour, 0); h < 24; ++h) {
        double seg_start = (h == first_hour) ? depart_minute : h * 60.0;
        double seg_end = (h + 1) * 60.0;
        double drop = q_avg_miles * hourly_probs[static_cast<std::size_t>(h)] *
                      consumption_kwh_per_mile / battery_capacity_kwh * 100.0;
        double next = soc - drop;
        if (!out.crossing_minute && next <= soc_thr && drop > 0) {
            double frac = (soc - soc_thr) / drop;
            out.crossing_minute = seg_start + frac * (seg_end - seg_start);
        }
        soc = std::max(next, soc_floor);
        out.hourly_soc.push_back(soc);
        if (out.crossing_minute) break;
    }
    return out;
}

struct BinCrossing {
    double minute = 0;
    double soc = 0;  // % at the crossing; equals the sampled threshold
};

struct ArrivalEstimate {
    double minute = 0;
    double soc = 0;
};

/// Probability-weighted average of arrival time and SoC over the bins whose
/// trajectory reached the threshold. Weights are renormalized over the
/// participating bins. Returns nullopt when no bin crossed: the EV skips the
/// station that day.
inline std::optional<ArrivalEstimate> arrival_statistics(
    const std::vector<MileageBin>& bins, const std::vector<std::optional<BinCrossing>>& crossings) {
    if (bins.size() != crossings.size())
        throw std::invalid_argument("bins/crossings size mismatch");
    double wsum = 0, tsum = 0, ssum = 0;
    for (std::size_t a = 0; a < bins.size(); ++a) {
        if (!crossings[a]) continue;
        wsum += bins[a].prob;
        tsum += bins[a].prob * crossings[a]->minute;
        ssum += bins[a].prob * crossings[a]->soc;
    }
    if (wsum <= 0) return std::nullopt;
    return ArrivalEstimate{tsum / wsum, ssum / wsum};
}

// ---------------------------------------------------------------------------
// CPCV charging physics
// ---------------------------------------------------------------------------

/// Per-minute charging energy under the CPCV protocol: rated power until the
/// cutoff SoC, then an exponential power taper truncated at
/// min_power_fraction. The final minute is trimmed so the vector sums exactly
/// to the requested energy; if the taper window cannot carry the full amount
/// the vector simply ends early and the caller owns the shortfall.
inline std::vector<double> cpcv_session_energy(double capacity_kwh, double soc_start,
                                               double soc_target, double port_power_kw,
                                               const CvParams& cv, double dt_hours) {
    if (soc_start >= soc_target)
        throw ConfigError("cpcv: soc_start must be below soc_target");
    const double e_total = (soc_target - soc_start) / 100.0 * capacity_kwh;
    const double p_floor = cv.min_power_fraction * port_power_kw;

    std::vector<double> energy;
    double soc = soc_start;
    double delivered = 0;
    int cv_elapsed = 0;
    while (delivered < e_total - 1e-12) {
        double power;
        if (soc < cv.cutoff_soc) {
            power = port_power_kw;
        } else {
            power = port_power_kw * std::exp(-static_cast<double>(cv_elapsed) /
                                             cv.decay_time_constant);
            ++cv_elapsed;
            if (power < p_floor) break;
        }
        double e = std::min(power * dt_hours, e_total - delivered);
        energy.push_back(e);
        delivered += e;
        soc += e / capacity_kwh * 100.0;
    }
    return energy;
}

// ---------------------------------------------------------------------------
// Station queue
// ---------------------------------------------------------------------------

struct Arrival {
    int ev_index = -1;
    int minute = 0;
    double soc_arrival = 0;
    double soc_target = 0;
    double battery_capacity_kwh = 0;
};

struct QueueResult {
    std::vector<ChargingSession> sessions;
    int rejected = 0;
};

/// First-come-first-serve station with n_ports chargers and n_waiting spots.
/// An arrival finding every port and waiting spot taken is rejected. The
/// station closes at the end of the horizon: sessions are cut short there and
/// their soc_target adjusted to the energy actually delivered, and waiting
/// EVs that never reach a port count as rejected.
inline QueueResult simulate_station_queue(std::vector<Arrival> arrivals,
                                          const StationConfig& station, const CvParams& cv) {
    station.validate();
    std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
        if (a.minute != b.minute) return a.minute < b.minute;
        return a.ev_index < b.ev_index;
    });

    QueueResult out;
    std::vector<int> port_free(static_cast<std::size_t>(station.n_ports), 0);
    std::deque<Arrival> waiting;

    auto start_session = [&](const Arrival& ev, int start) {
        if (start >= station.horizon_minutes) {
            ++out.rejected;
            return station.horizon_minutes;  // port nominally busy past close
        }
        auto vec = cpcv_session_energy(ev.battery_capacity_kwh, ev.soc_arrival, ev.soc_target,
                                       station.port_power_kw, cv, station.dt_hours);
        int room = station.horizon_minutes - start;
        if (static_cast<int>(vec.size()) > room) vec.resize(static_cast<std::size_t>(room));
        if (vec.empty()) {
            ++out.rejected;
            return start;
        }
        ChargingSession s;
        s.ev_index = ev.ev_index;
        s.arrival_minute = ev.minute;
        s.start_minute = start;
        s.duration_minutes = static_cast<int>(vec.size());
        s.soc_arrival = ev.soc_arrival;
        s.battery_capacity_kwh = ev.battery_capacity_kwh;
        s.energy_per_minute = std::move(vec);
        s.soc_target = ev.soc_arrival + s.total_energy() / ev.battery_capacity_kwh * 100.0;
        out.sessions.push_back(std::move(s));
        return start + out.sessions.back().duration_minutes;
    };

    auto drain_until = [&](int now) {
        // hand freed ports to waiting EVs, earliest-freed port first
        while (!waiting.empty()) {
            auto it = std::min_element(port_free.begin(), port_free.end());
            if (*it > now) break;
            Arrival ev = waiting.front();
            waiting.pop_front();
            int start = std::max(*it, ev.minute);
            *it = start_session(ev, start);
        }
    };

    for (const Arrival& ev : arrivals) {
        drain_until(ev.minute);
        auto it = std::min_element(port_free.begin(), port_free.end());
        if (*it <= ev.minute && waiting.empty()) {
            *it = start_session(ev, ev.minute);
        } else if (static_cast<int>(waiting.size()) < station.n_waiting) {
            waiting.push_back(ev);
        } else {
            ++out.rejected;
        }
    }
    drain_until(station.horizon_minutes);
    out.rejected += static_cast<int>(waiting.size());
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation and end-to-end generation
// ---------------------------------------------------------------------------

inline DemandProfile aggregate_demand(const std::vector<ChargingSession>& sessions,
                                      DayType day_type) {
    DemandProfile p;
    p.day_type = day_type;
    for (const auto& s : sessions) {
        for (std::size_t k = 0; k < s.energy_per_minute.size(); ++k) {
            std::size_t m = static_cast<std::size_t>(s.start_minute) + k;
            if (m < p.energy_kwh.size()) p.energy_kwh[m] += s.energy_per_minute[k];
        }
    }
    return p;
}

struct DayResult {
    DemandProfile profile;
    std::vector<ChargingSession> sessions;
};

namespace detail {

/// Deterministic category assignment by largest remainder, preserving the
/// configured category order.
inline std::vector<int> category_counts(const FleetConfig& fleet) {
    std::vector<int> counts(fleet.categories.size(), 0);
    std::vector<std::pair<double, std::size_t>> rema;
    int assigned = 0;
    for (std::size_t c = 0; c < fleet.categories.size(); ++c) {
        double exact = fleet.categories[c].fleet_share * fleet.n_evs;
        counts[c] = static_cast<int>(std::floor(exact + 1e-9));
        assigned += counts[c];
        rema.emplace_back(exact - counts[c], c);
    }
    std::sort(rema.begin(), rema.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int k = 0; k < fleet.n_evs - assigned && k < static_cast<int>(rema.size()); ++k)
        ++counts[rema[static_cast<std::size_t>(k)].second];
    return counts;
}

}  // namespace detail

/// Simulates one day of station demand. Draw order per EV is fixed
/// (departure, threshold, target) so a seed fully determines the result.
inline DayResult simulate_day(const FleetConfig& fleet, const StationConfig& station,
                              const DrivingProfile& profile, const CvParams& cv, DayType day,
                              Rng& rng, const std::vector<MileageBin>& bins) {
    const auto& probs = profile.probs(day);
    std::vector<Arrival> arrivals;

    std::vector<int> counts = detail::category_counts(fleet);
    int ev_index = 0;
    for (std::size_t c = 0; c < fleet.categories.size(); ++c) {
        const EvCategory& cat = fleet.categories[c];
        const NormalDist& dep_dist =
            day == DayType::weekday ? cat.departure_weekday : cat.departure_weekend;
        for (int k = 0; k < counts[c]; ++k, ++ev_index) {
            double depart = clamp(rng.normal(dep_dist.mean, dep_dist.stddev), 0, kMinutesPerDay - 1);
            double thr = clamp(rng.normal(fleet.soc_thr_dist.mean, fleet.soc_thr_dist.stddev),
                               fleet.soc_lower, fleet.soc_upper);
            double target =
                clamp(rng.normal(fleet.soc_target_dist.mean, fleet.soc_target_dist.stddev),
                      fleet.soc_lower, fleet.soc_upper);

            std::vector<std::optional<BinCrossing>> crossings(bins.size());
            for (std::size_t a = 0; a < bins.size(); ++a) {
                auto traj = evolve_soc(fleet.soc_upper, thr, cat.battery_capacity_kwh,
                                       cat.consumption_kwh_per_mile, bins[a].q_avg, probs, depart,
                                       fleet.soc_lower);
                if (traj.crossing_minute)
                    crossings[a] = BinCrossing{*traj.crossing_minute, thr};
            }
            auto est = arrival_statistics(bins, crossings);
            if (!est) continue;  // never hit the threshold: no visit today
            int minute = static_cast<int>(std::llround(est->minute));
            if (minute >= station.horizon_minutes) continue;
            if (target <= est->soc + 1e-9) continue;  // nothing to charge
            arrivals.push_back(
                {ev_index, minute, est->soc, target, cat.battery_capacity_kwh});
        }
    }

    QueueResult q = simulate_station_queue(std::move(arrivals), station, cv);
    DayResult out;
    out.profile = aggregate_demand(q.sessions, day);
    out.profile.rejected_count = q.rejected;
    out.sessions = std::move(q.sessions);
    return out;
}

struct GeneratedProfiles {
    DemandProfile weekday;
    DemandProfile weekend;
};

/// End-to-end demand generation for one representative weekday and weekend.
inline GeneratedProfiles generate_profiles(const FleetConfig& fleet, const StationConfig& station,
                                           const DrivingProfile& profile, const CvParams& cv) {
    fleet.validate();
    station.validate();
    profile.validate();
    cv.validate();
    auto bins = default_mileage_bins(fleet.mileage_coeff);
    GeneratedProfiles out;
    {
        Rng rng(fleet.rng_seed * 2 + 0);
        out.weekday =
            simulate_day(fleet, station, profile, cv, DayType::weekday, rng, bins).profile;
    }
    {
        Rng rng(fleet.rng_seed * 2 + 1);
        out.weekend =
            simulate_day(fleet, station, profile, cv, DayType::weekend, rng, bins).profile;
    }
    return out;
}

}  // namespace xfcs::fleet

#endif
