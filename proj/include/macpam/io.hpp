#pragma once

// File formats (scenario JSON, schedule JSON, region CSV, report JSON) and the
// command implementations behind the CLI. All numeric text uses '.' as the
// decimal separator regardless of locale.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "macpam/region.hpp"
#include "macpam/scheduler.hpp"
#include "macpam/sim.hpp"

namespace macpam::io {

using json = nlohmann::ordered_json;

// Locale-independent formatting with 12 significant digits.
inline std::string format_sig12(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

// Writes via a temporary file and rename so failures leave no partial output.
inline void save_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ": JSON parse error: " + e.what());
    }
    return j;
}

namespace detail {

inline double require_number(const json& j, const std::string& key, const char* what) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string(what) + ": missing key '" + key + "'");
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string(what) + ": key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                                const char* what) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (std::string_view k : allowed)
            if (item.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
    }
}

}  // namespace detail

// Scenario file schema: {p1, p2, n0, pe, coding_gain_db?}. Unknown keys are
// rejected; users are relabeled (with a diagnostic) so that p1 >= p2.
inline Scenario scenario_from_json(const json& j, std::ostream& diag = std::cerr) {
    if (!j.is_object()) throw std::invalid_argument("scenario: expected a JSON object");
    detail::reject_unknown_keys(j, {"p1", "p2", "n0", "pe", "coding_gain_db"}, "scenario");
    GapParams gp{detail::require_number(j, "pe", "scenario"),
                 j.contains("coding_gain_db")
                     ? detail::require_number(j, "coding_gain_db", "scenario")
                     : 0.0};
    const Scenario scn = Scenario::make(detail::require_number(j, "p1", "scenario"),
                                        detail::require_number(j, "p2", "scenario"),
                                        detail::require_number(j, "n0", "scenario"), gp);
    if (scn.users_swapped)
        diag << "warning: input has p2 > p1; users relabeled so user 1 is the stronger\n";
    return scn;
}

inline Scenario load_scenario(const std::filesystem::path& path, std::ostream& diag = std::cerr) {
    return scenario_from_json(load_json_file(path), diag);
}

inline json scenario_to_json(const Scenario& scn) {
    json j;
    j["p1"] = scn.p1;
    j["p2"] = scn.p2;
    j["n0"] = scn.n0;
    j["pe"] = scn.gap_params.target_pe;
    j["coding_gain_db"] = scn.gap_params.coding_gain_db;
    return j;
}

inline json schedule_to_json(const Schedule& sched) {
    json j;
    j["scenario"] = scenario_to_json(sched.scenario);
    j["users_swapped"] = sched.scenario.users_swapped;
    json phases = json::array();
    for (const Phase& ph : sched.phases) {
        json p;
        p["fraction"] = ph.fraction;
        p["user1"] = {{"bits", ph.user1.bits}, {"power", ph.user1.power}};
        p["user2"] = {{"bits", ph.user2.bits}, {"power", ph.user2.power}};
        phases.push_back(std::move(p));
    }
    j["phases"] = std::move(phases);
    const RatePoint rates = sched.rates();
    j["rates"] = {{"r1", rates.r1}, {"r2", rates.r2}};
    return j;
}

inline Schedule schedule_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("schedule: expected a JSON object");
    detail::reject_unknown_keys(j, {"scenario", "users_swapped", "phases", "rates"}, "schedule");
    if (!j.contains("scenario")) throw std::invalid_argument("schedule: missing key 'scenario'");
    if (!j.contains("phases") || !j.at("phases").is_array())
        throw std::invalid_argument("schedule: missing or malformed 'phases' array");
    std::ostringstream null_diag;
    Schedule sched{scenario_from_json(j.at("scenario"), null_diag), {}};
    if (j.contains("users_swapped")) {
        if (!j.at("users_swapped").is_boolean())
            throw std::invalid_argument("schedule: 'users_swapped' must be a boolean");
        sched.scenario.users_swapped = j.at("users_swapped").get<bool>();
    }
    for (const json& pj : j.at("phases")) {
        detail::reject_unknown_keys(pj, {"fraction", "user1", "user2"}, "schedule phase");
        Phase ph;
        ph.fraction = detail::require_number(pj, "fraction", "schedule phase");
        for (const char* key : {"user1", "user2"}) {
            if (!pj.contains(key))
                throw std::invalid_argument(std::string("schedule phase: missing '") + key + "'");
            const json& uj = pj.at(key);
            detail::reject_unknown_keys(uj, {"bits", "power"}, "schedule user");
            const double bits = detail::require_number(uj, "bits", "schedule user");
            if (bits != std::floor(bits) || bits < 0 || bits > 64)
                throw std::invalid_argument("schedule user: 'bits' must be a small nonneg integer");
            const PamSpec spec = PamSpec::make(static_cast<int>(bits),
                                               detail::require_number(uj, "power", "schedule user"));
            (key == std::string_view("user1") ? ph.user1 : ph.user2) = spec;
        }
        sched.phases.push_back(ph);
    }
    if (j.contains("rates") && !j.at("rates").is_object())
        throw std::invalid_argument("schedule: 'rates' must be an object");
    return sched;
}

inline Schedule load_schedule(const std::filesystem::path& path) {
    return schedule_from_json(load_json_file(path));
}

inline std::string regions_to_csv(const std::vector<RateRegion>& regions) {
    std::string out = "scheme,vertex,r1,r2\n";
    for (const RateRegion& region : regions) {
        for (size_t i = 0; i < region.vertices.size(); ++i) {
            out += std::string(to_string(region.scheme)) + "," + std::to_string(i) + "," +
                   format_sig12(region.vertices[i].r1) + "," +
                   format_sig12(region.vertices[i].r2) + "\n";
        }
    }
    return out;
}

inline std::vector<RateRegion> regions_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "scheme,vertex,r1,r2")
        throw std::invalid_argument("region CSV: bad header");
    std::vector<RateRegion> regions;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> fields;
        size_t start = 0;
        for (int f = 0; f < 4; ++f) {
            const size_t comma = line.find(',', start);
            if ((f < 3) == (comma == std::string::npos))
                throw std::invalid_argument("region CSV: malformed row '" + line + "'");
            fields[f] = line.substr(start, comma == std::string::npos ? comma : comma - start);
            start = comma + 1;
        }
        const std::optional<Scheme> scheme = scheme_from_string(fields[0]);
        if (!scheme) throw std::invalid_argument("region CSV: unknown scheme '" + fields[0] + "'");
        const std::optional<double> r1 = parse_double(fields[2]);
        const std::optional<double> r2 = parse_double(fields[3]);
        if (!r1 || !r2) throw std::invalid_argument("region CSV: bad number in '" + line + "'");
        if (regions.empty() || regions.back().scheme != *scheme)
            regions.push_back(RateRegion{*scheme, {}});
        if (fields[1] != std::to_string(regions.back().vertices.size()))
            throw std::invalid_argument("region CSV: vertex indices out of order");
        regions.back().vertices.push_back({*r1, *r2});
    }
    return regions;
}

inline json report_to_json(const SimReport& rep) {
    json j;
    j["algorithm"] = rep.algorithm;
    j["seed"] = rep.seed;
    j["symbols_run"] = rep.symbols_run;
    j["per_user_symbols"] = {rep.per_user_symbols[0], rep.per_user_symbols[1]};
    j["per_user_ser"] = {rep.per_user_ser[0], rep.per_user_ser[1]};
    j["ser_ci95"] = {rep.ser_ci95[0], rep.ser_ci95[1]};
    j["throughput_bits"] = rep.throughput_bits;
    return j;
}

}  // namespace macpam::io

namespace macpam::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;          // I/O or unexpected failure
inline constexpr int exit_invalid = 2;     // invalid scenario/schedule/arguments
inline constexpr int exit_numerical = 3;   // numerical failure
inline constexpr int exit_infeasible = 4;  // unachievable schedule target
inline constexpr int exit_ser = 5;         // empirical SER beyond the 4-sigma margin

namespace detail {

inline RateRegion compute_region(Scheme scheme, const Scenario& scn, int samples) {
    switch (scheme) {
        case Scheme::gaussian_capacity: return gaussian_capacity_region(scn);
        case Scheme::gap_outer: return gap_outer_region(scn, samples);
        case Scheme::superpos_no_pc: return superpos_no_pc_region(scn);
        case Scheme::superpos_pc: return superpos_pc_region(scn);
        case Scheme::tdma_naive: return tdma_naive_region(scn);
        case Scheme::tdma_pc: return tdma_pc_region(scn, std::max(samples, 2));
    }
    throw std::logic_error("unreachable scheme");
}

}  // namespace detail

inline int cmd_region(const std::filesystem::path& scenario_path,
                      const std::vector<std::string>& scheme_names, int samples,
                      const std::filesystem::path& out_path, std::ostream& diag = std::cerr) {
    std::vector<Scheme> schemes;
    if (scheme_names.empty()) {
        schemes.assign(all_schemes.begin(), all_schemes.end());
    } else {
        for (const std::string& name : scheme_names) {
            const std::optional<Scheme> s = scheme_from_string(name);
            if (!s) {
                diag << "error: unknown scheme '" << name << "'\n";
                return exit_invalid;
            }
            schemes.push_back(*s);
        }
    }
    if (samples < 2 || samples > 10'000'000) {
        diag << "error: --samples must lie in [2, 10^7]\n";
        return exit_invalid;
    }
    try {
        const Scenario scn = io::load_scenario(scenario_path, diag);
        std::vector<RateRegion> regions;
        for (Scheme s : schemes) regions.push_back(detail::compute_region(s, scn, samples));
        io::save_atomic(out_path, io::regions_to_csv(regions));
        return exit_ok;
    } catch (const numerical_error& e) {
        diag << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::domain_error& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_schedule(const std::filesystem::path& scenario_path, const std::string& target,
                        const std::filesystem::path& out_path, std::ostream& diag = std::cerr) {
    try {
        const Scenario scn = io::load_scenario(scenario_path, diag);
        Schedule sched{scn, {}};
        if (target == "b") {
            sched = synth_schedule(SchedulePoint::b, scn);
        } else if (target == "c") {
            sched = synth_schedule(SchedulePoint::c, scn);
        } else if (target == "b1") {
            sched = synth_schedule(SchedulePoint::b1, scn);
        } else if (target == "c1") {
            sched = synth_schedule(SchedulePoint::c1, scn);
        } else if (target.rfind("theta=", 0) == 0) {
            const std::optional<double> theta = io::parse_double(target.substr(6));
            if (!theta) {
                diag << "error: malformed target '" << target << "'\n";
                return exit_invalid;
            }
            sched = synth_schedule_mix(*theta, scn);
        } else {
            diag << "error: unknown target '" << target
                 << "' (expected b, c, b1, c1 or theta=<0..1>)\n";
            return exit_invalid;
        }
        io::save_atomic(out_path, io::schedule_to_json(sched).dump(2) + "\n");
        return exit_ok;
    } catch (const infeasible_error& e) {
        diag << "infeasible target: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const numerical_error& e) {
        diag << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::domain_error& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_simulate(const std::filesystem::path& schedule_path, std::int64_t symbols,
                        std::uint64_t seed, const std::filesystem::path& out_path,
                        std::ostream& diag = std::cerr) {
    try {
        const Schedule sched = io::load_schedule(schedule_path);
        if (symbols < 10000) {
            diag << "error: --symbols below the minimum sample size of 10000\n";
            return exit_invalid;
        }
        const ValidationReport validation = validate_schedule(sched);
        for (const std::string& note : validation.notes) diag << "note: " << note << "\n";
        if (!validation.pass) {
            diag << "error: schedule failed validation: " << validation.violation << "\n";
            return exit_invalid;
        }
        const SimReport rep = run_schedule(sched, symbols, seed);
        io::save_atomic(out_path, io::report_to_json(rep).dump(2) + "\n");
        const double pe = sched.scenario.gap_params.target_pe;
        for (int u = 0; u < 2; ++u) {
            if (rep.per_user_symbols[u] == 0) continue;
            const double margin =
                4.0 * std::sqrt(pe * (1.0 - pe) / static_cast<double>(rep.per_user_symbols[u]));
            if (rep.per_user_ser[u] > pe + margin) {
                diag << "validation failure: user " << (u + 1) << " empirical SER "
                     << io::format_sig12(rep.per_user_ser[u]) << " exceeds target "
                     << io::format_sig12(pe) << " beyond the 4-sigma margin\n";
                return exit_ser;
            }
        }
        return exit_ok;
    } catch (const numerical_error& e) {
        diag << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::domain_error& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_compare(const std::filesystem::path& scenario_path, int samples,
                       std::ostream& out = std::cout, std::ostream& diag = std::cerr) {
    if (samples < 2 || samples > 10'000'000) {
        diag << "error: --samples must lie in [2, 10^7]\n";
        return exit_invalid;
    }
    try {
        const Scenario scn = io::load_scenario(scenario_path, diag);
        std::vector<RateRegion> regions;
        for (Scheme s : all_schemes) regions.push_back(detail::compute_region(s, scn, samples));

        out << "scenario: p1=" << io::format_sig12(scn.p1) << " p2=" << io::format_sig12(scn.p2)
            << " n0=" << io::format_sig12(scn.n0)
            << " pe=" << io::format_sig12(scn.gap_params.target_pe)
            << " coding_gain_db=" << io::format_sig12(scn.gap_params.coding_gain_db) << "\n";
        out << "users_relabeled: " << (scn.users_swapped ? "yes" : "no") << "\n\n";

        out << "max sum rate per scheme (bits/real dim):\n";
        for (const RateRegion& region : regions) {
            out << "  " << to_string(region.scheme);
            for (size_t pad = to_string(region.scheme).size(); pad < 18; ++pad) out << ' ';
            out << io::format_sig12(max_sum_rate(region)) << "\n";
        }
        out << "\nsum_rate_gap (gap_outer - superpos_pc): " << io::format_sig12(sum_rate_gap(scn))
            << "\n\n";

        // tol 1e-3 absorbs budgets quoted to engineering precision, whose
        // granted integer rates can shift corners by a few 1e-4 bits
        out << "containment matrix (1 = row region contains column region, tol 1e-3):\n";
        out << "  #  scheme\n";
        for (size_t i = 0; i < regions.size(); ++i)
            out << "  " << (i + 1) << "  " << to_string(regions[i].scheme) << "\n";
        out << "       ";
        for (size_t j = 0; j < regions.size(); ++j) out << " " << (j + 1);
        out << "\n";
        for (size_t i = 0; i < regions.size(); ++i) {
            out << "  [" << (i + 1) << "]  ";
            for (size_t j = 0; j < regions.size(); ++j)
                out << " " << (region_contains(regions[i], regions[j], 1e-3) ? 1 : 0);
            out << "\n";
        }

        const int floor_sum = sum_rate_floor(scn);
        if (floor_sum != scn.r1_max())
            out << "\nnote: sum-rate floor " << floor_sum
                << " differs from the stronger user's single-user rate " << scn.r1_max()
                << "; powers are off the integer-bit levels\n";
        return exit_ok;
    } catch (const numerical_error& e) {
        diag << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::domain_error& e) {
        diag << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return exit_io;
    }
}

}  // namespace macpam::cli
