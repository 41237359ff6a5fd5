// Command-line front end: computes rate-region CSVs, synthesizes schedules,
// runs Monte Carlo validation and prints scheme comparisons for a scenario.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "macpam/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "macpam: achievable rate regions of the two-user Gaussian MAC with uncoded PAM"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 ok, 1 I/O error, 2 invalid input, 3 numerical failure,\n"
        "4 infeasible target, 5 empirical SER above target.\n"
        "MACREGION_THREADS caps the simulator's internal parallelism.");

    std::string scenario_path;
    std::string schedule_path;
    std::string out_path;
    std::string target = "c1";
    std::string schemes_arg;
    int samples = 256;
    std::int64_t symbols = 1000000;
    std::uint64_t seed = 42;

    CLI::App* region = app.add_subcommand("region", "write region boundaries as CSV");
    region->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    region->add_option("--schemes", schemes_arg,
                       "comma-separated subset of: gaussian_capacity,gap_outer,superpos_no_pc,"
                       "superpos_pc,tdma_naive,tdma_pc (default: all)");
    region->add_option("--samples", samples, "boundary samples for curved schemes");
    region->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* schedule = app.add_subcommand("schedule", "synthesize a transmission schedule");
    schedule->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    schedule->add_option("--target", target, "one of b, c, b1, c1 or theta=<0..1>")->required();
    schedule->add_option("--out", out_path, "output schedule JSON path")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo validation of a schedule");
    simulate->add_option("--schedule", schedule_path, "schedule JSON file")->required();
    simulate->add_option("--symbols", symbols, "total symbols to simulate (>= 10^4)");
    simulate->add_option("--seed", seed, "generator seed");
    simulate->add_option("--out", out_path, "output report JSON path")->required();

    CLI::App* compare = app.add_subcommand("compare", "print per-scheme sum rates and containment");
    compare->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    compare->add_option("--samples", samples, "boundary samples for curved schemes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return macpam::cli::exit_invalid;
    }

    if (region->parsed()) {
        std::vector<std::string> schemes;
        std::string current;
        for (char ch : schemes_arg) {
            if (ch == ',') {
                if (!current.empty()) schemes.push_back(current);
                current.clear();
            } else {
                current += ch;
            }
        }
        if (!current.empty()) schemes.push_back(current);
        return macpam::cli::cmd_region(scenario_path, schemes, samples, out_path);
    }
    if (schedule->parsed()) return macpam::cli::cmd_schedule(scenario_path, target, out_path);
    if (simulate->parsed())
        return macpam::cli::cmd_simulate(schedule_path, symbols, seed, out_path);
    if (compare->parsed()) return macpam::cli::cmd_compare(scenario_path, samples);
    return macpam::cli::exit_invalid;
}
