#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "heavytail/cli.hpp"

namespace {

// one line on stderr, machine-parsable: "error: <message>"
int fail(const std::string& msg) {
    std::string line = msg;
    std::replace(line.begin(), line.end(), '\n', ' ');
    std::cerr << "error: " << line << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for heavy-tailed distribution classes"};
    app.require_subcommand(1);

    std::string config, out = ".";
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = HEAVYTAIL_WORKERS env, else 1

    const char* commands[] = {"classify", "product", "mixture", "risk", "mvec", "matrix"};
    for (const char* name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "path to the JSON run config")->required();
        sub->add_option("--seed", seed, "RNG seed (required; no wall-clock default)")
            ->required();
        sub->add_option("--workers", workers, "worker threads (default: HEAVYTAIL_WORKERS or 1)");
        sub->add_option("--out", out, "output directory for report.json and curves.csv");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(e.what());
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return heavytail::run_files(command, config, seed,
                                    heavytail::resolve_workers(workers), out);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}
