#include "meshsim/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace meshsim;

namespace
{

void
WriteRows(const std::string& path, const std::vector<CsvRow>& rows)
{
    std::ostringstream text;
    text << kCsvHeader << '\n';
    for (const CsvRow& row : rows)
    {
        text << row.ToCsv() << '\n';
    }
    if (path.empty() || path == "-")
    {
        std::cout << text.str();
        return;
    }
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error(fmt::format("cannot write '{}'", path));
    }
    out << text.str();
}

std::vector<double>
ParseValues(const std::string& text)
{
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
    {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size())
        {
            throw std::invalid_argument(fmt::format("bad value '{}' in --values", item));
        }
        values.push_back(v);
    }
    return values;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Packet-level simulator for mesh-based QoS multicast routing"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool trace = false;
    std::string tracePath;
    auto* run = app.add_subcommand("run", "Run one scenario and emit its CSV row");
    run->add_option("--config", config, "Scenario file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out, "CSV output file (default stdout)");
    run->add_flag("--trace", trace, "Emit the packet trace");
    run->add_option("--trace-out", tracePath, "Trace file; implies --trace (default stderr)");

    std::string axis = "sources";
    std::string values;
    std::uint32_t seeds = 5;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "Run every (value, seed, variant) combination");
    sweep->add_option("--config", config, "Base scenario file")->required();
    sweep->add_option("--axis", axis, "sources, max_speed or rate");
    sweep->add_option("--values", values, "Comma-separated axis values")->required();
    sweep->add_option("--seeds", seeds, "Number of seeds, counted from the base seed");
    sweep->add_option("--out", out, "CSV output file (default stdout)");
    sweep->add_option("--workers", workers, "Parallel runs");

    std::string oracle;
    auto* oracleCmd = app.add_subcommand("oracle", "Run a built-in oracle scenario");
    oracleCmd->add_option("name", oracle, "Oracle name (line5)")->required();
    oracleCmd->add_option("--out", out, "CSV output file (default stdout)");

    std::string defaultsPath;
    auto* defaults = app.add_subcommand("defaults", "Print the default scenario");
    defaults->add_option("--config", defaultsPath, "Resolve this file instead of the empty scenario");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            Scenario s = LoadScenario(config);
            if (seed)
            {
                s.seed = *seed;
            }
            std::ofstream traceFile;
            std::ostream* traceOut = nullptr;
            if (trace || !tracePath.empty())
            {
                if (tracePath.empty())
                {
                    traceOut = &std::cerr;
                }
                else
                {
                    traceFile.open(tracePath);
                    traceOut = &traceFile;
                }
            }
            WriteRows(out, {RunScenario(s, traceOut)});
        }
        else if (*sweep)
        {
            const Scenario base = LoadScenario(config);
            WriteRows(out, Sweep(base, ParseSweepAxis(axis), ParseValues(values), seeds, workers));
        }
        else if (*oracleCmd)
        {
            if (oracle != "line5")
            {
                std::cerr << fmt::format("unknown oracle '{}'\n", oracle);
                return 2;
            }
            WriteRows(out, {RunScenario(Line5Scenario())});
        }
        else if (*defaults)
        {
            std::cout << DumpScenario(defaultsPath.empty() ? Scenario{} : LoadScenario(defaultsPath));
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
