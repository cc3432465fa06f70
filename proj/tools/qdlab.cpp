// qdlab: experiment runner. One subcommand per catalog entry plus `list`.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "qdlab/parallel.hpp"

namespace fs = std::filesystem;
using namespace qdl;
using qdl::cli::Experiment;

namespace {

constexpr int schema_version = 1;

// key = value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw io::SchemaError(path + ":" + std::to_string(no) + ": expected key = value");
        auto trim = [](std::string s) {
            auto x = s.find_first_not_of(" \t\r"), y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) throw io::SchemaError(path + ":" + std::to_string(no) + ": empty key");
        if (out.count(k)) throw io::SchemaError(path + ":" + std::to_string(no) + ": duplicate key '" + k + "'");
        out[k] = v;
    }
    return out;
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    f << body;
    if (!f) throw Error("cannot write " + p.string());
}

struct Invocation {
    const Experiment* exp = nullptr;
    std::string config;
    std::map<std::string, std::string> flags;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out = "qdlab_out";
};

int run(const Invocation& inv) {
    const Experiment& e = *inv.exp;
    std::map<std::string, std::string> file;
    if (!inv.config.empty()) file = read_config(inv.config);
    io::Params params(e.params, file, inv.flags);
    cli::RunContext ctx;
    ctx.master_seed = inv.seed;
    ctx.workers = inv.workers ? inv.workers : default_workers();
    auto started = std::chrono::steady_clock::now();
    auto output = e.run(params, ctx);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    io::json report = io::json::object();
    report["schema_version"] = schema_version;
    report["experiment"] = e.name;
    report["master_seed"] = inv.seed;
    report["n_workers"] = ctx.workers;
    report["config"] = params.to_json();
    report["results"] = output.results;
    report["metadata"] = {{"generated_at", utc_now()}, {"elapsed_seconds", secs}};

    std::ostringstream log;
    log << "experiment " << e.name << "\nmaster_seed " << inv.seed << "\nn_workers " << ctx.workers << "\n";
    for (const auto& l : ctx.log) log << l << "\n";
    log << "rows " << output.data.rows.size() << "\n";

    // Stage into a sibling directory so a failed write leaves nothing behind.
    fs::path out(inv.out), stage = out;
    stage += ".partial";
    fs::remove_all(stage);
    fs::create_directories(stage);
    try {
        write_file(stage / "data.csv", io::csv_string(output.data));
        write_file(stage / "report.json", report.dump(2) + "\n");
        write_file(stage / "run.log", log.str());
        fs::create_directories(out);
        for (const char* n : {"data.csv", "report.json", "run.log"}) fs::rename(stage / n, out / n);
        fs::remove_all(stage);
    } catch (...) {
        fs::remove_all(stage);
        throw;
    }
    std::cout << report["results"].dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdlab: disordered quantum systems experiments"};
    app.require_subcommand(1);
    auto* list = app.add_subcommand("list", "list experiments");

    Invocation inv;
    std::map<std::string, std::string> raw;
    std::vector<std::pair<CLI::App*, const Experiment*>> subs;
    for (const auto& e : cli::catalog()) {
        auto* s = app.add_subcommand(e.name, e.description);
        s->add_option("--config", inv.config, "key = value config file");
        s->add_option("--seed", inv.seed, "master seed");
        s->add_option("--workers", inv.workers, "worker threads (default QDLAB_WORKERS or hardware)");
        s->add_option("--out", inv.out, "output directory");
        for (const auto& p : e.params) {
            std::string key = e.name + "/" + p.name;
            s->add_option("--" + p.name, raw[key], p.help + " [" + p.default_value + "]");
        }
        subs.emplace_back(s, &e);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    if (*list) {
        for (const auto& e : cli::catalog()) std::cout << e.name << "\t" << e.description << "\t[" << e.anchor << "]\n";
        return 0;
    }
    for (auto& [s, e] : subs) {
        if (!*s) continue;
        inv.exp = e;
        for (const auto& p : e->params)
            if (s->count("--" + p.name)) inv.flags[p.name] = raw[e->name + "/" + p.name];
    }

    try {
        return run(inv);
    } catch (const ConvergenceError& err) {
        std::cerr << "convergence error: " << err.what() << "\n";
        return 3;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const DomainError& err) {
        std::cerr << "domain error: " << err.what() << "\n";
        return 2;
    } catch (const SizeError& err) {
        std::cerr << "size error: " << err.what() << "\n";
        return 2;
    } catch (const FitError& err) {
        std::cerr << "fit error (parameters leave too little data): " << err.what() << "\n";
        return 2;
    } catch (const UnsupportedError& err) {
        std::cerr << "unsupported: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
