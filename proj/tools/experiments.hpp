#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qdlab/io.hpp"

namespace qdl::cli {

struct RunContext {
    std::uint64_t master_seed = 1;
    unsigned workers = 1;
    std::vector<std::string> log;
    void note(const std::string& s) { log.push_back(s); }
};

struct Output {
    io::Table data;
    io::json results = io::json::object();
};

struct Experiment {
    std::string name;
    std::string description;
    std::string anchor;  // topic in the source model
    std::vector<io::ParamSpec> params;
    std::function<Output(const io::Params&, RunContext&)> run;
};

// Stable ordering.
const std::vector<Experiment>& catalog();

}  // namespace qdl::cli
