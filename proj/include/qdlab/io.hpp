#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "common.hpp"
#include "disorder.hpp"
#include "json.hpp"

namespace qdl::io {

using json = nlohmann::ordered_json;

// Round-trippable decimal form of a double.
inline std::string g17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw Error("row width does not match the header");
        rows.push_back(std::move(row));
    }
};

inline std::string cell_text(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return g17(*d);
    if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << cell_text(r[k]);
        os << "\n";
    }
}

inline std::string csv_string(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

// Doubles in reports go through g17 so JSON and CSV agree to the last bit.
inline json number(double x) {
    if (!std::isfinite(x)) return g17(x);
    return json::parse(g17(x));
}

// ----- parameter schemas -----

enum class ParamType { integer, real, text, boolean, real_list };

struct ParamSpec {
    std::string name;
    ParamType type;
    std::string default_value;
    std::string help;
};

using ParamValue = std::variant<std::int64_t, double, std::string, bool, std::vector<double>>;

struct SchemaError : ConfigError {
    using ConfigError::ConfigError;
};

inline ParamValue parse_param(const ParamSpec& p, const std::string& raw, const std::string& where) {
    auto fail = [&](const std::string& why) -> SchemaError {
        return SchemaError(where + ": field '" + p.name + "' " + why + " (got '" + raw + "')");
    };
    auto to_double = [&](const std::string& s) {
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw fail("expects a real number");
        }
        if (pos != s.size()) throw fail("expects a real number");
        return v;
    };
    switch (p.type) {
        case ParamType::integer: {
            std::size_t pos = 0;
            long long v;
            try {
                v = std::stoll(raw, &pos);
            } catch (const std::exception&) {
                throw fail("expects an integer");
            }
            if (pos != raw.size()) throw fail("expects an integer");
            return static_cast<std::int64_t>(v);
        }
        case ParamType::real: return to_double(raw);
        case ParamType::text: return raw;
        case ParamType::boolean:
            if (raw == "true" || raw == "1" || raw == "yes") return true;
            if (raw == "false" || raw == "0" || raw == "no") return false;
            throw fail("expects true or false");
        case ParamType::real_list: {
            std::vector<double> v;
            std::string tok;
            std::istringstream is(raw);
            while (std::getline(is, tok, ',')) {
                auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
                if (b == std::string::npos) throw fail("has an empty list entry");
                v.push_back(to_double(tok.substr(b, e - b + 1)));
            }
            if (v.empty()) throw fail("expects a comma-separated list");
            return v;
        }
    }
    throw fail("has an unknown type");
}

inline json to_json(const ParamValue& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto d = std::get_if<double>(&v)) return number(*d);
    if (auto s = std::get_if<std::string>(&v)) return *s;
    if (auto b = std::get_if<bool>(&v)) return *b;
    json a = json::array();
    for (double x : std::get<std::vector<double>>(v)) a.push_back(number(x));
    return a;
}

// Resolved parameter block: defaults, then the config file, then command-line flags.
class Params {
public:
    Params() = default;
    Params(const std::vector<ParamSpec>& schema, const std::map<std::string, std::string>& file,
           const std::map<std::string, std::string>& flags) {
        std::map<std::string, const ParamSpec*> by_name;
        for (const auto& p : schema) by_name[p.name] = &p;
        for (const auto& [k, v] : file)
            if (!by_name.count(k)) throw SchemaError("config: unknown field '" + k + "'");
        for (const auto& p : schema) {
            std::string raw = p.default_value, where = "default";
            if (auto it = file.find(p.name); it != file.end()) raw = it->second, where = "config";
            if (auto it = flags.find(p.name); it != flags.end()) raw = it->second, where = "flag --" + p.name;
            values_[p.name] = parse_param(p, raw, where);
            order_.push_back(p.name);
        }
    }
    std::int64_t integer(const std::string& k) const { return std::get<std::int64_t>(at(k)); }
    double real(const std::string& k) const { return std::get<double>(at(k)); }
    const std::string& text(const std::string& k) const { return std::get<std::string>(at(k)); }
    bool boolean(const std::string& k) const { return std::get<bool>(at(k)); }
    const std::vector<double>& list(const std::string& k) const { return std::get<std::vector<double>>(at(k)); }
    json to_json() const {
        json j = json::object();
        for (const auto& k : order_) j[k] = io::to_json(values_.at(k));
        return j;
    }

private:
    const ParamValue& at(const std::string& k) const {
        auto it = values_.find(k);
        if (it == values_.end()) throw SchemaError("missing field '" + k + "'");
        return it->second;
    }
    std::map<std::string, ParamValue> values_;
    std::vector<std::string> order_;
};

// Distribution from the fields "<prefix>law", "<prefix>scale" and an optional "<prefix>atoms" string.
inline DistributionSpec distribution_from(const Params& p, const std::string& prefix = "") {
    DistributionSpec d;
    try {
        d.kind = parse_law(p.text(prefix + "law"));
    } catch (const ConfigError& e) {
        throw SchemaError("field '" + prefix + "law': " + e.what());
    }
    d.scale = p.real(prefix + "scale");
    if (d.kind == Law::tabulated) {
        auto c = parse_distribution_config("kind = tabulated\natoms = " + p.text(prefix + "atoms") + "\n");
        d.atoms = c.dist.atoms;
        if (d.atoms.empty()) throw SchemaError("field '" + prefix + "atoms' is empty for a tabulated law");
    }
    return d;
}

}  // namespace qdl::io
