#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "json.hpp"

namespace dgcli {

using nlohmann::json;

// %.17g for every float; non-finite values become the strings "inf", "-inf", "nan".
inline std::string num17(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void dump17(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump17(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump17(j[i], out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float:
            out += num17(j.get<double>());
            break;
        default:
            out += j.dump();
    }
}

inline std::string dump17(const json& j) {
    std::string s;
    dump17(j, s);
    return s;
}

// Line-delimited JSON to a file or stdout ("-").
class LineWriter {
public:
    explicit LineWriter(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw std::invalid_argument("cannot open output file: " + path);
    }
    void operator()(const json& j) { out() << dump17(j) << '\n'; }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

inline std::unique_ptr<std::ofstream> open_csv(const std::string& path, const std::string& header) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw std::invalid_argument("cannot open output file: " + path);
    *f << header << '\n';
    return f;
}

inline json check_row(const std::string& source, const std::string& name, bool pass, double value, double bound) {
    return {{"type", "check"}, {"source", source}, {"check", name}, {"pass", pass}, {"value", value}, {"bound", bound}};
}

}  // namespace dgcli
