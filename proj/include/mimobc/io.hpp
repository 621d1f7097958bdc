#pragma once
// Channel-spec files, sample export (CSV / JSON) and plot-script emission.

#include "mimobc/region.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mimobc {

struct ParseError : Error {
    using Error::Error;
};

namespace detail {

inline Matrix json_matrix(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a non-empty 2-D array");
    const auto rows = j.size();
    if (!j[0].is_array() || j[0].empty()) throw ParseError(what + ": expected a non-empty 2-D array");
    const auto cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ParseError(what + ": ragged rows");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw ParseError(what + ": non-numeric entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
        }
    }
    return m;
}

inline nlohmann::json matrix_json(const Matrix& m) {
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        j.push_back(row);
    }
    return j;
}

}  // namespace detail

/// Parses a channel-spec JSON document and validates it.
inline ChannelModel parse_channel_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("channel spec must be a JSON object");
    if (!doc.contains("t") || !doc["t"].is_number_integer() || doc["t"].get<int>() < 1)
        throw ParseError("channel spec needs a positive integer \"t\"");
    if (!doc.contains("users") || !doc["users"].is_array() || doc["users"].size() != 2)
        throw ParseError("channel spec needs \"users\": an array of two objects");
    if (!doc.contains("S")) throw ParseError("channel spec needs \"S\"");
    ChannelModel m;
    m.t = doc["t"].get<int>();
    m.S = detail::json_matrix(doc["S"], "S");
    for (int j = 0; j < 2; ++j) {
        const auto& u = doc["users"][static_cast<std::size_t>(j)];
        const std::string tag = "users[" + std::to_string(j) + "]";
        if (!u.is_object() || !u.contains("H") || !u.contains("Sigma"))
            throw ParseError(tag + " needs \"H\" and \"Sigma\"");
        UserChannel uc;
        if (u["H"].is_string()) {
            if (u["H"].get<std::string>() != "identity")
                throw ParseError(tag + ".H: the only string value accepted is \"identity\"");
            uc.H = Matrix::Identity(m.t, m.t);
        } else {
            uc.H = detail::json_matrix(u["H"], tag + ".H");
        }
        uc.Sigma = detail::json_matrix(u["Sigma"], tag + ".Sigma");
        (j == 0 ? m.user1 : m.user2) = uc;
    }
    if (doc.contains("name") && doc["name"].is_string()) m.name = doc["name"].get<std::string>();
    return make_channel(std::move(m));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ChannelModel parse_channel_file(const std::string& path) {
    return parse_channel_json(read_file(path));
}

inline Matrix parse_matrix_file(const std::string& path) {
    try {
        return detail::json_matrix(nlohmann::json::parse(read_file(path)), path);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

inline nlohmann::json channel_json(const ChannelModel& m) {
    nlohmann::json doc;
    doc["t"] = m.t;
    doc["users"] = nlohmann::json::array();
    for (const auto* u : {&m.user1, &m.user2})
        doc["users"].push_back({{"H", detail::matrix_json(u->H)}, {"Sigma", detail::matrix_json(u->Sigma)}});
    doc["S"] = detail::matrix_json(m.S);
    if (!m.name.empty()) doc["name"] = m.name;
    return doc;
}

// ---------------------------------------------------------------------------
// Sample export.

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline const char* kCsvHeader = "mu1,mu2,scheme,order,R0,R1,R2,objective,seed";

inline std::string samples_csv(const std::vector<RegionSample>& samples) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& s : samples) {
        out += format_number(s.weights.mu1) + "," + format_number(s.weights.mu2) + "," +
               to_string(s.scheme) + "," + to_string(s.order) + "," + format_number(s.triple.r0) +
               "," + format_number(s.triple.r1) + "," + format_number(s.triple.r2) + "," +
               format_number(s.objective) + "," + std::to_string(s.seed) + "\n";
    }
    return out;
}

/// Row of an exported CSV, values as printed.
struct SampleRow {
    double mu1 = 0, mu2 = 0;
    Scheme scheme = Scheme::SDPC;
    Order order = Order::O12;
    double r0 = 0, r1 = 0, r2 = 0, objective = 0;
    std::uint64_t seed = 0;
};

inline std::vector<SampleRow> parse_samples_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("unexpected CSV header");
    std::vector<SampleRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw ParseError("CSV row with " + std::to_string(f.size()) + " fields");
        try {
            SampleRow r;
            r.mu1 = std::stod(f[0]);
            r.mu2 = std::stod(f[1]);
            r.scheme = parse_scheme(f[2]);
            r.order = parse_order(f[3]);
            r.r0 = std::stod(f[4]);
            r.r1 = std::stod(f[5]);
            r.r2 = std::stod(f[6]);
            r.objective = std::stod(f[7]);
            r.seed = std::stoull(f[8]);
            rows.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("bad CSV value: ") + e.what());
        }
    }
    return rows;
}

inline nlohmann::json sample_json(const RegionSample& s) {
    return {{"mu1", s.weights.mu1},
            {"mu2", s.weights.mu2},
            {"scheme", to_string(s.scheme)},
            {"order", to_string(s.order)},
            {"R0", s.triple.r0},
            {"R1", s.triple.r1},
            {"R2", s.triple.r2},
            {"r01", s.triple.r01},
            {"r02", s.triple.r02},
            {"r1_raw", s.triple.r1_raw},
            {"r2_raw", s.triple.r2_raw},
            {"objective", s.objective},
            {"seed", s.seed},
            {"K1", detail::matrix_json(s.pair.K1)},
            {"K2", detail::matrix_json(s.pair.K2)}};
}

// Numbers are rounded to 12 significant digits so JSON and CSV carry the same values.
inline nlohmann::json round12(const nlohmann::json& j) {
    if (j.is_number_float()) return std::stod(format_number(j.get<double>()));
    if (j.is_array() || j.is_object()) {
        nlohmann::json out = j;
        for (auto it = out.begin(); it != out.end(); ++it) *it = round12(*it);
        return out;
    }
    return j;
}

inline std::string samples_json(const std::vector<RegionSample>& samples) {
    auto arr = nlohmann::json::array();
    for (const auto& s : samples) arr.push_back(round12(sample_json(s)));
    return arr.dump(2) + "\n";
}

inline std::vector<SampleRow> parse_samples_json(const std::string& text) {
    std::vector<SampleRow> rows;
    try {
        for (const auto& o : nlohmann::json::parse(text)) {
            SampleRow r;
            r.mu1 = o.at("mu1").get<double>();
            r.mu2 = o.at("mu2").get<double>();
            r.scheme = parse_scheme(o.at("scheme").get<std::string>());
            r.order = parse_order(o.at("order").get<std::string>());
            r.r0 = o.at("R0").get<double>();
            r.r1 = o.at("R1").get<double>();
            r.r2 = o.at("R2").get<double>();
            r.objective = o.at("objective").get<double>();
            r.seed = o.at("seed").get<std::uint64_t>();
            rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed sample JSON: ") + e.what());
    }
    return rows;
}

/// A standalone matplotlib script that reads `csv_path` and draws R1-R2 slices of the
/// samples, grouped into `levels` bands of R0.
inline std::string plot_script(const std::string& csv_path, int levels = 4) {
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
         "import csv\n"
         "import sys\n"
         "import matplotlib\n"
         "matplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\n\n"
      << "DATA = " << nlohmann::json(csv_path).dump() << "\n"
      << "LEVELS = " << levels << "\n\n"
      << "rows = list(csv.DictReader(open(sys.argv[1] if len(sys.argv) > 1 else DATA)))\n"
         "r0 = [float(r[\"R0\"]) for r in rows]\n"
         "lo, hi = min(r0), max(r0)\n"
         "width = (hi - lo) / LEVELS or 1.0\n"
         "fig, ax = plt.subplots()\n"
         "for k in range(LEVELS):\n"
         "    a, b = lo + k * width, lo + (k + 1) * width\n"
         "    sel = [r for r in rows if a <= float(r[\"R0\"]) <= b]\n"
         "    for key in sorted({(r[\"scheme\"], r[\"order\"]) for r in sel}):\n"
         "        pts = sorted((float(r[\"R1\"]), float(r[\"R2\"])) for r in sel\n"
         "                     if (r[\"scheme\"], r[\"order\"]) == key)\n"
         "        if pts:\n"
         "            ax.plot([p[0] for p in pts], [p[1] for p in pts], \"o\",\n"
         "                    label=\"%s/%s, R0 in [%.3g, %.3g]\" % (key[0], key[1], a, b))\n"
         "ax.set_xlabel(\"R1 (bits)\")\n"
         "ax.set_ylabel(\"R2 (bits)\")\n"
         "ax.legend(fontsize=\"small\")\n"
         "out = (sys.argv[1] if len(sys.argv) > 1 else DATA) + \".png\"\n"
         "fig.savefig(out, dpi=150)\n"
         "print(out)\n";
    return s.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

}  // namespace mimobc
