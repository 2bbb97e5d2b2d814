#pragma once

// File formats: JSON case files, trajectory CSV, and JSON reports.

#include "gridprice/dcopf.hpp"
#include "gridprice/errors.hpp"
#include "gridprice/grid_model.hpp"
#include "gridprice/price_dynamics.hpp"
#include "gridprice/rng.hpp"
#include "gridprice/welfare_oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gridprice {

using json = nlohmann::json;

namespace detail {

inline double require_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_number()) throw InvalidCase(where + ": missing numeric field '" + key + "'");
    return obj.at(key).get<double>();
}

inline std::size_t require_index(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_number_integer() || obj.at(key).get<long long>() < 0)
        throw InvalidCase(where + ": missing bus index '" + key + "'");
    return obj.at(key).get<std::size_t>();
}

inline std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    if (!obj.at(key).is_number()) throw InvalidCase(where + ": field '" + std::string(key) + "' must be a number or null");
    return obj.at(key).get<double>();
}

inline json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

/// Parses a case. With `allow_missing_costs` generators may omit `cost`
/// (topology templates for `gen`); their cost is left at 0.
inline GridCase case_from_json(const json& j, bool allow_missing_costs = false) {
    if (!j.is_object()) throw InvalidCase("case: top level must be an object");
    for (const char* key : {"buses", "slack_bus", "lines", "generators", "users"})
        if (!j.contains(key)) throw InvalidCase(std::string("case: missing key '") + key + "'");

    GridCase c;
    const json& buses = j.at("buses");
    if (!buses.is_array()) throw InvalidCase("case: 'buses' must be an array of ids");
    std::vector<long long> ids;
    for (const auto& b : buses) {
        if (!b.is_number_integer()) throw InvalidCase("case: bus ids must be integers");
        ids.push_back(b.get<long long>());
    }
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] != static_cast<long long>(i)) throw InvalidCase("case: bus ids must be 0..B-1");
    c.num_buses = ids.size();

    if (!j.at("slack_bus").is_number_integer() || j.at("slack_bus").get<long long>() < 0)
        throw InvalidCase("case: 'slack_bus' must be a bus id");
    c.slack_bus = j.at("slack_bus").get<std::size_t>();

    for (const char* key : {"lines", "generators", "users"})
        if (!j.at(key).is_array()) throw InvalidCase(std::string("case: '") + key + "' must be an array");

    std::size_t i = 0;
    for (const auto& l : j.at("lines")) {
        const std::string where = "line " + std::to_string(i++);
        c.lines.push_back({detail::require_index(l, "from", where), detail::require_index(l, "to", where),
                           detail::require_number(l, "susceptance", where), detail::optional_number(l, "limit", where)});
    }
    i = 0;
    for (const auto& g : j.at("generators")) {
        const std::string where = "generator " + std::to_string(i++);
        Generator gen;
        gen.bus = detail::require_index(g, "bus", where);
        if (allow_missing_costs && (!g.contains("cost") || g.at("cost").is_null())) gen.cost = 0.0;
        else gen.cost = detail::require_number(g, "cost", where);
        gen.pmax = detail::optional_number(g, "pmax", where);
        c.generators.push_back(gen);
    }
    i = 0;
    for (const auto& u : j.at("users")) {
        const std::string where = "user " + std::to_string(i++);
        c.users.push_back({detail::require_index(u, "bus", where), detail::require_number(u, "xbar", where),
                           detail::require_number(u, "a", where)});
    }
    return c;
}

inline json case_to_json(const GridCase& c) {
    json j;
    json buses = json::array();
    for (std::size_t b = 0; b < c.num_buses; ++b) buses.push_back(b);
    j["buses"] = buses;
    j["slack_bus"] = c.slack_bus;
    j["lines"] = json::array();
    for (const auto& l : c.lines)
        j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"susceptance", l.susceptance}, {"limit", detail::optional_to_json(l.limit)}});
    j["generators"] = json::array();
    for (const auto& g : c.generators)
        j["generators"].push_back({{"bus", g.bus}, {"cost", g.cost}, {"pmax", detail::optional_to_json(g.pmax)}});
    j["users"] = json::array();
    for (const auto& u : c.users) j["users"].push_back({{"bus", u.bus}, {"xbar", u.xbar}, {"a", u.a}});
    return j;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidCase("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidCase(path.string() + ": " + e.what());
    }
}

inline GridCase load_case(const std::filesystem::path& path, bool allow_missing_costs = false) {
    return case_from_json(read_json_file(path), allow_missing_costs);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

/// Copy of `tmpl` with every generator cost drawn uniformly from
/// [cost_lo, cost_hi] on the Costs stream of `seed`.
inline GridCase generate_case(GridCase tmpl, double cost_lo, double cost_hi, std::uint64_t seed) {
    if (!(cost_lo <= cost_hi) || !std::isfinite(cost_lo) || !std::isfinite(cost_hi))
        throw UsageError("generate_case: invalid cost range");
    RngStream rng(seed, Stream::Costs);
    for (auto& g : tmpl.generators) g.cost = rng.uniform(cost_lo, cost_hi);
    return tmpl;
}

/// Initial prices drawn uniformly from [lo, hi] on the InitialPrices stream.
inline PriceProfile random_prices(std::size_t n, double lo, double hi, std::uint64_t seed) {
    RngStream rng(seed, Stream::InitialPrices);
    PriceProfile p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(lo, hi);
    return p;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string trajectory_csv_header(std::size_t n) {
    std::string h = "k";
    for (std::size_t i = 0; i < n; ++i) h += ",p_" + std::to_string(i);
    for (std::size_t i = 0; i < n; ++i) h += ",x_" + std::to_string(i);
    h += ",J,C,V,residual";
    return h;
}

inline std::string trajectory_csv(const Trajectory& traj, std::size_t n) {
    const std::vector<double> v = lyapunov_series(traj);
    std::string out = trajectory_csv_header(n);
    out += '\n';
    for (std::size_t r = 0; r < traj.records.size(); ++r) {
        const auto& rec = traj.records[r];
        out += std::to_string(rec.k);
        for (std::size_t i = 0; i < n; ++i) out += ',' + format_double(rec.p[i]);
        for (std::size_t i = 0; i < n; ++i) out += ',' + format_double(rec.x[i]);
        out += ',' + format_double(rec.J);
        out += ',' + format_double(rec.C);
        out += ',' + format_double(v[r]);
        out += ',' + format_double(rec.residual);
        out += '\n';
    }
    return out;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Eigen::VectorXd vector_from_json(const json& a) {
    if (!a.is_array()) throw InvalidCase("expected a numeric array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw InvalidCase("expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
    return v;
}

inline const char* to_string(BindingConstraint::Kind k) {
    switch (k) {
        case BindingConstraint::Kind::LineUpper: return "line_upper";
        case BindingConstraint::Kind::LineLower: return "line_lower";
        case BindingConstraint::Kind::GeneratorMax: return "generator_max";
    }
    return "?";
}

inline json dispatch_to_json(const DispatchResult& d) {
    json j;
    j["J"] = d.value;
    j["generation"] = vector_to_json(d.generation);
    j["flows"] = vector_to_json(d.flows);
    j["lmp"] = vector_to_json(d.lmp.values);
    j["energy_price"] = d.energy_price;
    j["line_duals"] = vector_to_json(d.line_duals);
    if (d.shed.size() > 0) j["shed"] = vector_to_json(d.shed);
    j["binding"] = json::array();
    for (const auto& b : d.binding) j["binding"].push_back({{"kind", to_string(b.kind)}, {"index", b.index}});
    return j;
}

inline json summary_to_json(const Trajectory& traj, double cluster_tol = 1e-4) {
    json j;
    j["status"] = to_string(traj.status);
    j["iterations"] = traj.iterations;
    j["halvings"] = traj.halvings;
    j["cost_increase_steps"] = traj.cost_increases;
    j["transitions"] = traj.transitions;
    if (!traj.error.empty()) j["error"] = traj.error;
    if (!traj.records.empty()) {
        const auto& t = traj.terminal();
        j["p"] = vector_to_json(t.p.values);
        j["x"] = vector_to_json(t.x.values);
        j["lmp"] = vector_to_json(t.lambda.values);
        j["J"] = t.J;
        j["C"] = t.C;
        j["residual"] = t.residual;
        j["lmp_clusters"] = count_clusters(t.lambda.values, cluster_tol);
    }
    return j;
}

}  // namespace gridprice
