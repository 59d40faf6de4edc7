#include "copra/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace copra {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

// Line number (1-based) of a byte offset into the document.
std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key))
            fail(prefix + key, "unknown key");
}

template <typename T>
void read(const json& obj, const std::string& key, T& out, const std::string& prefix = "") {
    auto it = obj.find(key);
    if (it == obj.end())
        return;
    try {
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!it->is_number_integer())
                fail(prefix + key, "expected an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number())
                fail(prefix + key, "expected a number");
        }
        out = it->get<T>();
    } catch (const json::exception& e) {
        fail(prefix + key, e.what());
    }
}

GammaZPolicy parse_policy(const std::string& s) {
    if (s == "averaged")
        return GammaZPolicy::Averaged;
    if (s == "per-snapshot-median")
        return GammaZPolicy::PerSnapshotMedian;
    fail("gamma_z_policy", "expected 'averaged' or 'per-snapshot-median', got '" + s + "'");
}

SinrAggregation parse_aggregation(const std::string& s) {
    if (s == "linear")
        return SinrAggregation::Linear;
    if (s == "db")
        return SinrAggregation::Decibel;
    fail("sinr_aggregation", "expected 'linear' or 'db', got '" + s + "'");
}

}  // namespace

std::string_view policy_name(GammaZPolicy p) {
    return p == GammaZPolicy::Averaged ? "averaged" : "per-snapshot-median";
}

std::string_view aggregation_name(SinrAggregation a) {
    return a == SinrAggregation::Linear ? "linear" : "db";
}

void ExperimentConfig::validate() const {
    if (n_elements < 2)
        fail("n_elements", "must be at least 2");
    if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
        fail("spacing_wavelengths", "must be positive");
    if (n_interferers < 0)
        fail("n_interferers", "must be non-negative");
    if (!std::isfinite(inr_db))
        fail("inr_db", "must be finite");
    if (!(soi_error_bound_deg >= 0.0) || !std::isfinite(soi_error_bound_deg))
        fail("soi_error_bound_deg", "must be non-negative");
    if (!(interferer_guard_deg >= 0.0) || interferer_guard_deg >= 90.0)
        fail("interferer_guard_deg", "must lie in [0, 90)");
    if (trials < 1)
        fail("trials", "must be positive");
    if (n_snapshots < 1)
        fail("n_snapshots", "must be positive");
    if (!std::isfinite(snr_db))
        fail("snr_db", "must be finite");
    if (snr_db_grid.empty())
        fail("snr_db_grid", "must not be empty");
    for (double v : snr_db_grid)
        if (!std::isfinite(v))
            fail("snr_db_grid", "entries must be finite");
    if (snapshot_grid.empty())
        fail("snapshot_grid", "must not be empty");
    for (int v : snapshot_grid)
        if (v < 1)
            fail("snapshot_grid", "entries must be positive");
    if (!(rho > 0.0 && rho < 1.0))
        fail("rho", "must lie in (0, 1)");
    if (methods.empty())
        fail("methods", "must not be empty");
    if (workers < 0)
        fail("workers", "must be non-negative");
    if (!(diagonal_loading >= 0.0) || !std::isfinite(diagonal_loading))
        fail("diagonal_loading", "must be non-negative");
    if (quasi_grid.points < 2)
        fail("quasi_grid.points", "must be at least 2");
    if (!(quasi_grid.lo_factor > 0.0))
        fail("quasi_grid.lo_factor", "must be positive");
    if (!(quasi_grid.hi_factor > quasi_grid.lo_factor))
        fail("quasi_grid.hi_factor", "must exceed lo_factor");
}

ScenarioConfig ExperimentConfig::scenario() const {
    ScenarioConfig s;
    s.geometry = {n_elements, spacing_wavelengths};
    s.n_interferers = n_interferers;
    s.snr_db = snr_db;
    s.inr_db = inr_db;
    s.error_bound_deg = soi_error_bound_deg;
    s.interferer_guard_deg = interferer_guard_deg;
    return s;
}

CopraOptions ExperimentConfig::copra_options() const {
    CopraOptions o;
    o.rho = rho;
    o.gamma_z_policy = gamma_z_policy;
    return o;
}

bool ExperimentConfig::enabled(Method m) const {
    return m == Method::Optimal || std::find(methods.begin(), methods.end(), m) != methods.end();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
        return cfg;
    json doc;
    try {
        // Comments are allowed so config files can be annotated.
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error at line " + std::to_string(line_of(text, e.byte)) +
                          ": " + e.what());
    }
    if (doc.is_null())
        return cfg;
    if (!doc.is_object())
        throw ConfigError("config document must be an object");

    reject_unknown(doc,
                   {"n_elements", "spacing_wavelengths", "n_interferers", "inr_db",
                    "soi_error_bound_deg", "interferer_guard_deg", "trials", "n_snapshots", "snr_db",
                    "snr_db_grid", "snapshot_grid", "rho", "methods", "seed", "workers",
                    "diagonal_loading", "quasi_grid", "gamma_z_policy", "sinr_aggregation"},
                   "");
    read(doc, "n_elements", cfg.n_elements);
    read(doc, "spacing_wavelengths", cfg.spacing_wavelengths);
    read(doc, "n_interferers", cfg.n_interferers);
    read(doc, "inr_db", cfg.inr_db);
    read(doc, "soi_error_bound_deg", cfg.soi_error_bound_deg);
    read(doc, "interferer_guard_deg", cfg.interferer_guard_deg);
    read(doc, "trials", cfg.trials);
    read(doc, "n_snapshots", cfg.n_snapshots);
    read(doc, "snr_db", cfg.snr_db);
    read(doc, "snr_db_grid", cfg.snr_db_grid);
    read(doc, "snapshot_grid", cfg.snapshot_grid);
    read(doc, "rho", cfg.rho);
    read(doc, "seed", cfg.seed);
    read(doc, "workers", cfg.workers);
    read(doc, "diagonal_loading", cfg.diagonal_loading);

    if (auto it = doc.find("methods"); it != doc.end()) {
        std::vector<std::string> names;
        read(doc, "methods", names);
        cfg.methods.clear();
        for (const auto& n : names) {
            auto m = parse_method(n);
            if (!m)
                fail("methods", "unknown method '" + n + "'");
            if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) == cfg.methods.end())
                cfg.methods.push_back(*m);
        }
    }
    if (auto it = doc.find("quasi_grid"); it != doc.end()) {
        if (!it->is_object())
            fail("quasi_grid", "expected an object");
        reject_unknown(*it, {"points", "lo_factor", "hi_factor"}, "quasi_grid.");
        read(*it, "points", cfg.quasi_grid.points, "quasi_grid.");
        read(*it, "lo_factor", cfg.quasi_grid.lo_factor, "quasi_grid.");
        read(*it, "hi_factor", cfg.quasi_grid.hi_factor, "quasi_grid.");
    }
    if (doc.contains("gamma_z_policy")) {
        std::string p;
        read(doc, "gamma_z_policy", p);
        cfg.gamma_z_policy = parse_policy(p);
    }
    if (doc.contains("sinr_aggregation")) {
        std::string a;
        read(doc, "sinr_aggregation", a);
        cfg.sinr_aggregation = parse_aggregation(a);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json doc;
    doc["n_elements"] = cfg.n_elements;
    doc["spacing_wavelengths"] = cfg.spacing_wavelengths;
    doc["n_interferers"] = cfg.n_interferers;
    doc["inr_db"] = cfg.inr_db;
    doc["soi_error_bound_deg"] = cfg.soi_error_bound_deg;
    doc["interferer_guard_deg"] = cfg.interferer_guard_deg;
    doc["trials"] = cfg.trials;
    doc["n_snapshots"] = cfg.n_snapshots;
    doc["snr_db"] = cfg.snr_db;
    doc["snr_db_grid"] = cfg.snr_db_grid;
    doc["snapshot_grid"] = cfg.snapshot_grid;
    doc["rho"] = cfg.rho;
    json methods = json::array();
    for (Method m : cfg.methods)
        methods.push_back(std::string(method_name(m)));
    doc["methods"] = methods;
    doc["seed"] = cfg.seed;
    doc["workers"] = cfg.workers;
    doc["diagonal_loading"] = cfg.diagonal_loading;
    doc["quasi_grid"] = {{"points", cfg.quasi_grid.points},
                         {"lo_factor", cfg.quasi_grid.lo_factor},
                         {"hi_factor", cfg.quasi_grid.hi_factor}};
    doc["gamma_z_policy"] = std::string(policy_name(cfg.gamma_z_policy));
    doc["sinr_aggregation"] = std::string(aggregation_name(cfg.sinr_aggregation));
    return doc.dump(2) + "\n";
}

}  // namespace copra
