#include "copra/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace copra {

using nlohmann::json;

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, bool& ok) {
    if (s == "nan") {
        ok = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        ok = false;
        return 0;
    }
    ok = used == s.size() && !s.empty();
    return v;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json solve_json(const SecularSolveReport& r) {
    json j = {{"gamma", r.gamma},         {"iterations", r.iterations}, {"residual", r.residual},
              {"tolerance", r.tolerance}, {"converged", r.converged},   {"fallback_used", r.fallback_used}};
    if (r.bracket)
        j["bracket"] = {r.bracket->first, r.bracket->second};
    else
        j["bracket"] = nullptr;
    return j;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<CsvRow> sweep_rows(const SweepResult& result) {
    std::vector<CsvRow> rows;
    for (const SweepPoint& p : result.points) {
        for (Method m : kAllMethods) {
            const MethodStats& st = p.methods[method_index(m)];
            if (!st.enabled)
                continue;
            rows.push_back({std::string(sweep_kind_name(result.kind)), p.value,
                            std::string(method_name(m)), st.mean_sinr_db, st.stderr_db, st.count,
                            st.fallback_rate});
        }
    }
    return rows;
}

std::string to_csv(const std::vector<CsvRow>& rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const CsvRow& r : rows) {
        out += r.sweep_var + ',' + format_number(r.value) + ',' + r.method + ',' +
               format_number(r.mean_sinr_db) + ',' + format_number(r.stderr_db) + ',' +
               std::to_string(r.trials) + ',' + format_number(r.fallback_rate) + '\n';
    }
    return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw CsvError("CSV row 1: missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kCsvHeader)
        throw CsvError("CSV row 1: unexpected header '" + line + "'");

    std::vector<CsvRow> rows;
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_fields(line);
        if (f.size() != 7)
            throw CsvError("CSV row " + std::to_string(row_no) + ": expected 7 fields, got " +
                           std::to_string(f.size()));
        CsvRow r;
        bool ok_v = false, ok_m = false, ok_s = false, ok_f = false;
        r.sweep_var = f[0];
        r.value = parse_double(f[1], ok_v);
        r.method = f[2];
        r.mean_sinr_db = parse_double(f[3], ok_m);
        r.stderr_db = parse_double(f[4], ok_s);
        bool ok_t = true;
        try {
            std::size_t used = 0;
            r.trials = std::stoi(f[5], &used);
            ok_t = used == f[5].size();
        } catch (...) {
            ok_t = false;
        }
        r.fallback_rate = parse_double(f[6], ok_f);
        if (!ok_v || !ok_m || !ok_s || !ok_t || !ok_f || r.method.empty() || r.sweep_var.empty())
            throw CsvError("CSV row " + std::to_string(row_no) + ": malformed field in '" + line + "'");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_svg(const std::vector<CsvRow>& rows) {
    // Series in order of first appearance.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    std::string sweep_var;
    for (const CsvRow& r : rows) {
        if (sweep_var.empty())
            sweep_var = r.sweep_var;
        if (!series.count(r.method))
            order.push_back(r.method);
        auto& pts = series[r.method];
        if (!std::isfinite(r.value) || !std::isfinite(r.mean_sinr_db))
            continue;
        pts.emplace_back(r.value, r.mean_sinr_db);
        xmin = std::min(xmin, r.value);
        xmax = std::max(xmax, r.value);
        ymin = std::min(ymin, r.mean_sinr_db);
        ymax = std::max(ymax, r.mean_sinr_db);
    }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) {
        xmin -= 1;
        xmax += 1;
    }
    double span = ymax - ymin;
    if (span == 0)
        span = 1;
    const double y_lo = ymin - 0.05 * span;
    const double y_hi = ymax + 0.05 * span;

    const double width = 760, height = 480;
    const double left = 70, right = 190, top = 30, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" data-x-min=\"" << format_number(xmin)
      << "\" data-x-max=\"" << format_number(xmax) << "\" data-y-min=\"" << format_number(y_lo)
      << "\" data-y-max=\"" << format_number(y_hi) << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Axis ticks: five on y, the distinct sweep values on x (thinned to ~10).
    s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double y = y_lo + (y_hi - y_lo) * k / 4.0;
        s << "<line x1=\"" << fixed2(left - 4) << "\" y1=\"" << fixed2(py(y)) << "\" x2=\""
          << fixed2(left) << "\" y2=\"" << fixed2(py(y)) << "\" stroke=\"black\"/>"
          << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(py(y) + 4)
          << "\" text-anchor=\"end\">" << fixed2(y) << "</text>\n";
    }
    std::vector<double> xs;
    for (const auto& name : order)
        for (const auto& [x, y] : series[name])
            xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    const std::size_t stride = std::max<std::size_t>(1, (xs.size() + 9) / 10);
    for (std::size_t k = 0; k < xs.size(); k += stride) {
        s << "<line x1=\"" << fixed2(px(xs[k])) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\""
          << fixed2(px(xs[k])) << "\" y2=\"" << fixed2(top + ph + 4) << "\" stroke=\"black\"/>"
          << "<text x=\"" << fixed2(px(xs[k])) << "\" y=\"" << fixed2(top + ph + 18)
          << "\" text-anchor=\"middle\">" << format_number(xs[k]) << "</text>\n";
    }
    const std::string xlabel = sweep_var == "snapshots" ? "Number of snapshots"
                               : sweep_var == "snr"     ? "Input SNR (dB)"
                                                        : sweep_var;
    s << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"" << fixed2(height - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    s << "<text x=\"18\" y=\"" << fixed2(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\""
      << " transform=\"rotate(-90 18 " << fixed2(top + ph / 2) << ")\">Output SINR (dB)</text>\n";
    s << "</g>\n";

    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::string& name = order[k];
        const char* color = kPalette[k % std::size(kPalette)];
        const auto& pts = series[name];
        s << "<polyline class=\"series\" data-method=\"" << name << "\" fill=\"none\" stroke=\""
          << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            s << (i ? " " : "") << fixed2(px(pts[i].first)) << ',' << fixed2(py(pts[i].second));
        s << "\"/>\n";
        for (const auto& [x, y] : pts)
            s << "<circle class=\"marker\" data-method=\"" << name << "\" cx=\"" << fixed2(px(x))
              << "\" cy=\"" << fixed2(py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = top + 12 + 20.0 * static_cast<double>(k);
        s << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">"
          << "<line x1=\"" << fixed2(left + pw + 15) << "\" y1=\"" << fixed2(ly) << "\" x2=\""
          << fixed2(left + pw + 40) << "\" y2=\"" << fixed2(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/><text x=\"" << fixed2(left + pw + 46) << "\" y=\""
          << fixed2(ly + 4) << "\">" << name << "</text></g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string sweep_metadata(const SweepResult& result, const std::string& version) {
    json meta;
    meta["version"] = version;
    meta["seed"] = result.seed;
    meta["sweep_kind"] = std::string(sweep_kind_name(result.kind));
    meta["trials"] = result.trials;
    meta["config"] = json::parse(serialize_config(result.config));
    meta["sinr_aggregation"] = std::string(aggregation_name(result.config.sinr_aggregation));
    meta["diagonal_loading"] = result.config.diagonal_loading;
    meta["noise_power"] = 1.0;

    json rates = json::object();
    for (Method m : kAllMethods) {
        if (!result.config.enabled(m))
            continue;
        double total = 0;
        for (const SweepPoint& p : result.points)
            total += p.methods[method_index(m)].fallback_rate;
        rates[std::string(method_name(m))] =
            result.points.empty() ? 0.0 : total / static_cast<double>(result.points.size());
    }
    meta["fallback_rates"] = rates;

    json points = json::array();
    for (const SweepPoint& p : result.points)
        points.push_back({{"value", p.value},
                          {"gamma_b_fallback_rate", p.gamma_b_fallback_rate},
                          {"gamma_z_fallback_rate", p.gamma_z_fallback_rate}});
    meta["points"] = points;
    return meta.dump(2) + "\n";
}

std::string trial_json(const TrialRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["trial_index"] = rec.trial_index;
    j["snr_db"] = cfg.snr_db;
    j["n_snapshots"] = cfg.n_snapshots;
    j["scenario"] = {{"soi_doa_deg", rec.soi_doa_deg},
                     {"soi_error_deg", rec.soi_error_deg},
                     {"interferer_doas_deg", rec.interferer_doas_deg}};
    j["split"] = {{"n1", rec.n1}, {"n2", rec.n2}, {"rho", cfg.rho}};
    j["gamma_b"] = solve_json(rec.copra.b);
    j["gamma_z"] = solve_json(rec.copra.z);
    j["lambda_o_sq"] = rec.copra.lambda_o_sq;
    j["quasi"] = {{"gamma_b", rec.quasi_gamma_b}, {"gamma_z", rec.quasi_gamma_z}};
    j["mvdr_loaded"] = rec.mvdr_loaded;
    json sinr = json::object();
    for (Method m : kAllMethods) {
        if (!cfg.enabled(m))
            continue;
        const auto& v = rec.sinr[method_index(m)];
        json entry = {{"linear", optional_json(v)},
                      {"db", v ? json(10.0 * std::log10(*v)) : json(nullptr)}};
        if (!rec.failure[method_index(m)].empty())
            entry["failure"] = rec.failure[method_index(m)];
        sinr[std::string(method_name(m))] = entry;
    }
    j["sinr"] = sinr;
    return j.dump(2) + "\n";
}

std::string trial_text(const TrialRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed) {
    std::ostringstream s;
    auto flag = [](bool b) { return b ? "yes" : "no"; };
    s << "trial " << rec.trial_index << " (seed " << seed << ")\n";
    s << "  SNR " << format_number(cfg.snr_db) << " dB, " << cfg.n_snapshots << " snapshots\n";
    s << "  SOI DOA " << format_number(rec.soi_doa_deg) << " deg, presumed error "
      << format_number(rec.soi_error_deg) << " deg\n";
    s << "  interferers:";
    if (rec.interferer_doas_deg.empty())
        s << " none";
    for (double d : rec.interferer_doas_deg)
        s << ' ' << format_number(d);
    s << "\n";
    s << "  eigen split: n1 = " << rec.n1 << ", n2 = " << rec.n2 << " (rho " << format_number(cfg.rho)
      << ")\n";
    auto solve_line = [&](const char* name, const SecularSolveReport& r) {
        s << "  " << name << " = " << format_number(r.gamma) << "  converged " << flag(r.converged)
          << ", fallback " << flag(r.fallback_used) << ", iterations " << r.iterations
          << ", |G| " << format_number(r.residual) << "\n";
    };
    solve_line("gamma_b", rec.copra.b);
    solve_line("gamma_z", rec.copra.z);
    s << "  quasi gamma_b = " << format_number(rec.quasi_gamma_b)
      << ", gamma_z = " << format_number(rec.quasi_gamma_z) << "\n";
    s << "  output SINR (dB):\n";
    for (Method m : kAllMethods) {
        if (!cfg.enabled(m))
            continue;
        const auto& v = rec.sinr[method_index(m)];
        s << "    " << method_name(m) << ": ";
        if (v)
            s << format_number(10.0 * std::log10(*v));
        else
            s << "failed (" << rec.failure[method_index(m)] << ")";
        if (m == Method::SampleMvdr && rec.mvdr_loaded)
            s << "  [minimal loading applied]";
        s << "\n";
    }
    return s.str();
}

}  // namespace copra
