#include "nsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nsim/experiment.hpp"

namespace nsim {

namespace {

struct CsvRow {
    std::string policy;
    std::uint32_t replica, t;
    double cum_reward, benchmark_cum, ratio;  // ratio NaN when empty
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& s, const std::string& context) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(context + ": bad numeric field `" + s + "`");
    return v;
}

std::vector<CsvRow> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("results file is empty: " + path.string());
    if (split_fields(line) !=
        std::vector<std::string>{"replica", "policy", "t", "stage_reward", "cum_reward",
                                 "benchmark_cum", "regret_ratio"})
        throw std::runtime_error(path.string() + ": unexpected CSV header");

    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        const std::string at = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 7) throw std::runtime_error(at + ": expected 7 fields");
        CsvRow row;
        row.replica = static_cast<std::uint32_t>(parse_double_field(f[0], at));
        row.policy = f[1];
        row.t = static_cast<std::uint32_t>(parse_double_field(f[2], at));
        row.cum_reward = parse_double_field(f[4], at);
        row.benchmark_cum = parse_double_field(f[5], at);
        row.ratio = parse_double_field(f[6], at);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("results file has no data rows");
    return rows;
}

std::vector<std::uint32_t> checkpoint_stages(std::uint32_t horizon, std::uint32_t checkpoints) {
    std::vector<std::uint32_t> stages;
    if (checkpoints == 0 || checkpoints >= horizon) {
        for (std::uint32_t t = 1; t <= horizon; ++t) stages.push_back(t);
        return stages;
    }
    for (std::uint32_t i = 1; i <= checkpoints; ++i) {
        const auto t = static_cast<std::uint32_t>(
            std::llround(static_cast<double>(i) * horizon / checkpoints));
        if (stages.empty() || stages.back() != t) stages.push_back(std::max(t, 1u));
    }
    return stages;
}

}  // namespace

std::vector<ReportRow> summarize_csv(const std::filesystem::path& csv_path,
                                     std::uint32_t checkpoints) {
    const std::vector<CsvRow> rows = read_rows(csv_path);
    std::uint32_t horizon = 0;
    for (const CsvRow& r : rows) horizon = std::max(horizon, r.t);

    std::vector<std::string> policies;  // keep first-appearance order
    for (const CsvRow& r : rows)
        if (std::find(policies.begin(), policies.end(), r.policy) == policies.end())
            policies.push_back(r.policy);

    std::vector<ReportRow> out;
    for (const std::string& policy : policies) {
        for (const std::uint32_t t : checkpoint_stages(horizon, checkpoints)) {
            ReportRow agg;
            agg.policy = policy;
            agg.t = t;
            double ratio_sum = 0.0;
            std::uint32_t ratio_n = 0;
            for (const CsvRow& r : rows) {
                if (r.policy != policy || r.t != t) continue;
                agg.mean_cum_reward += r.cum_reward;
                agg.mean_benchmark_cum += r.benchmark_cum;
                ++agg.replicas;
                if (!std::isnan(r.ratio)) {
                    ratio_sum += r.ratio;
                    ++ratio_n;
                }
            }
            if (agg.replicas == 0) continue;
            agg.mean_cum_reward /= agg.replicas;
            agg.mean_benchmark_cum /= agg.replicas;
            agg.mean_ratio = ratio_n ? ratio_sum / ratio_n
                                     : std::numeric_limits<double>::quiet_NaN();
            out.push_back(std::move(agg));
        }
    }
    return out;
}

std::string render_table(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "policy            t   mean_cum_reward  mean_benchmark   mean_regret_ratio\n";
    for (const ReportRow& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-14s %5u %17.2f %15.2f   %.6f\n",
                      r.policy.c_str(), r.t, r.mean_cum_reward, r.mean_benchmark_cum,
                      r.mean_ratio);
        out << line;
    }
    return out.str();
}

void write_ratio_svg(const std::filesystem::path& csv_path,
                     const std::filesystem::path& svg_path) {
    const std::vector<ReportRow> rows = summarize_csv(csv_path, 0);
    std::vector<std::string> policies;
    std::uint32_t horizon = 0;
    double max_ratio = 0.0, min_ratio = 0.0;
    for (const ReportRow& r : rows) {
        if (std::find(policies.begin(), policies.end(), r.policy) == policies.end())
            policies.push_back(r.policy);
        horizon = std::max(horizon, r.t);
        if (!std::isnan(r.mean_ratio)) {
            max_ratio = std::max(max_ratio, r.mean_ratio);
            min_ratio = std::min(min_ratio, r.mean_ratio);
        }
    }
    if (horizon == 0) throw std::runtime_error("no stages to plot");
    if (max_ratio <= min_ratio) max_ratio = min_ratio + 1.0;

    const double width = 720, height = 440, margin = 50;
    const auto x = [&](double t) {
        return margin + (t - 1) / std::max(1.0, horizon - 1.0) * (width - 2 * margin);
    };
    const auto y = [&](double v) {
        return height - margin - (v - min_ratio) / (max_ratio - min_ratio) *
                                      (height - 2 * margin);
    };
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
        << width - margin << "' y2='" << height - margin << "' stroke='black'/>\n"
        << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n"
        << "<text x='" << width / 2 << "' y='" << height - 12
        << "' font-size='13' text-anchor='middle'>t</text>\n"
        << "<text x='14' y='" << height / 2
        << "' font-size='13' text-anchor='middle' transform='rotate(-90 14 " << height / 2
        << ")'>mean regret ratio</text>\n";
    for (std::size_t p = 0; p < policies.size(); ++p) {
        svg << "<polyline fill='none' stroke='" << kColors[p % 6] << "' stroke-width='1.5' points='";
        for (const ReportRow& r : rows)
            if (r.policy == policies[p] && !std::isnan(r.mean_ratio))
                svg << x(r.t) << ',' << y(r.mean_ratio) << ' ';
        svg << "'/>\n";
        svg << "<text x='" << width - margin + 4 << "' y='" << margin + 16.0 * p
            << "' font-size='12' fill='" << kColors[p % 6] << "'>" << policies[p]
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot write chart file: " + svg_path.string());
    out << svg.str();
}

}  // namespace nsim
