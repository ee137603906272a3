#include "mgrid/vfa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mgrid {

PiecewiseLinearVfa PiecewiseLinearVfa::zeros(int periods, double q_min, double q_max,
                                             int segment_count) {
    if (periods < 0) throw std::invalid_argument("vfa: negative period count");
    if (segment_count < 1) throw std::invalid_argument("vfa: segment_count must be >= 1");
    if (!(q_min < q_max)) throw std::invalid_argument("vfa: q_min must be below q_max");
    PiecewiseLinearVfa v;
    v.q_min = q_min;
    v.q_max = q_max;
    v.segment_count = segment_count;
    v.slopes.assign(static_cast<size_t>(periods),
                    std::vector<double>(static_cast<size_t>(segment_count), 0.0));
    return v;
}

int PiecewiseLinearVfa::segment_of(double q) const {
    const double qc = std::clamp(q, q_min, q_max);
    const int a = static_cast<int>((qc - q_min) / width());
    return std::clamp(a, 0, segment_count - 1);
}

double PiecewiseLinearVfa::evaluate(int period, double q) const {
    if (q < q_min - 1e-9 || q > q_max + 1e-9)
        throw std::out_of_range("vfa: query " + std::to_string(q) + " outside heat range");
    const auto& row = slopes.at(static_cast<size_t>(period));
    const double w = width();
    double remaining = std::clamp(q, q_min, q_max) - q_min;
    double value = 0.0;
    for (int a = 0; a < segment_count && remaining > 0.0; ++a) {
        const double fill = std::min(remaining, w);
        value += row[static_cast<size_t>(a)] * fill;
        remaining -= fill;
    }
    return value;
}

bool PiecewiseLinearVfa::rows_monotone(double tol) const {
    for (const auto& row : slopes)
        for (size_t a = 0; a + 1 < row.size(); ++a)
            if (row[a] > row[a + 1] + tol) return false;
    return true;
}

void spar_project(std::vector<double>& d, int updated_index) {
    const int n = static_cast<int>(d.size());
    if (updated_index < 0 || updated_index >= n)
        throw std::out_of_range("spar: updated index out of range");

    // downward violation: the new value undercuts its left neighbors
    if (updated_index > 0 && d[static_cast<size_t>(updated_index - 1)] >
                                 d[static_cast<size_t>(updated_index)]) {
        int lo = updated_index;
        double sum = d[static_cast<size_t>(updated_index)];
        int count = 1;
        while (lo > 0 && d[static_cast<size_t>(lo - 1)] > sum / count) {
            --lo;
            sum += d[static_cast<size_t>(lo)];
            ++count;
        }
        const double mean = sum / count;
        for (int a = lo; a <= updated_index; ++a) d[static_cast<size_t>(a)] = mean;
        return;
    }
    // upward violation: the new value overshoots its right neighbors
    if (updated_index + 1 < n && d[static_cast<size_t>(updated_index)] >
                                     d[static_cast<size_t>(updated_index + 1)]) {
        int hi = updated_index;
        double sum = d[static_cast<size_t>(updated_index)];
        int count = 1;
        while (hi + 1 < n && sum / count > d[static_cast<size_t>(hi + 1)]) {
            ++hi;
            sum += d[static_cast<size_t>(hi)];
            ++count;
        }
        const double mean = sum / count;
        for (int a = updated_index; a <= hi; ++a) d[static_cast<size_t>(a)] = mean;
    }
}

void update_slope(PiecewiseLinearVfa& vfa, int period, int segment, double observation,
                  int n, const StepsizeRule& rule) {
    auto& row = vfa.slopes.at(static_cast<size_t>(period));
    if (segment < 0 || segment >= static_cast<int>(row.size()))
        throw std::out_of_range("vfa: segment index out of range");
    const double a = rule.alpha(n);
    row[static_cast<size_t>(segment)] =
        a * observation + (1.0 - a) * row[static_cast<size_t>(segment)];
    spar_project(row, segment);
}

std::string PiecewiseLinearVfa::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["q_min"] = q_min;
    j["q_max"] = q_max;
    j["segment_count"] = segment_count;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t t = 0; t < slopes.size(); ++t) {
        rows.push_back({{"period", t},
                        {"q_min", q_min},
                        {"q_max", q_max},
                        {"slopes", slopes[t]}});
    }
    j["rows"] = rows;
    return j.dump(2);
}

PiecewiseLinearVfa PiecewiseLinearVfa::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("vfa: unsupported file version");
    PiecewiseLinearVfa v;
    v.q_min = j.at("q_min").get<double>();
    v.q_max = j.at("q_max").get<double>();
    v.segment_count = j.at("segment_count").get<int>();
    for (const auto& row : j.at("rows")) {
        v.slopes.push_back(row.at("slopes").get<std::vector<double>>());
        if (static_cast<int>(v.slopes.back().size()) != v.segment_count)
            throw std::runtime_error("vfa: row length does not match segment_count");
    }
    return v;
}

void PiecewiseLinearVfa::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("vfa: cannot write " + path);
    os << to_json() << "\n";
}

PiecewiseLinearVfa PiecewiseLinearVfa::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("vfa: cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace mgrid
