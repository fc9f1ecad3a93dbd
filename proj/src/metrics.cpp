#include "floorloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace floorloc {

double position_error(const LocalizationRecord& r) {
    return std::hypot(r.estimate.x - r.ground_truth.x, r.estimate.y - r.ground_truth.y);
}

double angular_error(const LocalizationRecord& r) {
    return std::abs(wrap_angle(r.estimate.phi - r.ground_truth.phi));
}

double success_rate(std::span<const LocalizationRecord> finals, double radius,
                    std::optional<double> max_angle) {
    if (finals.empty()) throw EmptyRecords("success rate over no records");
    int ok = 0;
    for (const auto& r : finals) {
        if (position_error(r) > radius) continue;
        if (max_angle && angular_error(r) > *max_angle) continue;
        ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(finals.size());
}

std::vector<LocalizationRecord> final_records(std::span<const LocalizationRecord> records) {
    std::map<int, LocalizationRecord> last;
    for (const auto& r : records) {
        auto it = last.find(r.sequence);
        if (it == last.end() || r.step > it->second.step) last[r.sequence] = r;
    }
    std::vector<LocalizationRecord> out;
    out.reserve(last.size());
    for (const auto& [seq, r] : last) out.push_back(r);
    return out;
}

double rmse(std::span<const LocalizationRecord> records, RmseMode mode,
            double success_radius) {
    if (records.empty()) throw EmptyRecords("rmse over no records");
    if (mode == RmseMode::All) {
        double sum = 0.0;
        for (const auto& r : records) {
            const double e = position_error(r);
            sum += e * e;
        }
        return std::sqrt(sum / static_cast<double>(records.size()));
    }

    // group by sequence, ordered by step
    std::map<int, std::vector<LocalizationRecord>> by_seq;
    for (const auto& r : records) by_seq[r.sequence].push_back(r);
    double sum = 0.0;
    std::size_t count = 0;
    for (auto& [seq, rs] : by_seq) {
        std::sort(rs.begin(), rs.end(),
                  [](const auto& a, const auto& b) { return a.step < b.step; });
        if (position_error(rs.back()) > success_radius) continue;
        std::size_t first = 0;
        while (first < rs.size() && position_error(rs[first]) > success_radius) ++first;
        for (std::size_t i = first; i < rs.size(); ++i) {
            const double e = position_error(rs[i]);
            sum += e * e;
            ++count;
        }
    }
    if (count == 0) throw NoSuccesses("no sequence ended within the success radius");
    return std::sqrt(sum / static_cast<double>(count));
}

std::vector<SrThreshold> default_sr_thresholds() {
    return {{0.1, std::nullopt},
            {0.2, std::nullopt},
            {0.5, std::nullopt},
            {1.0, std::nullopt},
            {1.0, 30.0 * M_PI / 180.0}};
}

void MetricReport::check_monotonic() const {
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            if (i == j) continue;
            const auto &a = thresholds[i], &b = thresholds[j];
            // same angle constraint, larger radius: SR must not drop
            if (a.max_angle == b.max_angle && a.radius <= b.radius && sr[i] > sr[j])
                throw InvalidRange("success rate not monotone in radius");
            // same radius, added angle constraint: SR must not rise
            if (a.radius == b.radius && !a.max_angle && b.max_angle && sr[j] > sr[i])
                throw InvalidRange("angle constraint raised success rate");
        }
}

namespace {

std::string threshold_name(const SrThreshold& t) {
    std::ostringstream ss;
    ss << "SR@" << t.radius << "m";
    if (t.max_angle) ss << static_cast<int>(std::lround(*t.max_angle * 180.0 / M_PI)) << "deg";
    return ss.str();
}

}  // namespace

std::string MetricReport::to_text() const {
    std::ostringstream ss;
    ss.precision(6);
    ss << "sequences: " << sequences << "  steps: " << steps << "\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        ss << threshold_name(thresholds[i]) << ": " << sr[i] << "\n";
    if (rmse_succ)
        ss << "RMSE(Succ): " << *rmse_succ << "\n";
    else
        ss << "RMSE(Succ): n/a\n";
    ss << "RMSE(All): " << rmse_all << "\n";
    return ss.str();
}

std::string MetricReport::to_csv() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "metric,value\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        ss << threshold_name(thresholds[i]) << "," << sr[i] << "\n";
    ss << "rmse_succ," << (rmse_succ ? std::to_string(*rmse_succ) : "nan") << "\n";
    ss << "rmse_all," << rmse_all << "\n";
    ss << "sequences," << sequences << "\n";
    ss << "steps," << steps << "\n";
    return ss.str();
}

MetricReport make_report(std::span<const LocalizationRecord> records,
                         const std::vector<SrThreshold>& thresholds,
                         double success_radius) {
    MetricReport report;
    report.thresholds = thresholds;
    const auto finals = final_records(records);
    for (const auto& t : thresholds)
        report.sr.push_back(success_rate(finals, t.radius, t.max_angle));
    try {
        report.rmse_succ = rmse(records, RmseMode::Succ, success_radius);
    } catch (const NoSuccesses&) {
        report.rmse_succ = std::nullopt;
    }
    report.rmse_all = rmse(records, RmseMode::All, success_radius);
    report.sequences = static_cast<int>(finals.size());
    report.steps = static_cast<int>(records.size());
    report.check_monotonic();
    return report;
}

}  // namespace floorloc
