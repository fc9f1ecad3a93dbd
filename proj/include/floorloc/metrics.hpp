#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorloc/floorplan.hpp"

namespace floorloc {

struct LocalizationRecord {
    int sequence = 0;
    int step = 0;
    Pose2 estimate;
    Pose2 ground_truth;
};

double position_error(const LocalizationRecord& r);
/// Absolute heading error wrapped to [0, pi].
double angular_error(const LocalizationRecord& r);

/// Fraction of records with position error <= radius (and heading error
/// <= max_angle when given). Callers pass one final-step record per sequence.
double success_rate(std::span<const LocalizationRecord> finals, double radius,
                    std::optional<double> max_angle = std::nullopt);

enum class RmseMode { Succ, All };

/// All: RMSE over every step of every sequence. Succ: restricted to sequences
/// whose final error is within success_radius, from each sequence's first
/// within-radius step onward.
double rmse(std::span<const LocalizationRecord> records, RmseMode mode,
            double success_radius = 1.0);

/// Last record of each sequence (by highest step index).
std::vector<LocalizationRecord> final_records(std::span<const LocalizationRecord> records);

struct SrThreshold {
    double radius = 1.0;
    std::optional<double> max_angle;
};

/// Default column set: SR@0.1m, 0.2m, 0.5m, 1m, and 1m30deg.
std::vector<SrThreshold> default_sr_thresholds();

struct MetricReport {
    std::vector<SrThreshold> thresholds;
    std::vector<double> sr;  // parallel to thresholds
    std::optional<double> rmse_succ;
    double rmse_all = 0.0;
    int sequences = 0;
    int steps = 0;

    /// SR must not decrease with radius, and an angle constraint must not
    /// raise it. Throws on violation.
    void check_monotonic() const;
    std::string to_text() const;
    std::string to_csv() const;
};

MetricReport make_report(std::span<const LocalizationRecord> records,
                         const std::vector<SrThreshold>& thresholds = default_sr_thresholds(),
                         double success_radius = 1.0);

}  // namespace floorloc
