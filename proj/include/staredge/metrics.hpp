#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "staredge/point_cloud.hpp"

namespace staredge {

// Metrics for one extraction run. Ratios with a zero denominator are NaN and
// render as '-' in reports.
struct EvalReport {
    double ecd = std::numeric_limits<double>::quiet_NaN();
    double recall = std::numeric_limits<double>::quiet_NaN();
    double precision = std::numeric_limits<double>::quiet_NaN();
    double f1 = std::numeric_limits<double>::quiet_NaN();
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    long long tp = 0, fp = 0, tn = 0, fn = 0;

    // Run metadata.
    std::string shape;
    double noise = 0.0;
    double resolution = 0.0;
    int bandwidth = 0;
    int k = 0;
};

// One-sided mean of squared nearest distances from each predicted point to
// the ground-truth vertex set. Empty prediction -> NumericError (a failed
// calculation, reported as '-').
double ecd(const std::vector<Vec3>& predicted, const GroundTruthEdges& gt);
double ecd(const PointCloud& predicted, const GroundTruthEdges& gt);

// Confusion counts and derived ratios; 1 = edge. Length mismatch ->
// ArgumentError.
EvalReport classification_metrics(const std::vector<std::uint8_t>& predicted,
                                  const std::vector<std::uint8_t>& ground_truth);

enum class GroupKey { Shape, Noise, Resolution, Bandwidth };

inline constexpr const char* kCsvHeader =
    "shape,noise,resolution,bandwidth,ecd,recall,precision,f1,accuracy";

// One CSV row, 6 significant digits, NaN as '-'.
std::string csv_row(const EvalReport& report);

// Groups reports by the given keys (default noise/resolution/bandwidth) and
// emits one row of mean metrics per group, ordered by key tuple. Metadata
// columns that vary within a group render as '*'.
std::string sweep_report(const std::vector<EvalReport>& reports,
                         const std::vector<GroupKey>& group_keys = {
                             GroupKey::Noise, GroupKey::Resolution, GroupKey::Bandwidth});

}  // namespace staredge
