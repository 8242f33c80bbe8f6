#include "staredge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "staredge/error.hpp"
#include "staredge/kdtree.hpp"

namespace staredge {

double ecd(const std::vector<Vec3>& predicted, const GroundTruthEdges& gt) {
    if (predicted.empty()) throw NumericError("ECD undefined for an empty prediction set");
    if (gt.empty()) throw ArgumentError("ECD requires a non-empty ground truth");

    const KdTree tree(gt.all_vertices());
    double sum = 0.0;
    for (const Vec3& p : predicted) {
        const double d = tree.nearest(p).distance;
        sum += d * d;
    }
    return sum / static_cast<double>(predicted.size());
}

double ecd(const PointCloud& predicted, const GroundTruthEdges& gt) {
    return ecd(predicted.points, gt);
}

EvalReport classification_metrics(const std::vector<std::uint8_t>& predicted,
                                  const std::vector<std::uint8_t>& ground_truth) {
    if (predicted.size() != ground_truth.size()) {
        throw ArgumentError("prediction and ground-truth label lengths differ");
    }
    if (predicted.empty()) throw ArgumentError("cannot score an empty label set");

    EvalReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool g = ground_truth[i] != 0;
        if (p && g) ++r.tp;
        else if (p && !g) ++r.fp;
        else if (!p && g) ++r.fn;
        else ++r.tn;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : nan;
    r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : nan;
    if (std::isnan(r.recall) || std::isnan(r.precision) || r.precision + r.recall == 0.0) {
        r.f1 = nan;
    } else {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(predicted.size());
    return r;
}

namespace {

std::string format_metric(double v) {
    if (std::isnan(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string csv_row(const EvalReport& r) {
    std::ostringstream out;
    out << r.shape << ',' << format_metric(r.noise) << ',' << format_metric(r.resolution) << ','
        << r.bandwidth << ',' << format_metric(r.ecd) << ',' << format_metric(r.recall) << ','
        << format_metric(r.precision) << ',' << format_metric(r.f1) << ','
        << format_metric(r.accuracy);
    return out.str();
}

std::string sweep_report(const std::vector<EvalReport>& reports,
                         const std::vector<GroupKey>& group_keys) {
    auto has_key = [&](GroupKey k) {
        return std::find(group_keys.begin(), group_keys.end(), k) != group_keys.end();
    };

    // Group cell key: only the grouped fields participate.
    using CellKey = std::tuple<std::string, double, double, int>;
    auto key_of = [&](const EvalReport& r) {
        return CellKey{has_key(GroupKey::Shape) ? r.shape : std::string(),
                       has_key(GroupKey::Noise) ? r.noise : 0.0,
                       has_key(GroupKey::Resolution) ? r.resolution : 0.0,
                       has_key(GroupKey::Bandwidth) ? r.bandwidth : 0};
    };

    std::map<CellKey, std::vector<const EvalReport*>> cells;
    for (const EvalReport& r : reports) cells[key_of(r)].push_back(&r);

    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& [key, members] : cells) {
        EvalReport mean;
        // Mean of each metric over the defined (finite) entries.
        auto mean_of = [&](auto getter) {
            double sum = 0.0;
            int n = 0;
            for (const EvalReport* r : members) {
                const double v = getter(*r);
                if (!std::isnan(v)) {
                    sum += v;
                    ++n;
                }
            }
            return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
        };
        mean.ecd = mean_of([](const EvalReport& r) { return r.ecd; });
        mean.recall = mean_of([](const EvalReport& r) { return r.recall; });
        mean.precision = mean_of([](const EvalReport& r) { return r.precision; });
        mean.f1 = mean_of([](const EvalReport& r) { return r.f1; });
        mean.accuracy = mean_of([](const EvalReport& r) { return r.accuracy; });

        // Metadata columns: the shared value, or '*' when mixed.
        auto all_same = [&](auto getter) {
            for (const EvalReport* r : members) {
                if (getter(*r) != getter(*members.front())) return false;
            }
            return true;
        };
        mean.shape = all_same([](const EvalReport& r) { return r.shape; })
                         ? members.front()->shape
                         : "*";
        mean.noise = all_same([](const EvalReport& r) { return r.noise; })
                         ? members.front()->noise
                         : std::numeric_limits<double>::quiet_NaN();
        mean.resolution = all_same([](const EvalReport& r) { return r.resolution; })
                              ? members.front()->resolution
                              : std::numeric_limits<double>::quiet_NaN();
        mean.bandwidth =
            all_same([](const EvalReport& r) { return r.bandwidth; }) ? members.front()->bandwidth : 0;

        out << csv_row(mean) << '\n';
    }
    return out.str();
}

}  // namespace staredge
