#include "mos/cos/models.hpp"

#include <cmath>

#include <json.hpp>

#include "mos/core/error.hpp"

namespace mos::cos {

namespace {

// Planar distance between cell centers, in meters.
double dist_m(const GridPoint& a, const GridPoint& b, double res) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return res * std::hypot(dx, dy);
}

double dist_m(const Pose2& s, const GridPoint& b, double res) {
    return dist_m(s.pos, b, res);
}

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

bool in_fan(const Pose2& s, const GridPoint& cell, const FanSensor& fov, double res) {
    if (dist_m(s, cell, res) > fov.max_range) return false;
    if (cell.x == s.pos.x && cell.y == s.pos.y) return true;  // at the apex
    const double bearing =
        std::atan2(cell.y - s.pos.y, static_cast<double>(cell.x - s.pos.x));
    return std::abs(wrap_angle(bearing - s.heading)) <= fov.fov_deg * M_PI / 360.0;
}

int fan_range_count(const Pose2& s, const FanSensor& fov, double range, double res,
                    const grid2::GridMap2& map) {
    int count = 0;
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const GridPoint c{x, y, 0};
            if (in_fan(s, c, fov, res) && dist_m(s, c, res) <= range) ++count;
        }
    return count;
}

double detection_weight(const Pose2& s, const GridPoint& z,
                        const DetectionParams& dm, double res) {
    const double d = dist_m(s, z, res);
    if (d <= dm.range && in_fan(s, z, dm.fov, res)) return 1.0;
    const double over = d - dm.range;
    return std::exp(-over * over);
}

double detection_prob(const std::optional<GridPoint>& z, const GridPoint& x,
                      const Pose2& s, const DetectionParams& dm, double res,
                      const grid2::GridMap2& map) {
    return detection_prob(z, x, s, dm, res,
                          fan_range_count(s, dm.fov, dm.range, res, map));
}

double detection_prob(const std::optional<GridPoint>& z, const GridPoint& x,
                      const Pose2& s, const DetectionParams& dm, double res,
                      int fan_cells) {
    const bool visible = in_fan(s, x, dm.fov, res);
    if (!z) return visible ? 1.0 - dm.tp : 1.0 - dm.fp;

    const double weight = detection_weight(s, *z, dm, res);
    const double offset = dist_m(*z, x, res);
    if (visible && offset <= 3.0 * dm.sigma) {
        const double var = dm.sigma * dm.sigma;
        const double density = std::exp(-offset * offset / (2.0 * var)) /
                               (2.0 * M_PI * var);
        return weight * density * res * res;
    }
    return weight * dm.fp / std::max(1, fan_cells);
}

double correlation_prob(const GridPoint& x_i, const GridPoint& x_target,
                        const CorrelationParams& cm, double res) {
    const double d = dist_m(x_i, x_target, res);
    if (cm.close) return d < cm.dist ? 1.0 : 0.0;
    return d > cm.dist ? 1.0 : 0.0;
}

double correlational_observation_prob(
    const std::optional<GridPoint>& z, const Pose2& s, const DetectionParams& dm,
    const std::vector<std::pair<GridPoint, double>>& weights, double res,
    const grid2::GridMap2& map) {
    double total = 0.0;
    for (const auto& [cell, w] : weights) total += w;
    if (total <= 0.0)
        throw DegenerateCorrelation("correlation weights sum to zero");
    double p = 0.0;
    for (const auto& [cell, w] : weights) {
        if (w == 0.0) continue;
        p += (w / total) * detection_prob(z, cell, s, dm, res, map);
    }
    return p;
}

double correlational_observation_prob(const std::optional<GridPoint>& z,
                                      const GridPoint& x_target, const Pose2& s,
                                      const DetectionParams& dm,
                                      const CorrelationParams& cm,
                                      const std::vector<GridPoint>& cells, double res,
                                      const grid2::GridMap2& map) {
    std::vector<std::pair<GridPoint, double>> weights;
    weights.reserve(cells.size());
    for (const auto& c : cells)
        weights.emplace_back(c, correlation_prob(c, x_target, cm, res));
    return correlational_observation_prob(z, s, dm, weights, res, map);
}

double spl(bool success, double shortest, double actual) {
    if (shortest <= 0.0) throw InvalidConfig("spl needs a positive shortest path");
    if (!success) return 0.0;
    return shortest / std::max(actual, shortest);
}

CosParams parse_cos_params(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    CosParams out;
    if (j.contains("detectors")) {
        for (const auto& [cls, d] : j.at("detectors").items()) {
            DetectionParams p;
            p.tp = d.value("tp", p.tp);
            p.fp = d.value("fp", p.fp);
            p.range = d.value("range", p.range);
            p.sigma = d.value("sigma", p.sigma);
            p.fov.fov_deg = d.value("fov_deg", p.fov.fov_deg);
            p.fov.max_range = d.value("max_range", p.fov.max_range);
            if (p.tp < 0 || p.tp > 1 || p.fp < 0 || p.fp > 1 || p.sigma <= 0)
                throw InvalidConfig("detector parameters out of range for " + cls);
            out.detectors[cls] = p;
        }
    }
    if (j.contains("correlations")) {
        for (const auto& c : j.at("correlations")) {
            CorrelationParams p;
            p.close = c.at("close").get<bool>();
            p.dist = c.at("dist").get<double>();
            out.correlations[{c.at("object").get<std::string>(),
                              c.at("target").get<std::string>()}] = p;
        }
    }
    return out;
}

}  // namespace mos::cos
