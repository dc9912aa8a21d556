#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/grid2/gridmap.hpp"

namespace mos::cos {

// 2D robot viewpoint; heading in radians, zero along +x.
struct Pose2 {
    GridPoint pos;
    double heading = 0.0;

    friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct FanSensor {
    double fov_deg = 90.0;
    double max_range = 3.0;  // meters
};

// Parameters of one object detector.  tp is the chance of reporting the
// object when it is inside the fan; fp the chance of a spurious report;
// range the typical distance of true detections; sigma the radius within
// which an offset detection still counts as locating the object.
struct DetectionParams {
    double tp = 0.9;
    double fp = 0.05;
    double range = 2.0;   // meters
    double sigma = 0.5;   // meters
    FanSensor fov;
};

// Close/Far relation between one object class and the target class, with
// the expected metric distance between them.
struct CorrelationParams {
    bool close = true;
    double dist = 1.0;  // meters
};

bool in_fan(const Pose2& s, const GridPoint& cell, const FanSensor& fov, double res);

// Cells of the map inside the fan and within metric `range` of the robot.
int fan_range_count(const Pose2& s, const FanSensor& fov, double range, double res,
                    const grid2::GridMap2& map);

// Distance-damped acceptance weight for a detection: full weight inside the
// fan within detector range, Gaussian falloff in the distance overshoot
// otherwise.
double detection_weight(const Pose2& s, const GridPoint& z,
                        const DetectionParams& dm, double res);

// Pr(z | x, s): probability that the detector returns z (a cell, or null)
// when the object sits at x and the robot is at s.  Cases:
//   object in fan,  z null               -> 1 - tp
//   object in fan,  z within 3 sigma     -> weight * gaussian(z; x, sigma)
//   object in fan,  z farther            -> weight * fp / in-range cell count
//   object outside, z null               -> 1 - fp
//   object outside, z anything           -> weight * fp / in-range cell count
// The gaussian term is a 2D density integrated over one cell (density times
// cell area), so all cases are probabilities of discrete outcomes.
double detection_prob(const std::optional<GridPoint>& z, const GridPoint& x,
                      const Pose2& s, const DetectionParams& dm, double res,
                      const grid2::GridMap2& map);

// Same model with |V_E(r)| precomputed by the caller; avoids rescanning the
// map when evaluating many object locations against one robot pose.
double detection_prob(const std::optional<GridPoint>& z, const GridPoint& x,
                      const Pose2& s, const DetectionParams& dm, double res,
                      int fan_cells);

// Binary correlation: 1 when the pair is consistent with the Close/Far
// predicate at expected distance cm.dist, else 0.  Close holds strictly
// below dist; Far strictly above.
double correlation_prob(const GridPoint& x_i, const GridPoint& x_target,
                        const CorrelationParams& cm, double res);

// Marginal Pr(z_i | x_target, s) = sum_x Pr(z_i | x, s) Pr(x | x_target)
// with the given unnormalized weights over candidate cells; weights are
// normalized by their sum.  Throws DegenerateCorrelation when the total
// weight is zero.
double correlational_observation_prob(
    const std::optional<GridPoint>& z, const Pose2& s, const DetectionParams& dm,
    const std::vector<std::pair<GridPoint, double>>& weights, double res,
    const grid2::GridMap2& map);

// Binary-correlation convenience wrapper: weights are correlation_prob over
// all cells of X.
double correlational_observation_prob(const std::optional<GridPoint>& z,
                                      const GridPoint& x_target, const Pose2& s,
                                      const DetectionParams& dm,
                                      const CorrelationParams& cm,
                                      const std::vector<GridPoint>& cells, double res,
                                      const grid2::GridMap2& map);

// success * shortest / max(actual, shortest); shortest must be positive.
double spl(bool success, double shortest, double actual);

// Per-class detector and correlation tables, loadable from JSON of the form
// { "detectors": {class: {tp, fp, range, sigma, fov_deg, max_range}},
//   "correlations": [{object, target, close, dist}] }.
struct CosParams {
    std::map<std::string, DetectionParams> detectors;
    std::map<std::pair<std::string, std::string>, CorrelationParams> correlations;
};

CosParams parse_cos_params(const std::string& json_text);

}  // namespace mos::cos
