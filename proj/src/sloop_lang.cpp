#include "mos/sloop/lang.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "mos/core/error.hpp"

namespace mos::sloop {

namespace {

// Direction fixed in the map frame: compass plus the vertical-on-a-2D-map
// prepositions, which read as north/south when pointing at a map.
const std::map<std::string, std::pair<double, double>>& compass_directions() {
    static const double d = std::sqrt(0.5);
    static const std::map<std::string, std::pair<double, double>> dirs = {
        {"east", {1.0, 0.0}},        {"west", {-1.0, 0.0}},
        {"north", {0.0, 1.0}},       {"south", {0.0, -1.0}},
        {"northeast", {d, d}},       {"northwest", {-d, d}},
        {"southeast", {d, -d}},      {"southwest", {-d, -d}},
        {"above", {0.0, 1.0}},       {"top", {0.0, 1.0}},
        {"below", {0.0, -1.0}},      {"down", {0.0, -1.0}},
        {"under", {0.0, -1.0}},
    };
    return dirs;
}

}  // namespace

const std::vector<GridPoint>& LandmarkMap::footprint(
    const std::string& name) const {
    const auto it = landmarks.find(name);
    if (it == landmarks.end())
        throw UnknownLandmark("no landmark named '" + name + "' on the map");
    return it->second;
}

LandmarkMap parse_landmark_map(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    LandmarkMap map;
    map.res = j.at("resolution").get<double>();
    map.width = j.at("width").get<int>();
    map.height = j.at("height").get<int>();
    if (map.res <= 0.0 || map.width <= 0 || map.height <= 0)
        throw InvalidConfig("landmark map needs positive dimensions");
    for (const auto& [name, cells] : j.at("landmarks").items()) {
        std::vector<GridPoint> fp;
        for (const auto& c : cells)
            fp.push_back({c.at(0).get<int>(), c.at(1).get<int>(), 0});
        if (fp.empty())
            throw InvalidConfig("landmark '" + name + "' has an empty footprint");
        for (const auto& c : fp)
            if (c.x < 0 || c.x >= map.width || c.y < 0 || c.y >= map.height)
                throw InvalidConfig("landmark '" + name +
                                    "' footprint leaves the grid");
        map.landmarks.emplace(name, std::move(fp));
    }
    if (j.contains("targets"))
        for (const auto& t : j.at("targets"))
            map.targets.push_back(t.get<std::string>());
    return map;
}

std::vector<SpatialTuple> parse_spatial_tuples(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    std::vector<SpatialTuple> out;
    for (const auto& item : j) {
        SpatialTuple t;
        t.figure = item.at("figure").get<std::string>();
        t.relation = item.at("relation").get<std::string>();
        t.ground = item.at("ground").get<std::string>();
        if (item.contains("for")) {
            const auto& f = item.at("for");
            t.frame = FrameOfReference{f.at("x").get<double>(),
                                       f.at("y").get<double>(),
                                       normalize_angle(f.at("theta").get<double>())};
        }
        out.push_back(std::move(t));
    }
    return out;
}

bool requires_frame(const std::string& relation) {
    static const std::set<std::string> rel = {"front", "behind", "left", "right"};
    return rel.count(relation) > 0;
}

bool uses_direction(const std::string& relation) {
    return requires_frame(relation) ||
           compass_directions().count(relation) > 0;
}

double normalize_angle(double theta) {
    double r = std::fmod(theta, 2.0 * M_PI);
    if (r < 0.0) r += 2.0 * M_PI;
    return r;
}

double SigmaTable::sigma(const std::string& relation) const {
    const auto it = cells.find(relation);
    if (it != cells.end()) return it->second;
    if (relation == "at") return 1.0;
    if (uses_direction(relation)) return 3.0;
    return 2.0;
}

double relation_likelihood(const GridPoint& cell, const SpatialTuple& tuple,
                           const LandmarkMap& map, double sigma_cells) {
    if (sigma_cells <= 0.0) throw InvalidConfig("sigma must be positive");
    const auto& fp = map.footprint(tuple.ground);

    GridPoint nearest = fp.front();
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& f : fp) {
        const double d = std::hypot(static_cast<double>(cell.x - f.x),
                                    static_cast<double>(cell.y - f.y));
        if (d < dist) {
            dist = d;
            nearest = f;
        }
    }
    const double gauss = std::exp(-dist * dist / (2.0 * sigma_cells * sigma_cells));
    if (!uses_direction(tuple.relation)) return gauss;

    double vx, vy;
    if (requires_frame(tuple.relation)) {
        if (!tuple.frame)
            throw MissingFoR("relation '" + tuple.relation +
                             "' needs a frame of reference");
        // Rotate the frame's forward direction by an exact quarter-turn
        // multiple so perpendicular cells come out exactly zero.
        const double cx = std::cos(tuple.frame->theta);
        const double cy = std::sin(tuple.frame->theta);
        if (tuple.relation == "front") {
            vx = cx;
            vy = cy;
        } else if (tuple.relation == "behind") {
            vx = -cx;
            vy = -cy;
        } else if (tuple.relation == "left") {
            vx = -cy;
            vy = cx;
        } else {  // right
            vx = cy;
            vy = -cx;
        }
    } else {
        const auto& dir = compass_directions().at(tuple.relation);
        vx = dir.first;
        vy = dir.second;
    }

    if (dist == 0.0) return gauss;  // direction undefined on the footprint
    const double ux = (nearest.x - cell.x) / dist;
    const double uy = (nearest.y - cell.y) / dist;
    const double dot = std::min(std::abs(ux * vx + uy * vy), 1.0);
    return dot * gauss;
}

Field tuples_field(const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
                   const SigmaTable& sigmas) {
    Field f(map.width, map.height);
    double total = 0.0;
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            double p = 1.0;
            for (const auto& t : tuples)
                p *= relation_likelihood({x, y, 0}, t, map, sigmas.sigma(t.relation));
            f.at(x, y) = p;
            total += p;
        }
    if (total <= 0.0)
        throw ZeroField("language field vanished over the whole grid");
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) f.at(x, y) /= total;
    return f;
}

std::map<std::string, Field> language_observation_field(
    const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
    const SigmaTable& sigmas) {
    std::map<std::string, std::vector<SpatialTuple>> by_figure;
    for (const auto& t : tuples) by_figure[t.figure].push_back(t);
    std::map<std::string, Field> out;
    for (const auto& [figure, group] : by_figure)
        out.emplace(figure, tuples_field(group, map, sigmas));
    return out;
}

std::vector<SpatialTuple> relabel_relations(const std::vector<SpatialTuple>& tuples,
                                            const std::string& relation) {
    std::vector<SpatialTuple> out = tuples;
    for (auto& t : out) t.relation = relation;
    return out;
}

std::vector<SpatialTuple> drop_frame_relations(
    const std::vector<SpatialTuple>& tuples) {
    std::vector<SpatialTuple> out;
    for (const auto& t : tuples)
        if (!requires_frame(t.relation)) out.push_back(t);
    return out;
}

Field mixture_field(const std::vector<Field>& components,
                    const std::vector<double>& weights) {
    if (components.empty() || components.size() != weights.size())
        throw WeightMismatch("one weight per mixture component required");
    double total = 0.0;
    for (const double w : weights) total += w;
    if (std::abs(total - 1.0) > 1e-9)
        throw WeightMismatch("mixture weights must sum to one");

    Field out(components[0].width(), components[0].height());
    for (std::size_t k = 0; k < components.size(); ++k) {
        Field c = components[k];
        if (c.width() != out.width() || c.height() != out.height())
            throw WeightMismatch("mixture components must share one grid");
        c.normalize();
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                out.at(x, y) += weights[k] * c.at(x, y);
    }
    return out;
}

Field sloop_field(const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
                  const SigmaTable& sigmas, int mixture) {
    const Field base = tuples_field(tuples, map, sigmas);
    switch (mixture) {
        case 1:
            return base;
        case 2:
            return mixture_field(
                {base, tuples_field(relabel_relations(tuples, "near"), map, sigmas)},
                {0.8, 0.2});
        case 4:
            return mixture_field(
                {base,
                 tuples_field(drop_frame_relations(tuples), map, sigmas),
                 tuples_field(relabel_relations(tuples, "near"), map, sigmas),
                 tuples_field(relabel_relations(tuples, "at"), map, sigmas)},
                {0.6, 0.25, 0.1, 0.05});
        default:
            throw InvalidConfig("mixture size must be 1, 2 or 4");
    }
}

double angular_deviation(double theta, double theta_star) {
    const double d = std::abs(normalize_angle(theta) - normalize_angle(theta_star));
    return std::min(d, 2.0 * M_PI - d);
}

void apply_language_to_belief(grid2::Belief2& belief, const Field& field) {
    if (belief.width() != field.width() || belief.height() != field.height())
        throw InvalidConfig("belief and language field grids differ");
    for (int y = 0; y < belief.height(); ++y)
        for (int x = 0; x < belief.width(); ++x) belief.at(x, y) *= field.at(x, y);
    belief.normalize();
}

}  // namespace mos::sloop
