#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mos/core/grid.hpp"
#include "mos/grid2/belief2.hpp"

namespace mos::sloop {

// Discrete 2D map of named landmarks; coordinates in cells, +x east, +y north.
struct LandmarkMap {
    int width = 0, height = 0;
    double res = 1.0;  // meters per cell
    std::map<std::string, std::vector<GridPoint>> landmarks;
    std::vector<std::string> targets;

    const std::vector<GridPoint>& footprint(const std::string& name) const;
};

// JSON: { "resolution": m, "width": w, "height": h,
//         "landmarks": {name: [[x,y], ...]}, "targets": [name, ...] }
LandmarkMap parse_landmark_map(const std::string& json_text);

// Observer viewpoint for relative prepositions: origin in cells, angle in
// radians from the map +x axis, kept in [0, 2pi).
struct FrameOfReference {
    double x = 0.0, y = 0.0;
    double theta = 0.0;

    friend bool operator==(const FrameOfReference&, const FrameOfReference&) =
        default;
};

// One parsed (figure, relation, ground) description, optionally with the
// frame of reference the speaker imposed.
struct SpatialTuple {
    std::string figure;
    std::string relation;
    std::string ground;
    std::optional<FrameOfReference> frame;

    friend bool operator==(const SpatialTuple&, const SpatialTuple&) = default;
};

// JSON: [ {"figure": f, "relation": r, "ground": g,
//          "for": {"x":_, "y":_, "theta":_}?}, ... ]
std::vector<SpatialTuple> parse_spatial_tuples(const std::string& json_text);

// Relative prepositions whose direction comes from a supplied frame.
bool requires_frame(const std::string& relation);
// Relations carrying any direction at all: the relative set plus the compass
// and vertical-on-the-map set, whose direction is fixed in the map frame.
bool uses_direction(const std::string& relation);

double normalize_angle(double theta);  // into [0, 2pi)

// Steepness of the distance falloff per preposition, in cells.  Unlisted
// relations fall back by class: contact-like "at" is tight, directional
// relations are loose, proximity defaults in between.
struct SigmaTable {
    std::map<std::string, double> cells;

    double sigma(const std::string& relation) const;
};

// Gaussian spatial-relation likelihood of one tuple at a candidate cell:
// |u . v| * exp(-dist^2 / (2 sigma^2)), where dist is the distance to the
// nearest footprint cell of the ground, u the unit vector from the cell
// toward that footprint cell, and v the relation direction.  The dot factor
// is dropped for relations without direction and at dist zero, where u is
// undefined.  sigma is in cells.
double relation_likelihood(const GridPoint& cell, const SpatialTuple& tuple,
                           const LandmarkMap& map, double sigma_cells);

// Probability fields over the map grid reuse the 2D histogram type.
using Field = grid2::Belief2;

// Field for one described object: pointwise product of the tuple likelihoods,
// normalized over the grid.  No tuples means a uniform field.
Field tuples_field(const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
                   const SigmaTable& sigmas);

// Splits a description by figure and builds one field per mentioned object.
std::map<std::string, Field> language_observation_field(
    const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
    const SigmaTable& sigmas);

// Alternative readings of a description, used as mixture components.
std::vector<SpatialTuple> relabel_relations(const std::vector<SpatialTuple>& tuples,
                                            const std::string& relation);
std::vector<SpatialTuple> drop_frame_relations(
    const std::vector<SpatialTuple>& tuples);

// Weighted pointwise sum of normalized fields.  Throws WeightMismatch when
// the weights do not match the components or do not sum to one.
Field mixture_field(const std::vector<Field>& components,
                    const std::vector<double>& weights);

// Smoothed field for one object: m=1 is the plain product model, m=2 mixes
// in an all-near reading at weight 0.2, m=4 additionally mixes readings that
// ignore frame-dependent tuples and treat everything as near or at, at
// weights 0.25, 0.1 and 0.05.
Field sloop_field(const std::vector<SpatialTuple>& tuples, const LandmarkMap& map,
                  const SigmaTable& sigmas, int mixture);

// Circular distance between two angles, in [0, pi].
double angular_deviation(double theta, double theta_star);

// Belief update treating the language field as a stochastic observation:
// pointwise multiply and renormalize.
void apply_language_to_belief(grid2::Belief2& belief, const Field& field);

}  // namespace mos::sloop
