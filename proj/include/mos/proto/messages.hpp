#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mos/core/error.hpp"
#include "mos/core/grid.hpp"
#include "mos/sloop/lang.hpp"

namespace mos::proto {

using nlohmann::json;

inline constexpr int kProtoVersion = 1;

// Every message is a JSON object with "v" (version) and "type".  Requests
// additionally carry "agent".  parse_* functions validate and default the
// payload; to_json emits the full normal form (all fields present, keys
// sorted by the serializer), so identical message values always serialize
// to identical bytes.

// World <-> grid mapping of a search region: an axis-aligned box of `size`
// meters centered at `center`, `res` meters per cell.  The conversion is
// cell = floor((w - center + size/2) / res) per axis.
struct WorldFrame {
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones();
    double res = 0.1;

    Vec3 world_to_grid(const Vec3& w) const {
        return {(w.x() - center.x() + size.x() / 2.0) / res,
                (w.y() - center.y() + size.y() / 2.0) / res,
                (w.z() - center.z() + size.z() / 2.0) / res};
    }
    GridPoint world_to_cell(const Vec3& w) const {
        const Vec3 g = world_to_grid(w);
        return {static_cast<int>(std::floor(g.x())),
                static_cast<int>(std::floor(g.y())),
                static_cast<int>(std::floor(g.z()))};
    }
    Vec3 cell_to_world(const GridPoint& c) const {  // cell center
        return {(c.x + 0.5) * res - size.x() / 2.0 + center.x(),
                (c.y + 0.5) * res - size.y() / 2.0 + center.y(),
                (c.z + 0.5) * res - size.z() / 2.0 + center.z()};
    }

    friend bool operator==(const WorldFrame& a, const WorldFrame& b) {
        return a.center == b.center && a.size == b.size && a.res == b.res;
    }
};

// 3D robot pose in the world frame: position in meters plus the camera
// forward direction (any nonzero vector; the service quantizes it).
struct Pose3Msg {
    Vec3 position = Vec3::Zero();
    Vec3 forward = Vec3::UnitX();

    friend bool operator==(const Pose3Msg& a, const Pose3Msg& b) {
        return a.position == b.position && a.forward == b.forward;
    }
};

// 2D robot pose: position in meters, yaw in radians from +x.
struct Pose2Msg {
    double x = 0.0, y = 0.0;
    double yaw = 0.0;

    friend bool operator==(const Pose2Msg&, const Pose2Msg&) = default;
};

// Fan detector parameters for 2D agents, distances in meters.
struct Detector2Config {
    double tp = 0.9;
    double fp = 0.05;
    double range = 2.0;
    double sigma = 0.5;
    double fov_deg = 90.0;
    double fov_range = 3.0;

    friend bool operator==(const Detector2Config&, const Detector2Config&) = default;
};

// Per-agent configuration sent with create_agent.  Metric fields are in
// meters and converted to cells with `res`.  kind selects the stack: "3d"
// is the volumetric agent, "2d" the flat grid agent that also accepts
// spatial-language observations.
struct AgentConfig {
    std::string kind = "3d";
    int octree_size = 16;   // cube dimension, power of two
    double res = 0.1;       // meters per cell
    Vec3 region_size = Vec3::Zero();  // zero means octree_size * res per axis
    Vec3 center = Vec3::Zero();
    bool prior_from_occupancy = false;
    bool occupancy_fill_height = false;
    int prior_level = 1;
    double prior_weight = 100.0;
    int num_nodes = 10;       // view graph size
    double sep = 0.0;         // min node separation, meters; zero means 2 cells
    double inflation = 0.0;   // occupancy dilation radius, meters
    int num_sims = 200;
    double alpha = 0.9;
    std::vector<std::string> targets = {"object0"};
    std::uint64_t seed = 0;
    double fov_deg = 60.0;
    double near_range = 0.0;  // meters
    double far_range = 0.0;   // meters; zero means 10 cells
    // 2D-only knobs.
    json landmarks;           // landmark map payload; required when kind == "2d"
    Detector2Config detector;
    int mixture = 1;          // language mixture model order (1, 2 or 4)
    double step_cost = -10.0;
    double find_reward = 1000.0;
    double find_penalty = -1000.0;
    double found_dist = 1.0;  // meters
    double discount = 0.95;
    int topo_nodes = 10;
    double topo_sep = 1.0;    // meters
    double resample_threshold = 0.5;

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct PlannerConfig {
    int num_sims = 0;  // zero means keep the agent's configured budget
    int max_depth = 20;
    std::optional<double> exploration;  // UCB constant; default (rmax-rmin)/2
    std::optional<double> rmax;
    std::optional<double> rmin;

    friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

// Axis-aligned detection box in world meters.
struct BoxMsg {
    int id = 0;
    Vec3 center = Vec3::Zero();
    Vec3 extents = Vec3::Ones();

    friend bool operator==(const BoxMsg& a, const BoxMsg& b) {
        return a.id == b.id && a.center == b.center && a.extents == b.extents;
    }
};

// Parsed natural-language description attached to an observation.
struct LanguageMsg {
    std::vector<sloop::SpatialTuple> tuples;
    int mixture = 0;  // zero means use the agent's configured mixture

    friend bool operator==(const LanguageMsg&, const LanguageMsg&) = default;
};

// ---- requests ----

struct CreateAgentReq {
    std::string agent;
    AgentConfig config;

    friend bool operator==(const CreateAgentReq&, const CreateAgentReq&) = default;
};

struct UpdateRegionReq {
    std::string agent;
    std::vector<Vec3> cloud;  // world meters; z ignored for 2D agents
    std::optional<Pose3Msg> pose3;
    std::optional<Pose2Msg> pose2;
    std::optional<WorldFrame> region;  // override of the configured region

    friend bool operator==(const UpdateRegionReq& a, const UpdateRegionReq& b) {
        return a.agent == b.agent && a.cloud == b.cloud && a.pose3 == b.pose3 &&
               a.pose2 == b.pose2 && a.region == b.region;
    }
};

struct ProcessObsReq {
    std::string agent;
    std::optional<Pose3Msg> pose3;
    std::optional<Pose2Msg> pose2;
    // 3D payloads: either localized boxes or a label-only detection.
    std::optional<std::vector<BoxMsg>> detections;
    std::optional<int> label_only;
    // 2D payloads: per-slot detector readings (world meters or null), and a
    // language description.
    std::optional<std::vector<std::optional<std::array<double, 2>>>> readings;
    std::optional<LanguageMsg> language;

    friend bool operator==(const ProcessObsReq&, const ProcessObsReq&) = default;
};

struct CreatePlannerReq {
    std::string agent;
    PlannerConfig planner;

    friend bool operator==(const CreatePlannerReq&, const CreatePlannerReq&) =
        default;
};

struct PlanActionReq {
    std::string agent;

    friend bool operator==(const PlanActionReq&, const PlanActionReq&) = default;
};

struct ListenReq {
    std::string agent;

    friend bool operator==(const ListenReq&, const ListenReq&) = default;
};

// ---- responses and pushes ----

struct ErrorMsg {
    std::string code;
    std::string message;

    friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

// Most-probable cell of one object's belief, reported in world coordinates.
struct BeliefSummary {
    int id = 0;
    Vec3 argmax = Vec3::Zero();
    double prob = 0.0;

    friend bool operator==(const BeliefSummary& a, const BeliefSummary& b) {
        return a.id == b.id && a.argmax == b.argmax && a.prob == b.prob;
    }
};

// Planned action: "move"/"find" for 3D agents; "move_ahead"/"rotate_left"/
// "rotate_right"/"find" for 2D agents.  The destination is the pose the
// robot should reach; for find it is the pose the declaration assumes.
struct ActionMsg {
    std::string name = "find";
    std::optional<Pose3Msg> dest3;
    std::optional<Pose2Msg> dest2;

    friend bool operator==(const ActionMsg&, const ActionMsg&) = default;
};

struct StatusMsg {
    std::string agent;
    std::uint64_t seq = 0;
    bool ready = false;
    std::vector<int> found;
    std::optional<std::string> pending;  // unexecuted action id

    friend bool operator==(const StatusMsg&, const StatusMsg&) = default;
};

// ---- JSON codecs ----
// to_json produce the complete normal form; the parse helpers accept
// missing optional fields and throw BadFrame (envelope) or InvalidConfig
// (semantic validation) on bad input.

json to_json(const WorldFrame& v);
json to_json(const Pose3Msg& v);
json to_json(const Pose2Msg& v);
json to_json(const Detector2Config& v);
json to_json(const AgentConfig& v);
json to_json(const PlannerConfig& v);
json to_json(const BoxMsg& v);
json to_json(const LanguageMsg& v);
json to_json(const CreateAgentReq& v);
json to_json(const UpdateRegionReq& v);
json to_json(const ProcessObsReq& v);
json to_json(const CreatePlannerReq& v);
json to_json(const PlanActionReq& v);
json to_json(const ListenReq& v);
json to_json(const ErrorMsg& v);
json to_json(const BeliefSummary& v);
json to_json(const ActionMsg& v);
json to_json(const StatusMsg& v);

WorldFrame parse_world_frame(const json& j);
Pose3Msg parse_pose3(const json& j);
Pose2Msg parse_pose2(const json& j);
Detector2Config parse_detector2(const json& j);
AgentConfig parse_agent_config(const json& j);
PlannerConfig parse_planner_config(const json& j);
BoxMsg parse_box(const json& j);
LanguageMsg parse_language(const json& j);
CreateAgentReq parse_create_agent(const json& j);
UpdateRegionReq parse_update_region(const json& j);
ProcessObsReq parse_process_obs(const json& j);
CreatePlannerReq parse_create_planner(const json& j);
PlanActionReq parse_plan_action(const json& j);
ListenReq parse_listen(const json& j);
ErrorMsg parse_error(const json& j);
BeliefSummary parse_belief_summary(const json& j);
ActionMsg parse_action(const json& j);
StatusMsg parse_status(const json& j);

// Envelope helpers.  check_envelope validates "v" and returns "type";
// request() wraps a payload with the version tag and type.
std::string check_envelope(const json& j);
json envelope(const std::string& type);

// Structural validation of an AgentConfig; throws InvalidConfig.
void validate(const AgentConfig& cfg);

}  // namespace mos::proto
