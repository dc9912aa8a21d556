#include "mos/proto/messages.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mos::proto {

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_to_vec3(const json& j) {
    if (!j.is_array() || (j.size() != 3 && j.size() != 2))
        throw BadFrame("expected a coordinate array of 2 or 3 numbers");
    Vec3 v = Vec3::Zero();
    v.x() = j.at(0).get<double>();
    v.y() = j.at(1).get<double>();
    if (j.size() == 3) v.z() = j.at(2).get<double>();
    return v;
}

json tuple_to_json(const sloop::SpatialTuple& t) {
    json j{{"figure", t.figure}, {"relation", t.relation}, {"ground", t.ground}};
    if (t.frame)
        j["for"] = json{{"x", t.frame->x}, {"y", t.frame->y},
                        {"theta", t.frame->theta}};
    return j;
}

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

// ---- fragments ----

json to_json(const WorldFrame& v) {
    return json{{"center", vec3_to_json(v.center)},
                {"size", vec3_to_json(v.size)},
                {"res", v.res}};
}

WorldFrame parse_world_frame(const json& j) {
    WorldFrame f;
    if (j.contains("center")) f.center = json_to_vec3(j.at("center"));
    if (j.contains("size")) f.size = json_to_vec3(j.at("size"));
    f.res = j.value("res", f.res);
    return f;
}

json to_json(const Pose3Msg& v) {
    return json{{"position", vec3_to_json(v.position)},
                {"forward", vec3_to_json(v.forward)}};
}

Pose3Msg parse_pose3(const json& j) {
    Pose3Msg p;
    p.position = json_to_vec3(j.at("position"));
    if (j.contains("forward")) p.forward = json_to_vec3(j.at("forward"));
    return p;
}

json to_json(const Pose2Msg& v) {
    return json{{"position", json::array({v.x, v.y})}, {"yaw", v.yaw}};
}

Pose2Msg parse_pose2(const json& j) {
    const json& pos = j.at("position");
    if (!pos.is_array() || pos.size() < 2)
        throw BadFrame("2d position must be [x, y]");
    Pose2Msg p;
    p.x = pos.at(0).get<double>();
    p.y = pos.at(1).get<double>();
    p.yaw = j.value("yaw", 0.0);
    return p;
}

json to_json(const Detector2Config& v) {
    return json{{"tp", v.tp},   {"fp", v.fp},           {"range", v.range},
                {"sigma", v.sigma}, {"fov_deg", v.fov_deg}, {"fov_range", v.fov_range}};
}

Detector2Config parse_detector2(const json& j) {
    Detector2Config d;
    d.tp = j.value("tp", d.tp);
    d.fp = j.value("fp", d.fp);
    d.range = j.value("range", d.range);
    d.sigma = j.value("sigma", d.sigma);
    d.fov_deg = j.value("fov_deg", d.fov_deg);
    d.fov_range = j.value("fov_range", d.fov_range);
    return d;
}

json to_json(const AgentConfig& v) {
    json j{{"kind", v.kind},
           {"octree_size", v.octree_size},
           {"res", v.res},
           {"region_size", vec3_to_json(v.region_size)},
           {"center", vec3_to_json(v.center)},
           {"prior_from_occupancy", v.prior_from_occupancy},
           {"occupancy_fill_height", v.occupancy_fill_height},
           {"prior_level", v.prior_level},
           {"prior_weight", v.prior_weight},
           {"num_nodes", v.num_nodes},
           {"sep", v.sep},
           {"inflation", v.inflation},
           {"num_sims", v.num_sims},
           {"alpha", v.alpha},
           {"targets", v.targets},
           {"seed", v.seed},
           {"fov_deg", v.fov_deg},
           {"near_range", v.near_range},
           {"far_range", v.far_range},
           {"detector", to_json(v.detector)},
           {"mixture", v.mixture},
           {"step_cost", v.step_cost},
           {"find_reward", v.find_reward},
           {"find_penalty", v.find_penalty},
           {"found_dist", v.found_dist},
           {"discount", v.discount},
           {"topo_nodes", v.topo_nodes},
           {"topo_sep", v.topo_sep},
           {"resample_threshold", v.resample_threshold}};
    if (!v.landmarks.is_null()) j["landmarks"] = v.landmarks;
    return j;
}

AgentConfig parse_agent_config(const json& j) {
    AgentConfig c;
    c.kind = j.value("kind", c.kind);
    c.octree_size = j.value("octree_size", c.octree_size);
    c.res = j.value("res", c.res);
    if (j.contains("region_size")) c.region_size = json_to_vec3(j.at("region_size"));
    if (j.contains("center")) c.center = json_to_vec3(j.at("center"));
    c.prior_from_occupancy = j.value("prior_from_occupancy", c.prior_from_occupancy);
    c.occupancy_fill_height =
        j.value("occupancy_fill_height", c.occupancy_fill_height);
    c.prior_level = j.value("prior_level", c.prior_level);
    c.prior_weight = j.value("prior_weight", c.prior_weight);
    c.num_nodes = j.value("num_nodes", c.num_nodes);
    c.sep = j.value("sep", c.sep);
    c.inflation = j.value("inflation", c.inflation);
    c.num_sims = j.value("num_sims", c.num_sims);
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("targets"))
        c.targets = j.at("targets").get<std::vector<std::string>>();
    c.seed = j.value("seed", c.seed);
    c.fov_deg = j.value("fov_deg", c.fov_deg);
    c.near_range = j.value("near_range", c.near_range);
    c.far_range = j.value("far_range", c.far_range);
    if (j.contains("landmarks")) c.landmarks = j.at("landmarks");
    if (j.contains("detector")) c.detector = parse_detector2(j.at("detector"));
    c.mixture = j.value("mixture", c.mixture);
    c.step_cost = j.value("step_cost", c.step_cost);
    c.find_reward = j.value("find_reward", c.find_reward);
    c.find_penalty = j.value("find_penalty", c.find_penalty);
    c.found_dist = j.value("found_dist", c.found_dist);
    c.discount = j.value("discount", c.discount);
    c.topo_nodes = j.value("topo_nodes", c.topo_nodes);
    c.topo_sep = j.value("topo_sep", c.topo_sep);
    c.resample_threshold = j.value("resample_threshold", c.resample_threshold);
    return c;
}

void validate(const AgentConfig& cfg) {
    if (cfg.kind != "3d" && cfg.kind != "2d")
        throw InvalidConfig("kind must be \"3d\" or \"2d\"");
    if (!(cfg.res > 0.0)) throw InvalidConfig("res must be positive");
    if (cfg.targets.empty() || cfg.targets.size() > 32)
        throw InvalidConfig("targets must list between 1 and 32 names");
    if (std::set<std::string>(cfg.targets.begin(), cfg.targets.end()).size() !=
        cfg.targets.size())
        throw InvalidConfig("target names must be distinct");
    if (cfg.num_sims < 1) throw InvalidConfig("num_sims must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
        throw InvalidConfig("alpha must be in (0, 1]");
    if (cfg.sep < 0.0 || cfg.inflation < 0.0)
        throw InvalidConfig("sep and inflation must be nonnegative");
    if (cfg.kind == "3d") {
        if (!power_of_two(cfg.octree_size) || cfg.octree_size < 2 ||
            cfg.octree_size > 256)
            throw InvalidConfig("octree_size must be a power of two in [2, 256]");
        const int levels = static_cast<int>(std::llround(std::log2(cfg.octree_size)));
        if (cfg.prior_level < 0 || cfg.prior_level > levels)
            throw InvalidConfig("prior_level outside the octree");
        if (!(cfg.fov_deg > 0.0 && cfg.fov_deg < 180.0))
            throw InvalidConfig("fov_deg must be in (0, 180)");
        if (cfg.near_range < 0.0 || cfg.far_range < 0.0)
            throw InvalidConfig("ranges must be nonnegative");
        if (cfg.num_nodes < 1) throw InvalidConfig("num_nodes must be at least 1");
        for (int axis = 0; axis < 3; ++axis) {
            const double s = cfg.region_size[axis];
            if (s < 0.0) throw InvalidConfig("region_size must be nonnegative");
            if (s > 0.0) {
                const auto cells = std::llround(s / cfg.res);
                if (cells < 1 || cells > cfg.octree_size)
                    throw InvalidConfig("region_size does not fit the octree");
            }
        }
    } else {
        if (cfg.landmarks.is_null() || !cfg.landmarks.is_object())
            throw InvalidConfig("2d agents need a landmarks map payload");
        if (cfg.targets.size() != 1)
            throw InvalidConfig("2d agents track a single target");
        if (cfg.mixture != 1 && cfg.mixture != 2 && cfg.mixture != 4)
            throw InvalidConfig("mixture must be 1, 2 or 4");
        if (!(cfg.discount > 0.0 && cfg.discount < 1.0))
            throw InvalidConfig("discount must be in (0, 1)");
        if (!(cfg.detector.tp > 0.0 && cfg.detector.tp <= 1.0) ||
            !(cfg.detector.fp >= 0.0 && cfg.detector.fp < 1.0))
            throw InvalidConfig("detector rates out of range");
        if (!(cfg.detector.fov_deg > 0.0 && cfg.detector.fov_deg <= 360.0))
            throw InvalidConfig("detector fov_deg must be in (0, 360]");
        if (cfg.topo_nodes < 1)
            throw InvalidConfig("topo_nodes must be at least 1");
        if (!(cfg.resample_threshold >= 0.0 && cfg.resample_threshold <= 1.0))
            throw InvalidConfig("resample_threshold must be in [0, 1]");
    }
}

json to_json(const PlannerConfig& v) {
    json j{{"num_sims", v.num_sims}, {"max_depth", v.max_depth}};
    if (v.exploration) j["exploration"] = *v.exploration;
    if (v.rmax) j["rmax"] = *v.rmax;
    if (v.rmin) j["rmin"] = *v.rmin;
    return j;
}

PlannerConfig parse_planner_config(const json& j) {
    PlannerConfig p;
    p.num_sims = j.value("num_sims", p.num_sims);
    p.max_depth = j.value("max_depth", p.max_depth);
    if (j.contains("exploration")) p.exploration = j.at("exploration").get<double>();
    if (j.contains("rmax")) p.rmax = j.at("rmax").get<double>();
    if (j.contains("rmin")) p.rmin = j.at("rmin").get<double>();
    if (p.num_sims < 0) throw InvalidConfig("num_sims must be nonnegative");
    if (p.max_depth < 1) throw InvalidConfig("max_depth must be at least 1");
    return p;
}

json to_json(const BoxMsg& v) {
    return json{{"id", v.id},
                {"center", vec3_to_json(v.center)},
                {"extents", vec3_to_json(v.extents)}};
}

BoxMsg parse_box(const json& j) {
    BoxMsg b;
    b.id = j.at("id").get<int>();
    b.center = json_to_vec3(j.at("center"));
    if (j.contains("extents")) b.extents = json_to_vec3(j.at("extents"));
    return b;
}

json to_json(const LanguageMsg& v) {
    json tuples = json::array();
    for (const auto& t : v.tuples) tuples.push_back(tuple_to_json(t));
    return json{{"tuples", std::move(tuples)}, {"mixture", v.mixture}};
}

LanguageMsg parse_language(const json& j) {
    LanguageMsg m;
    if (j.contains("tuples"))
        m.tuples = sloop::parse_spatial_tuples(j.at("tuples").dump());
    m.mixture = j.value("mixture", m.mixture);
    if (m.mixture != 0 && m.mixture != 1 && m.mixture != 2 && m.mixture != 4)
        throw InvalidConfig("mixture must be 0 (configured), 1, 2 or 4");
    return m;
}

// ---- requests ----

json envelope(const std::string& type) {
    return json{{"v", kProtoVersion}, {"type", type}};
}

std::string check_envelope(const json& j) {
    if (!j.is_object()) throw BadFrame("message must be a JSON object");
    if (!j.contains("v") || !j.at("v").is_number_integer() ||
        j.at("v").get<int>() != kProtoVersion)
        throw BadFrame("unsupported protocol version");
    if (!j.contains("type") || !j.at("type").is_string())
        throw BadFrame("message lacks a type");
    return j.at("type").get<std::string>();
}

namespace {

std::string agent_of(const json& j) {
    if (!j.contains("agent") || !j.at("agent").is_string() ||
        j.at("agent").get<std::string>().empty())
        throw BadFrame("request lacks an agent id");
    return j.at("agent").get<std::string>();
}

}  // namespace

json to_json(const CreateAgentReq& v) {
    json j = envelope("create_agent");
    j["agent"] = v.agent;
    j["config"] = to_json(v.config);
    return j;
}

CreateAgentReq parse_create_agent(const json& j) {
    CreateAgentReq r;
    r.agent = agent_of(j);
    if (j.contains("config")) r.config = parse_agent_config(j.at("config"));
    return r;
}

json to_json(const UpdateRegionReq& v) {
    json j = envelope("update_search_region");
    j["agent"] = v.agent;
    json cloud = json::array();
    for (const auto& p : v.cloud) cloud.push_back(vec3_to_json(p));
    j["cloud"] = std::move(cloud);
    if (v.pose3) j["robot_pose"] = to_json(*v.pose3);
    if (v.pose2) j["robot_pose"] = to_json(*v.pose2);
    if (v.region) j["region"] = to_json(*v.region);
    return j;
}

namespace {

// A pose payload with a yaw is 2D; anything else is 3D.
void parse_pose_field(const json& j, std::optional<Pose3Msg>* p3,
                      std::optional<Pose2Msg>* p2) {
    if (!j.contains("robot_pose")) return;
    const json& p = j.at("robot_pose");
    if (!p.is_object()) throw BadFrame("robot_pose must be an object");
    if (p.contains("yaw"))
        *p2 = parse_pose2(p);
    else
        *p3 = parse_pose3(p);
}

}  // namespace

UpdateRegionReq parse_update_region(const json& j) {
    UpdateRegionReq r;
    r.agent = agent_of(j);
    if (j.contains("cloud")) {
        const json& cloud = j.at("cloud");
        if (!cloud.is_array()) throw BadFrame("cloud must be an array of points");
        r.cloud.reserve(cloud.size());
        for (const auto& p : cloud) r.cloud.push_back(json_to_vec3(p));
    }
    parse_pose_field(j, &r.pose3, &r.pose2);
    if (j.contains("region")) r.region = parse_world_frame(j.at("region"));
    return r;
}

json to_json(const ProcessObsReq& v) {
    json j = envelope("process_observation");
    j["agent"] = v.agent;
    if (v.pose3) j["robot_pose"] = to_json(*v.pose3);
    if (v.pose2) j["robot_pose"] = to_json(*v.pose2);
    if (v.detections) {
        json arr = json::array();
        for (const auto& b : *v.detections) arr.push_back(to_json(b));
        j["detections"] = std::move(arr);
    }
    if (v.label_only) j["label_only"] = *v.label_only;
    if (v.readings) {
        json arr = json::array();
        for (const auto& r : *v.readings) {
            if (r)
                arr.push_back(json::array({(*r)[0], (*r)[1]}));
            else
                arr.push_back(nullptr);
        }
        j["readings"] = std::move(arr);
    }
    if (v.language) j["language"] = to_json(*v.language);
    return j;
}

ProcessObsReq parse_process_obs(const json& j) {
    ProcessObsReq r;
    r.agent = agent_of(j);
    parse_pose_field(j, &r.pose3, &r.pose2);
    if (j.contains("detections")) {
        const json& arr = j.at("detections");
        if (!arr.is_array()) throw BadFrame("detections must be an array");
        std::vector<BoxMsg> boxes;
        boxes.reserve(arr.size());
        for (const auto& b : arr) boxes.push_back(parse_box(b));
        r.detections = std::move(boxes);
    }
    if (j.contains("label_only")) r.label_only = j.at("label_only").get<int>();
    if (j.contains("readings")) {
        const json& arr = j.at("readings");
        if (!arr.is_array()) throw BadFrame("readings must be an array");
        std::vector<std::optional<std::array<double, 2>>> out;
        out.reserve(arr.size());
        for (const auto& e : arr) {
            if (e.is_null()) {
                out.emplace_back(std::nullopt);
            } else {
                if (!e.is_array() || e.size() < 2)
                    throw BadFrame("reading must be null or [x, y]");
                out.emplace_back(std::array<double, 2>{e.at(0).get<double>(),
                                                       e.at(1).get<double>()});
            }
        }
        r.readings = std::move(out);
    }
    if (j.contains("language")) r.language = parse_language(j.at("language"));
    return r;
}

json to_json(const CreatePlannerReq& v) {
    json j = envelope("create_planner");
    j["agent"] = v.agent;
    j["planner"] = to_json(v.planner);
    return j;
}

CreatePlannerReq parse_create_planner(const json& j) {
    CreatePlannerReq r;
    r.agent = agent_of(j);
    if (j.contains("planner")) r.planner = parse_planner_config(j.at("planner"));
    return r;
}

json to_json(const PlanActionReq& v) {
    json j = envelope("plan_action");
    j["agent"] = v.agent;
    return j;
}

PlanActionReq parse_plan_action(const json& j) { return {agent_of(j)}; }

json to_json(const ListenReq& v) {
    json j = envelope("listen");
    j["agent"] = v.agent;
    return j;
}

ListenReq parse_listen(const json& j) { return {agent_of(j)}; }

// ---- responses ----

json to_json(const ErrorMsg& v) {
    json j = envelope("error");
    j["code"] = v.code;
    j["message"] = v.message;
    return j;
}

ErrorMsg parse_error(const json& j) {
    return {j.at("code").get<std::string>(), j.at("message").get<std::string>()};
}

json to_json(const BeliefSummary& v) {
    return json{{"id", v.id}, {"argmax", vec3_to_json(v.argmax)}, {"prob", v.prob}};
}

BeliefSummary parse_belief_summary(const json& j) {
    BeliefSummary s;
    s.id = j.at("id").get<int>();
    s.argmax = json_to_vec3(j.at("argmax"));
    s.prob = j.at("prob").get<double>();
    return s;
}

json to_json(const ActionMsg& v) {
    json j{{"name", v.name}};
    if (v.dest3) j["destination"] = to_json(*v.dest3);
    if (v.dest2) j["destination"] = to_json(*v.dest2);
    return j;
}

ActionMsg parse_action(const json& j) {
    ActionMsg a;
    a.name = j.at("name").get<std::string>();
    if (j.contains("destination")) {
        const json& d = j.at("destination");
        if (d.contains("yaw"))
            a.dest2 = parse_pose2(d);
        else
            a.dest3 = parse_pose3(d);
    }
    return a;
}

json to_json(const StatusMsg& v) {
    json j = envelope("status");
    j["agent"] = v.agent;
    j["seq"] = v.seq;
    j["ready"] = v.ready;
    j["found"] = v.found;
    j["pending"] = v.pending ? json(*v.pending) : json(nullptr);
    return j;
}

StatusMsg parse_status(const json& j) {
    StatusMsg s;
    s.agent = j.at("agent").get<std::string>();
    s.seq = j.at("seq").get<std::uint64_t>();
    s.ready = j.at("ready").get<bool>();
    s.found = j.at("found").get<std::vector<int>>();
    if (j.contains("pending") && !j.at("pending").is_null())
        s.pending = j.at("pending").get<std::string>();
    return s;
}

}  // namespace mos::proto
