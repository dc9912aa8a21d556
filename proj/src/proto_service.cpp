#include "mos/proto/service.hpp"

#include <algorithm>
#include <cmath>

#include "mos/grid2/belief2.hpp"
#include "mos/grid2/domain.hpp"
#include "mos/mos3d/mos3d.hpp"
#include "mos/octree/octree_belief.hpp"
#include "mos/sensing/observation.hpp"

namespace mos::proto {

namespace {

constexpr double kExecAngleRad = 10.0 * M_PI / 180.0;

// Error::what() is "Code: message"; the wire carries the two separately.
std::string error_text(const Error& e) {
    const std::string what = e.what();
    const std::string prefix = e.code() + ": ";
    if (what.rfind(prefix, 0) == 0) return what.substr(prefix.size());
    return what;
}

mos3d::Mos3dConfig model3_from(const AgentConfig& cfg) {
    mos3d::Mos3dConfig m;
    m.fov_deg = cfg.fov_deg;
    m.near_range = cfg.near_range / cfg.res;
    m.far_range = cfg.far_range > 0.0 ? cfg.far_range / cfg.res : m.far_range;
    m.alpha = cfg.alpha;
    return m;
}

mos3d::ViewGraphConfig graph_from(const AgentConfig& cfg) {
    mos3d::ViewGraphConfig g;
    g.k = cfg.num_nodes;
    if (cfg.sep > 0.0) g.sep = cfg.sep / cfg.res;
    g.resample_threshold = cfg.resample_threshold;
    return g;
}

planning::PouctConfig pouct_from(const AgentConfig& cfg, const PlannerConfig* pl) {
    planning::PouctConfig p;
    p.num_sims = cfg.num_sims;
    if (pl) {
        if (pl->num_sims > 0) p.num_sims = pl->num_sims;
        p.max_depth = pl->max_depth;
        if (pl->exploration) p.c = *pl->exploration;
        if (pl->rmax) p.rmax = *pl->rmax;
        if (pl->rmin) p.rmin = *pl->rmin;
    }
    return p;
}

grid2::SearchConfig make_search_config(const AgentConfig& cfg, double res) {
    grid2::SearchConfig m;
    m.res = res;
    m.rotate_step = 1;
    m.target_detector = {cfg.detector.tp,
                         cfg.detector.fp,
                         cfg.detector.range,
                         cfg.detector.sigma,
                         {cfg.detector.fov_deg, cfg.detector.fov_range}};
    m.step_cost = cfg.step_cost;
    m.find_reward = cfg.find_reward;
    m.find_penalty = cfg.find_penalty;
    m.found_dist = cfg.found_dist;
    m.discount = cfg.discount;
    return m;
}

planning::HierarchicalConfig hier_from(const AgentConfig& cfg, double res,
                                       const PlannerConfig* pl) {
    planning::HierarchicalConfig h;
    h.model = make_search_config(cfg, res);
    h.topo.max_nodes = cfg.topo_nodes;
    h.topo.d_sep = cfg.topo_sep;
    h.topo.resample_threshold = cfg.resample_threshold;
    h.low.num_sims = cfg.num_sims;
    if (pl) {
        if (pl->num_sims > 0) h.low.num_sims = pl->num_sims;
        h.low.max_depth = pl->max_depth;
        if (pl->exploration) h.low.c = *pl->exploration;
        if (pl->rmax) h.low.rmax = h.high.rmax = *pl->rmax;
        if (pl->rmin) h.low.rmin = h.high.rmin = *pl->rmin;
    }
    return h;
}

mos3d::Pose pose3_to_grid(const Pose3Msg& p, const WorldFrame& f) {
    if (p.forward.squaredNorm() == 0.0)
        throw InvalidObservation("forward vector must be nonzero");
    return {f.world_to_cell(p.position), mos3d::quantize_dir(p.forward)};
}

grid2::RobotPose pose2_to_grid(const Pose2Msg& p, const WorldFrame& f) {
    GridPoint c = f.world_to_cell(Vec3(p.x, p.y, 0.0));
    c.z = 0;
    const int dir = static_cast<int>(std::lround(p.yaw / (M_PI / 4.0)));
    return {c, ((dir % grid2::kHeadings) + grid2::kHeadings) % grid2::kHeadings};
}

// The frustum uses the raw reported direction rather than the quantized
// planning pose, so synthesized labels line up with the client's camera.
sensing::FrustumFov frustum_at(const Pose3Msg& p, const WorldFrame& f,
                               const mos3d::Mos3dConfig& m) {
    sensing::FrustumFov fov;
    fov.pos = f.world_to_grid(p.position);
    fov.orient = sensing::FrustumFov::look_at(fov.pos, fov.pos + p.forward);
    fov.fov_deg = m.fov_deg;
    fov.near_range = m.near_range;
    fov.far_range = m.far_range;
    return fov;
}

bool executed_3d(const Pose3Msg& dest, const Pose3Msg& pose, double res) {
    if ((pose.position - dest.position).norm() > res / 2.0) return false;
    const double nn = pose.forward.norm() * dest.forward.norm();
    if (nn <= 0.0) return false;
    const double c = std::clamp(pose.forward.dot(dest.forward) / nn, -1.0, 1.0);
    return std::acos(c) <= kExecAngleRad;
}

bool executed_2d(const Pose2Msg& dest, const Pose2Msg& pose, double res) {
    if (std::hypot(pose.x - dest.x, pose.y - dest.y) > res / 2.0) return false;
    return sloop::angular_deviation(pose.yaw, dest.yaw) <= kExecAngleRad;
}

}  // namespace

std::shared_ptr<Service::Session> Service::find_session(
    const std::string& id) const {
    std::lock_guard lock(reg_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw AgentNotFound("no agent named \"" + id + "\"");
    return it->second;
}

std::size_t Service::session_count() const {
    std::lock_guard lock(reg_mu_);
    return sessions_.size();
}

std::string Service::handle(std::string_view payload) {
    json resp;
    try {
        const json req = json::parse(payload);
        const std::string type = check_envelope(req);
        if (type == "create_agent")
            resp = do_create_agent(req);
        else if (type == "update_search_region")
            resp = do_update_region(req);
        else if (type == "process_observation")
            resp = do_process_obs(req);
        else if (type == "create_planner")
            resp = do_create_planner(req);
        else if (type == "plan_action")
            resp = do_plan_action(req);
        else if (type == "listen")
            throw BadFrame("listen requires a streaming connection");
        else
            throw BadFrame("unknown message type \"" + type + "\"");
    } catch (const json::exception& e) {
        resp = to_json(ErrorMsg{"BadFrame", e.what()});
    } catch (const Error& e) {
        resp = to_json(ErrorMsg{e.code(), error_text(e)});
    } catch (const std::exception& e) {
        resp = to_json(ErrorMsg{"Internal", e.what()});
    }
    return resp.dump();
}

std::pair<std::string, std::optional<std::uint64_t>> Service::subscribe(
    std::string_view payload, PushFn push) {
    try {
        const json req = json::parse(payload);
        const std::string type = check_envelope(req);
        if (type != "listen") throw BadFrame("expected a listen request");
        const ListenReq r = parse_listen(req);
        find_session(r.agent);
        std::uint64_t id;
        {
            std::lock_guard lock(listen_mu_);
            id = next_listener_++;
            listeners_[id] = Listener{r.agent, std::move(push)};
        }
        json resp = envelope("ack");
        resp["agent"] = r.agent;
        resp["status"] = "listening";
        return {resp.dump(), id};
    } catch (const json::exception& e) {
        return {to_json(ErrorMsg{"BadFrame", e.what()}).dump(), std::nullopt};
    } catch (const Error& e) {
        return {to_json(ErrorMsg{e.code(), error_text(e)}).dump(), std::nullopt};
    } catch (const std::exception& e) {
        return {to_json(ErrorMsg{"Internal", e.what()}).dump(), std::nullopt};
    }
}

void Service::remove_listener(std::uint64_t id) {
    std::lock_guard lock(listen_mu_);
    listeners_.erase(id);
}

void Service::push_message(const std::string& agent, const std::string& payload) {
    std::vector<std::pair<std::uint64_t, PushFn>> targets;
    {
        std::lock_guard lock(listen_mu_);
        for (const auto& [id, ln] : listeners_)
            if (ln.agent == agent) targets.emplace_back(id, ln.push);
    }
    std::vector<std::uint64_t> dead;
    for (auto& [id, push] : targets) {
        try {
            push(payload);
        } catch (...) {
            dead.push_back(id);  // broken pipe: drop the subscription
        }
    }
    if (!dead.empty()) {
        std::lock_guard lock(listen_mu_);
        for (const auto id : dead) listeners_.erase(id);
    }
}

namespace {

std::vector<int> found_bits(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if ((mask >> i) & 1u) out.push_back(i);
    return out;
}

}  // namespace

void Service::push_status(Session& s) {
    StatusMsg m;
    m.agent = s.id;
    m.seq = ++s.seq;
    m.ready = s.ready;
    if (s.cfg.kind == "3d" && s.a3)
        m.found = found_bits(s.a3->found(), s.a3->num_objects());
    else if (s.found2)
        m.found = {0};
    if (s.pending) m.pending = s.pending->id;
    push_message(s.id, to_json(m).dump());
}

void Service::heartbeat() {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(reg_mu_);
        all.reserve(sessions_.size());
        for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    for (const auto& s : all) {
        std::lock_guard lock(s->mu);
        push_status(*s);
    }
}

json Service::do_create_agent(const json& req) {
    const CreateAgentReq r = parse_create_agent(req);
    validate(r.config);
    auto sess = std::make_shared<Session>();
    sess->id = r.agent;
    sess->cfg = r.config;
    if (r.config.kind == "2d")
        sess->lmap = sloop::parse_landmark_map(r.config.landmarks.dump());
    {
        std::lock_guard lock(reg_mu_);
        if (!sessions_.emplace(r.agent, sess).second)
            throw DuplicateAgent("agent \"" + r.agent + "\" already exists");
    }
    {
        std::lock_guard lock(sess->mu);
        push_status(*sess);
    }
    json resp = envelope("ack");
    resp["agent"] = r.agent;
    resp["status"] = "pending";
    return resp;
}

json Service::do_update_region(const json& req) {
    const UpdateRegionReq r = parse_update_region(req);
    auto sess = find_session(r.agent);
    std::lock_guard lock(sess->mu);
    json resp = sess->cfg.kind == "3d" ? update_region_3d(*sess, r)
                                       : update_region_2d(*sess, r);
    push_status(*sess);
    return resp;
}

json Service::update_region_3d(Session& s, const UpdateRegionReq& r) {
    const AgentConfig& cfg = s.cfg;
    const int dim = cfg.octree_size;

    WorldFrame frame;
    if (s.ready) {
        frame = *s.frame;
        if (r.region && !(*r.region == frame))
            throw InvalidConfig("the region frame is fixed once the agent is ready");
    } else if (r.region) {
        frame = *r.region;
        if (!(frame.res > 0.0)) throw InvalidConfig("region res must be positive");
    } else {
        frame.center = cfg.center;
        frame.res = cfg.res;
        const double full = dim * cfg.res;
        frame.size = Vec3(full, full, full);
        for (int a = 0; a < 3; ++a)
            if (cfg.region_size[a] > 0.0) frame.size[a] = cfg.region_size[a];
    }
    int n[3];
    for (int a = 0; a < 3; ++a) {
        n[a] = static_cast<int>(std::llround(frame.size[a] / frame.res));
        if (n[a] < 1 || n[a] > dim)
            throw InvalidConfig("region size does not fit the octree");
    }

    std::vector<Vec3> pts;
    pts.reserve(r.cloud.size());
    for (const auto& w : r.cloud) pts.push_back(frame.world_to_grid(w));
    const int inflate = static_cast<int>(std::llround(cfg.inflation / frame.res));
    auto occ = sensing::OccupancyGrid::from_points(pts, dim, inflate);
    const std::size_t occupied = occ.occupied_count();

    if (!s.ready) {
        std::vector<GridPoint> cells;
        cells.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
        for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
                for (int x = 0; x < n[0]; ++x) cells.push_back({x, y, z});

        std::vector<octree::PriorEntry> prior;
        if (cfg.prior_from_occupancy) {
            // Keep only prior nodes that overlap the region box; rescaling a
            // node with no region cells below it would have nothing to carry
            // the mass.
            for (const auto& e :
                 octree::occupancy_prior(occ, cfg.prior_level, cfg.prior_weight,
                                         cfg.occupancy_fill_height)) {
                const int side = 1 << e.node.level;
                if (e.node.x * side < n[0] && e.node.y * side < n[1] &&
                    e.node.z * side < n[2])
                    prior.push_back(e);
            }
        }
        std::vector<octree::OctreeBelief> beliefs;
        beliefs.reserve(cfg.targets.size());
        for (std::size_t i = 0; i < cfg.targets.size(); ++i)
            beliefs.push_back(octree::init_octree_belief_from_cells(dim, cells, prior));

        mos3d::Pose start{frame.world_to_cell(frame.center), 25};
        if (r.pose3) start = pose3_to_grid(*r.pose3, frame);
        const mos3d::AgentSetup setup{model3_from(cfg), graph_from(cfg),
                                      pouct_from(cfg, nullptr)};
        s.a3 = std::make_unique<mos3d::Mos3dAgent>(std::move(occ), std::move(beliefs),
                                                   start, setup, cfg.seed);
        s.frame = frame;
        s.region_cells = cells.size();
        s.ready = true;
    } else {
        s.a3->set_occupancy(std::move(occ));
        if (r.pose3) s.a3->set_pose(pose3_to_grid(*r.pose3, *s.frame));
    }

    json resp = envelope("ack");
    resp["agent"] = s.id;
    resp["status"] = "ready";
    resp["cells"] = s.region_cells;
    resp["occupied"] = occupied;
    return resp;
}

json Service::update_region_2d(Session& s, const UpdateRegionReq& r) {
    const AgentConfig& cfg = s.cfg;
    if (r.region)
        throw InvalidConfig("2d agents take their region from the landmarks map");
    const double res = s.lmap.res;

    WorldFrame frame;
    frame.center = Vec3(cfg.center.x(), cfg.center.y(), 0.0);
    frame.size = Vec3(s.lmap.width * res, s.lmap.height * res, res);
    frame.res = res;

    grid2::GridMap2 next(s.lmap.width, s.lmap.height);
    std::size_t occupied = 0;
    for (const auto& w : r.cloud) {
        GridPoint c = frame.world_to_cell(Vec3(w.x(), w.y(), 0.0));
        c.z = 0;
        if (next.in_bounds(c) && !next.blocked(c)) {
            next.set_blocked(c);
            ++occupied;
        }
    }

    grid2::RobotPose pose{{0, 0, 0}, 0};
    if (r.pose2)
        pose = pose2_to_grid(*r.pose2, frame);
    else if (s.ready)
        pose = s.a2->pose();
    else
        pose = {frame.world_to_cell(frame.center), 0};
    pose.pos.z = 0;
    if (!next.free(pose.pos))
        throw InvalidConfig("robot pose is not on a free cell");

    // Re-scanning keeps the belief; mass on newly blocked cells is dropped
    // before anything is committed, so a ZeroMass leaves the session as it
    // was.
    std::optional<grid2::Belief2> keep;
    if (s.ready) {
        grid2::Belief2 b = s.a2->belief();
        for (int y = 0; y < s.lmap.height; ++y)
            for (int x = 0; x < s.lmap.width; ++x)
                if (next.blocked({x, y, 0})) b.at(x, y) = 0.0;
        b.normalize();
        keep = std::move(b);
    }

    if (!s.map2) s.map2 = std::make_unique<grid2::GridMap2>();
    *s.map2 = std::move(next);
    s.a2 = std::make_unique<planning::HierarchicalAgent>(
        *s.map2, pose, hier_from(cfg, res, s.planner_ready ? &s.planner : nullptr),
        cfg.seed);
    if (keep) s.a2->set_belief(std::move(*keep));
    s.frame = frame;
    s.region_cells = s.map2->free_cells().size();
    s.ready = true;

    json resp = envelope("ack");
    resp["agent"] = s.id;
    resp["status"] = "ready";
    resp["cells"] = s.region_cells;
    resp["occupied"] = occupied;
    return resp;
}

json Service::do_process_obs(const json& req) {
    const ProcessObsReq r = parse_process_obs(req);
    auto sess = find_session(r.agent);
    std::lock_guard lock(sess->mu);
    if (!sess->ready)
        throw AgentNotReady("agent \"" + r.agent +
                            "\" has no search region yet");
    json resp = sess->cfg.kind == "3d" ? process_obs_3d(*sess, r)
                                       : process_obs_2d(*sess, r);
    push_status(*sess);
    return resp;
}

json Service::process_obs_3d(Session& s, const ProcessObsReq& r) {
    if (!r.pose3)
        throw InvalidObservation("3d agents need a robot_pose with a forward vector");
    if (r.readings || r.language)
        throw InvalidObservation("readings and language apply to 2d agents");
    const WorldFrame& f = *s.frame;
    const int ntargets = static_cast<int>(s.cfg.targets.size());

    const mos3d::Pose pose = pose3_to_grid(*r.pose3, f);
    const bool executed =
        s.pending && s.pending->dest3 && executed_3d(*s.pending->dest3, *r.pose3, f.res);
    s.a3->set_pose(pose);

    std::optional<sensing::VolumetricObservation> z;
    const mos3d::Mos3dConfig& model = s.a3->setup().model;
    if (r.label_only) {
        if (*r.label_only < 0 || *r.label_only >= ntargets)
            throw InvalidObservation("label_only id out of range");
        z = sensing::synthesize_label_only(frustum_at(*r.pose3, f, model),
                                           s.a3->occupancy(), *r.label_only);
    } else if (r.detections) {
        std::vector<sensing::BoxDetection> boxes;
        boxes.reserve(r.detections->size());
        for (const auto& b : *r.detections) {
            if (b.id < 0 || b.id >= ntargets)
                throw InvalidObservation("detection id out of range");
            boxes.push_back({b.id, f.world_to_grid(b.center), b.extents / f.res});
        }
        z = sensing::synthesize_boxes(frustum_at(*r.pose3, f, model),
                                      s.a3->occupancy(), boxes);
    }
    if (z) s.a3->update(*z);

    if (executed) {
        if (s.pending->find && z) {
            // A find succeeds for the objects the detector actually reported
            // at declaration time.
            for (int i = 0; i < ntargets; ++i) {
                if ((s.a3->found() >> i) & 1u) continue;
                const bool seen =
                    std::any_of(z->labels.begin(), z->labels.end(),
                                [i](const auto& e) { return e.second == i; });
                if (seen) s.a3->mark_found(i);
            }
        }
        s.pending.reset();
    }

    json resp = envelope("ack");
    resp["agent"] = s.id;
    resp["status"] = "ok";
    resp["executed"] = executed;
    resp["found"] = found_bits(s.a3->found(), ntargets);
    json beliefs = json::array();
    for (int i = 0; i < ntargets; ++i) {
        const auto& b = s.a3->beliefs()[i];
        const GridPoint g = b.argmax_cell();
        beliefs.push_back(to_json(BeliefSummary{i, f.cell_to_world(g), b.prob(g)}));
    }
    resp["belief"] = std::move(beliefs);
    return resp;
}

json Service::process_obs_2d(Session& s, const ProcessObsReq& r) {
    if (!r.pose2)
        throw InvalidObservation("2d agents need a robot_pose with a yaw");
    if (r.detections || r.label_only)
        throw InvalidObservation("detections and label_only apply to 3d agents");
    const AgentConfig& cfg = s.cfg;
    const WorldFrame& f = *s.frame;
    const double res = f.res;

    const grid2::RobotPose pose = pose2_to_grid(*r.pose2, f);
    const bool executed =
        s.pending && s.pending->dest2 && executed_2d(*s.pending->dest2, *r.pose2, res);
    s.a2->set_pose(pose);

    bool detected = false;
    if (r.readings) {
        if (r.readings->size() != 1)
            throw InvalidObservation("2d agents expose a single detector slot");
        std::optional<GridPoint> z0;
        if ((*r.readings)[0]) {
            const auto& xy = *(*r.readings)[0];
            GridPoint c = f.world_to_cell(Vec3(xy[0], xy[1], 0.0));
            c.z = 0;
            if (!s.map2->in_bounds(c))
                throw InvalidObservation("reading outside the map");
            z0 = c;
            detected = true;
        }
        grid2::Belief2 b = s.a2->belief();
        grid2::detection_update(b, *s.map2, res, grid2::to_pose2(pose),
                                make_search_config(cfg, res).target_detector, z0);
        s.a2->set_belief(std::move(b));
    }
    if (r.language) {
        const int m = r.language->mixture > 0 ? r.language->mixture : cfg.mixture;
        std::vector<sloop::SpatialTuple> mine;
        for (const auto& t : r.language->tuples)
            if (t.figure == cfg.targets[0]) mine.push_back(t);
        const sloop::Field field = sloop::sloop_field(mine, s.lmap, s.sigmas, m);
        grid2::Belief2 b = s.a2->belief();
        sloop::apply_language_to_belief(b, field);
        s.a2->set_belief(std::move(b));
    }

    if (executed) {
        if (s.pending->find && detected) s.found2 = true;
        s.pending.reset();
    }

    json resp = envelope("ack");
    resp["agent"] = s.id;
    resp["status"] = "ok";
    resp["executed"] = executed;
    resp["found"] = s.found2 ? json::array({0}) : json::array();
    const GridPoint g = s.a2->belief().argmax();
    json beliefs = json::array();
    beliefs.push_back(to_json(BeliefSummary{0, f.cell_to_world(g),
                                            s.a2->belief().prob(g)}));
    resp["belief"] = std::move(beliefs);
    return resp;
}

json Service::do_create_planner(const json& req) {
    const CreatePlannerReq r = parse_create_planner(req);
    auto sess = find_session(r.agent);
    std::lock_guard lock(sess->mu);
    if (!sess->ready)
        throw AgentNotReady("agent \"" + r.agent + "\" has no search region yet");
    sess->planner = r.planner;
    sess->planner_ready = true;
    int sims;
    if (sess->cfg.kind == "3d") {
        const auto p = pouct_from(sess->cfg, &sess->planner);
        sess->a3->set_pouct(p);
        sims = p.num_sims;
    } else {
        // The hierarchical planner takes its budgets at construction, so
        // rebuild it in place, carrying the belief and pose over.
        grid2::Belief2 b = sess->a2->belief();
        const grid2::RobotPose pose = sess->a2->pose();
        const auto h = hier_from(sess->cfg, sess->lmap.res, &sess->planner);
        sess->a2 = std::make_unique<planning::HierarchicalAgent>(*sess->map2, pose, h,
                                                                 sess->cfg.seed);
        sess->a2->set_belief(std::move(b));
        sims = h.low.num_sims;
    }
    push_status(*sess);
    json resp = envelope("ack");
    resp["agent"] = sess->id;
    resp["status"] = "ok";
    resp["num_sims"] = sims;
    return resp;
}

json Service::do_plan_action(const json& req) {
    const PlanActionReq r = parse_plan_action(req);
    auto sess = find_session(r.agent);
    std::lock_guard lock(sess->mu);
    if (!sess->ready)
        throw AgentNotReady("agent \"" + r.agent + "\" has no search region yet");
    if (!sess->planner_ready)
        throw PlannerMissing("create_planner has not been called for \"" + r.agent +
                             "\"");
    if (sess->pending)
        throw ActionPending("action \"" + sess->pending->id +
                            "\" has not been executed yet");
    json resp = sess->cfg.kind == "3d" ? plan_action_3d(*sess) : plan_action_2d(*sess);
    push_status(*sess);
    return resp;
}

json Service::plan_action_3d(Session& s) {
    const WorldFrame& f = *s.frame;
    const auto refs = s.a3->unfound_beliefs();
    const bool resampled =
        !s.a3->has_graph() ||
        mos3d::should_resample(*s.a3->graph(), refs,
                               s.a3->setup().graph.resample_threshold);
    const auto result = s.a3->plan();

    ActionMsg act;
    Pose3Msg dest;
    if (result.action.kind == mos3d::Mos3dAction::kMove) {
        act.name = "move";
        dest.position = f.cell_to_world(result.action.target);
        // Face the strongest remaining belief mode, matching the implicit
        // reorientation the motion model applies.
        double best = -1.0;
        GridPoint best_cell{};
        for (int i = 0; i < s.a3->num_objects(); ++i) {
            if ((s.a3->found() >> i) & 1u) continue;
            const auto& b = s.a3->beliefs()[i];
            if (b.normalizer() <= 0.0) continue;
            const GridPoint g = b.argmax_cell();
            const double p = b.prob(g);
            if (p > best) {
                best = p;
                best_cell = g;
            }
        }
        Vec3 fwd = mos3d::dir_vec(s.a3->pose().dir);
        if (best >= 0.0) {
            const Vec3 v = f.cell_to_world(best_cell) - dest.position;
            if (v.squaredNorm() > 0.0) fwd = v.normalized();
        }
        dest.forward = fwd;
    } else {
        act.name = "find";
        dest.position = f.cell_to_world(s.a3->pose().pos);
        dest.forward = mos3d::dir_vec(s.a3->pose().dir);
    }
    act.dest3 = dest;

    PendingAction pending;
    pending.id = "a" + std::to_string(++s.action_counter);
    pending.find = result.action.kind == mos3d::Mos3dAction::kFind;
    pending.dest3 = dest;
    s.pending = pending;

    json resp = envelope("plan");
    resp["agent"] = s.id;
    resp["action_id"] = pending.id;
    resp["action"] = to_json(act);
    resp["num_sims"] = s.a3->setup().pouct.num_sims;
    resp["resampled"] = resampled;
    return resp;
}

json Service::plan_action_2d(Session& s) {
    const WorldFrame& f = *s.frame;
    const auto step = s.a2->plan_step();

    const grid2::RobotPose cur = s.a2->pose();
    grid2::RobotPose next = cur;
    std::string name;
    bool find = false;
    switch (step.action) {
        case grid2::Action2::kMoveAhead:
            name = "move_ahead";
            next = grid2::apply_move(cur, step.action, *s.map2, 1);
            break;
        case grid2::Action2::kRotateLeft:
            name = "rotate_left";
            next = grid2::apply_move(cur, step.action, *s.map2, 1);
            break;
        case grid2::Action2::kRotateRight:
            name = "rotate_right";
            next = grid2::apply_move(cur, step.action, *s.map2, 1);
            break;
        case grid2::Action2::kFind:
            name = "find";
            find = true;
            break;
    }

    Pose2Msg dest;
    const Vec3 w = f.cell_to_world(next.pos);
    dest.x = w.x();
    dest.y = w.y();
    dest.yaw = grid2::heading_rad(next.dir);

    ActionMsg act;
    act.name = name;
    act.dest2 = dest;

    PendingAction pending;
    pending.id = "a" + std::to_string(++s.action_counter);
    pending.find = find;
    pending.dest2 = dest;
    s.pending = pending;

    static const char* kSubgoalNames[] = {"navigate", "search_local", "done"};
    json resp = envelope("plan");
    resp["agent"] = s.id;
    resp["action_id"] = pending.id;
    resp["action"] = to_json(act);
    resp["num_sims"] =
        hier_from(s.cfg, s.lmap.res, s.planner_ready ? &s.planner : nullptr)
            .low.num_sims;
    resp["resampled"] = step.graph_resampled;
    resp["subgoal"] = json{{"kind", kSubgoalNames[static_cast<int>(step.subgoal.kind)]},
                           {"node", step.subgoal.node}};

    if (step.subgoal.kind == planning::Subgoal::kSearchLocal && step.subgoal_changed) {
        json m = envelope("request_search_region");
        m["agent"] = s.id;
        m["seq"] = ++s.seq;
        push_message(s.id, m.dump());
    }
    return resp;
}

const mos3d::Mos3dAgent* Service::agent3(const std::string& id) const {
    std::lock_guard lock(reg_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second->a3.get();
}

const planning::HierarchicalAgent* Service::agent2(const std::string& id) const {
    std::lock_guard lock(reg_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second->a2.get();
}

const WorldFrame* Service::world_frame(const std::string& id) const {
    std::lock_guard lock(reg_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() || !it->second->frame ? nullptr
                                                       : &*it->second->frame;
}

}  // namespace mos::proto
