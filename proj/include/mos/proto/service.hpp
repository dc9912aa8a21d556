#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mos/grid2/gridmap.hpp"
#include "mos/mos3d/agent.hpp"
#include "mos/planning/hierarchical.hpp"
#include "mos/proto/messages.hpp"
#include "mos/sloop/lang.hpp"

namespace mos::proto {

// Transport-independent request handler.  One Service owns all agent
// sessions; handle() maps one request payload to one response payload and
// never throws (failures come back as error frames).  Per-session work is
// serialized by a session mutex, so concurrent requests for distinct agents
// proceed in parallel while two requests for the same agent queue up.
//
// A session walks: create_agent (pending) -> update_search_region (agent
// materialized, ready) -> create_planner -> plan_action / process_observation.
// At most one planned action is outstanding; an observation whose reported
// pose lands within res/2 meters and 10 degrees of the planned destination
// marks it executed, and only then may the next plan_action proceed.
class Service {
public:
    using PushFn = std::function<void(const std::string&)>;

    Service() = default;
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Request/response channel.  Input and output are frame payloads (JSON
    // text without the length header).
    std::string handle(std::string_view payload);

    // Listen channel: validates a listen request and registers a push sink
    // for that agent's stream.  Returns the response payload plus the
    // listener handle when registration succeeded.  The stream pushes
    // status messages after every successful operation (and on heartbeat())
    // and request_search_region when local search wants a fresh scan.
    std::pair<std::string, std::optional<std::uint64_t>> subscribe(
        std::string_view payload, PushFn push);
    void remove_listener(std::uint64_t id);

    // Pushes a status frame for every session; a server typically calls
    // this on a timer.
    void heartbeat();

    std::size_t session_count() const;

    // In-process inspection for embedding and tests (not wire operations).
    // Callers must not race concurrent handle() calls for the same agent.
    const mos3d::Mos3dAgent* agent3(const std::string& id) const;
    const planning::HierarchicalAgent* agent2(const std::string& id) const;
    const WorldFrame* world_frame(const std::string& id) const;

private:
    struct PendingAction {
        std::string id;
        bool find = false;
        std::optional<Pose3Msg> dest3;
        std::optional<Pose2Msg> dest2;
    };

    struct Session {
        std::mutex mu;
        std::string id;
        AgentConfig cfg;
        bool ready = false;
        bool planner_ready = false;
        PlannerConfig planner;
        std::optional<PendingAction> pending;
        int action_counter = 0;
        std::uint64_t seq = 0;
        std::size_t region_cells = 0;
        // 3D stack.
        std::optional<WorldFrame> frame;
        std::unique_ptr<mos3d::Mos3dAgent> a3;
        // 2D stack.
        sloop::LandmarkMap lmap;
        sloop::SigmaTable sigmas;
        std::unique_ptr<grid2::GridMap2> map2;
        std::unique_ptr<planning::HierarchicalAgent> a2;
        bool found2 = false;
    };

    struct Listener {
        std::string agent;
        PushFn push;
    };

    std::shared_ptr<Session> find_session(const std::string& id) const;

    json do_create_agent(const json& req);
    json do_update_region(const json& req);
    json do_process_obs(const json& req);
    json do_create_planner(const json& req);
    json do_plan_action(const json& req);

    json update_region_3d(Session& s, const UpdateRegionReq& r);
    json update_region_2d(Session& s, const UpdateRegionReq& r);
    json process_obs_3d(Session& s, const ProcessObsReq& r);
    json process_obs_2d(Session& s, const ProcessObsReq& r);
    json plan_action_3d(Session& s);
    json plan_action_2d(Session& s);

    void push_status(Session& s);
    void push_message(const std::string& agent, const std::string& payload);

    mutable std::mutex reg_mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;

    mutable std::mutex listen_mu_;
    std::uint64_t next_listener_ = 1;
    std::map<std::uint64_t, Listener> listeners_;
};

}  // namespace mos::proto
