#pragma once

#include <stdexcept>
#include <string>

namespace mos {

// Base for all errors raised by the planning engine.  Each error carries a
// stable machine-readable code so the protocol layer can map failures to
// error frames without string matching.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define MOS_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                 \
    public:                                                     \
        explicit Name(const std::string& msg)                   \
            : Error(#Name, msg) {}                              \
    }

// Belief filtering / exact solving.
MOS_DEFINE_ERROR(ZeroLikelihood);   // observation impossible under belief
MOS_DEFINE_ERROR(BudgetExceeded);   // exact solver exceeded node budget
MOS_DEFINE_ERROR(EmptyBelief);      // belief has no mass to sample from

// Octree belief.
MOS_DEFINE_ERROR(EmptyRegion);      // no sample landed inside the search region
MOS_DEFINE_ERROR(ZeroMass);         // update annihilated all probability mass

// View / topological graph sampling.
MOS_DEFINE_ERROR(NoFreeSpace);      // no unoccupied candidate positions
MOS_DEFINE_ERROR(Unreachable);      // navigation goal not reachable

// Spatial language.
MOS_DEFINE_ERROR(MissingFoR);       // relation needs a frame of reference
MOS_DEFINE_ERROR(ZeroField);        // language field normalized to zero
MOS_DEFINE_ERROR(WeightMismatch);   // mixture weights do not sum to one
MOS_DEFINE_ERROR(UnknownLandmark);  // tuple references landmark not on map

// Correlation models.
MOS_DEFINE_ERROR(DegenerateCorrelation);  // conditional has empty support

// Config / input validation.
MOS_DEFINE_ERROR(InvalidConfig);
MOS_DEFINE_ERROR(InvalidObservation);

// Protocol service.  These map one-to-one onto error frames on the wire.
MOS_DEFINE_ERROR(BadFrame);        // malformed frame, payload, or envelope
MOS_DEFINE_ERROR(DuplicateAgent);  // create_agent with an id already in use
MOS_DEFINE_ERROR(AgentNotFound);   // request names an unknown agent
MOS_DEFINE_ERROR(AgentNotReady);   // agent still awaits its first search region
MOS_DEFINE_ERROR(ActionPending);   // last planned action not yet executed
MOS_DEFINE_ERROR(PlannerMissing);  // plan_action before create_planner

#undef MOS_DEFINE_ERROR

}  // namespace mos
