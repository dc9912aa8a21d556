#pragma once

#include <map>
#include <utility>

#include "mos/core/error.hpp"
#include "mos/core/rng.hpp"

namespace mos::pomdp {

// Normalized distribution over an ordered state type.  Keys are kept in a
// std::map so iteration (and therefore sampling and argmax tie-breaking)
// is deterministic.
template <typename S>
class Histogram {
public:
    Histogram() = default;

    void set(const S& s, double w) {
        if (w <= 0.0) {
            p_.erase(s);
            return;
        }
        p_[s] = w;
    }

    double prob(const S& s) const {
        auto it = p_.find(s);
        return it == p_.end() ? 0.0 : it->second;
    }

    std::size_t support_size() const { return p_.size(); }
    bool empty() const { return p_.empty(); }

    double total() const {
        double t = 0.0;
        for (const auto& [s, w] : p_) t += w;
        return t;
    }

    void normalize() {
        const double t = total();
        if (t <= 0.0) throw ZeroMass("histogram has no mass to normalize");
        for (auto& [s, w] : p_) w /= t;
    }

    // Multiply every entry by fn(state) and renormalize.
    template <typename Fn>
    void reweight(Fn&& fn) {
        for (auto& [s, w] : p_) w *= fn(s);
        for (auto it = p_.begin(); it != p_.end();)
            it = it->second <= 0.0 ? p_.erase(it) : std::next(it);
        if (p_.empty()) throw ZeroLikelihood("reweight removed all mass");
        normalize();
    }

    const S& sample(Rng& rng) const {
        if (p_.empty()) throw EmptyBelief("sampling from empty histogram");
        const double u = rng.uniform() * total();
        double acc = 0.0;
        for (const auto& [s, w] : p_) {
            acc += w;
            if (u < acc) return s;
        }
        return p_.rbegin()->first;
    }

    const S& argmax() const {
        if (p_.empty()) throw EmptyBelief("argmax of empty histogram");
        const S* best = &p_.begin()->first;
        double bw = p_.begin()->second;
        for (const auto& [s, w] : p_) {
            if (w > bw) {
                bw = w;
                best = &s;
            }
        }
        return *best;
    }

    auto begin() const { return p_.begin(); }
    auto end() const { return p_.end(); }

private:
    std::map<S, double> p_;
};

}  // namespace mos::pomdp
