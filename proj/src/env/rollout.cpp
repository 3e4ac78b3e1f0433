#include "pomo/env/rollout.hpp"

#include <algorithm>
#include <string>

#include "pomo/core/error.hpp"
#include "pomo/env/returns.hpp"

namespace pomo {

namespace {

void check_starts(const std::vector<int>& starts, int lo, int hi, const char* who) {
    if (starts.empty()) throw ArgumentError(std::string(who) + ": empty start list");
    std::vector<int> sorted = starts;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < lo || sorted[i] > hi)
            throw ArgumentError(std::string(who) + ": start " + std::to_string(sorted[i]) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
        if (i > 0 && sorted[i] == sorted[i - 1])
            throw ArgumentError(std::string(who) + ": duplicate start " +
                                std::to_string(sorted[i]));
    }
}

void check_step_shape(std::size_t got, std::size_t want, const std::vector<double>* logprobs,
                      const char* who) {
    if (got != want)
        throw ArgumentError(std::string(who) + ": expected " + std::to_string(want) +
                            " actions, got " + std::to_string(got));
    if (logprobs && logprobs->size() != want)
        throw ArgumentError(std::string(who) + ": logprob count mismatch");
}

}  // namespace

TspRollout::TspRollout(const TspInstance& instance, const std::vector<int>& start_nodes)
    : instance_(&instance),
      n_(static_cast<int>(start_nodes.size())),
      m_(static_cast<int>(instance.nodes.size())) {
    check_starts(start_nodes, 0, m_ - 1, "TspRollout");
    starts_ = start_nodes;
    current_ = start_nodes;
    visited_.assign(static_cast<std::size_t>(n_) * m_, 0);
    done_.assign(n_, 0);
    actions_.resize(n_);
    logprob_sums_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        visited_[static_cast<std::size_t>(i) * m_ + start_nodes[i]] = 1;
        actions_[i].push_back(start_nodes[i]);
    }
    t_ = 1;
    if (m_ == 1) done_.assign(n_, 1);
}

std::vector<std::uint8_t> TspRollout::legal_mask() const {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_) * m_, 0);
    if (all_done()) return mask;
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = visited_[i] ? 0 : 1;
    return mask;
}

void TspRollout::step(const std::vector<int>& actions, const std::vector<double>* logprobs) {
    check_step_shape(actions.size(), n_, logprobs, "TspRollout::step");
    if (all_done()) throw ContractViolation("TspRollout::step: batch already finished");
    for (int i = 0; i < n_; ++i) {
        const int a = actions[i];
        if (a < 0 || a >= m_)
            throw ContractViolation("TspRollout::step: action " + std::to_string(a) +
                                    " out of range");
        std::uint8_t& bit = visited_[static_cast<std::size_t>(i) * m_ + a];
        if (bit)
            throw ContractViolation("TspRollout::step: node " + std::to_string(a) +
                                    " already visited in trajectory " + std::to_string(i));
        bit = 1;
        current_[i] = a;
        actions_[i].push_back(a);
        if (logprobs) logprob_sums_[i] += (*logprobs)[i];
    }
    ++t_;
    if (t_ >= m_) done_.assign(n_, 1);
}

std::vector<double> TspRollout::returns() const {
    if (!all_done()) throw ContractViolation("TspRollout::returns: batch not finished");
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = tsp_return(*instance_, actions_[i]);
    return out;
}

CvrpRollout::CvrpRollout(const CvrpInstance& instance, const std::vector<int>& start_nodes)
    : instance_(&instance),
      n_(static_cast<int>(start_nodes.size())),
      m_(static_cast<int>(instance.customers.size())) {
    check_starts(start_nodes, 1, m_, "CvrpRollout");
    starts_ = start_nodes;
    current_ = start_nodes;
    visited_.assign(static_cast<std::size_t>(n_) * m_, 0);
    visited_count_.assign(n_, 1);
    remaining_.assign(n_, 0.0);
    done_.assign(n_, 0);
    actions_.resize(n_);
    logprob_sums_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const int customer = start_nodes[i] - 1;
        visited_[static_cast<std::size_t>(i) * m_ + customer] = 1;
        remaining_[i] = instance.vehicle_capacity - instance.demands[customer];
        if (remaining_[i] < -kCapacityEps)
            throw ArgumentError("CvrpRollout: start customer " + std::to_string(customer) +
                                " exceeds vehicle capacity");
        actions_[i].push_back(start_nodes[i]);
    }
    t_ = 1;
}

bool CvrpRollout::all_done() const {
    return std::all_of(done_.begin(), done_.end(), [](std::uint8_t d) { return d != 0; });
}

bool CvrpRollout::action_legal(int traj, int action) const {
    if (done_[traj]) return action == 0;
    if (action == 0) {
        if (current_[traj] != 0) return true;
        // At the depot with servable customers the depot is illegal, which
        // rules out zero-length self-loops.
        for (int j = 0; j < m_; ++j)
            if (!visited_[static_cast<std::size_t>(traj) * m_ + j] &&
                instance_->demands[j] <= remaining_[traj] + kCapacityEps)
                return false;
        return true;
    }
    const int customer = action - 1;
    if (visited_[static_cast<std::size_t>(traj) * m_ + customer]) return false;
    return instance_->demands[customer] <= remaining_[traj] + kCapacityEps;
}

std::vector<std::uint8_t> CvrpRollout::legal_mask() const {
    const int a_count = m_ + 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_) * a_count, 0);
    for (int i = 0; i < n_; ++i)
        for (int a = 0; a < a_count; ++a)
            mask[static_cast<std::size_t>(i) * a_count + a] = action_legal(i, a) ? 1 : 0;
    return mask;
}

void CvrpRollout::step(const std::vector<int>& actions, const std::vector<double>* logprobs) {
    check_step_shape(actions.size(), n_, logprobs, "CvrpRollout::step");
    for (int i = 0; i < n_; ++i) {
        const int a = actions[i];
        if (a < 0 || a > m_)
            throw ContractViolation("CvrpRollout::step: action " + std::to_string(a) +
                                    " out of range");
        if (!action_legal(i, a))
            throw ContractViolation("CvrpRollout::step: illegal action " + std::to_string(a) +
                                    " in trajectory " + std::to_string(i));
        actions_[i].push_back(a);
        if (done_[i]) continue;
        if (a == 0) {
            current_[i] = 0;
            remaining_[i] = instance_->vehicle_capacity;
            if (visited_count_[i] == m_) done_[i] = 1;
        } else {
            const int customer = a - 1;
            visited_[static_cast<std::size_t>(i) * m_ + customer] = 1;
            ++visited_count_[i];
            remaining_[i] -= instance_->demands[customer];
            current_[i] = a;
        }
        if (logprobs) logprob_sums_[i] += (*logprobs)[i];
    }
    ++t_;
}

std::vector<double> CvrpRollout::returns() const {
    if (!all_done()) throw ContractViolation("CvrpRollout::returns: batch not finished");
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = cvrp_return(*instance_, actions_[i]);
    return out;
}

KpRollout::KpRollout(const KpInstance& instance, const std::vector<int>& start_items)
    : instance_(&instance),
      n_(static_cast<int>(start_items.size())),
      m_(static_cast<int>(instance.items.size())) {
    check_starts(start_items, 0, m_ - 1, "KpRollout");
    starts_ = start_items;
    current_ = start_items;
    selected_.assign(static_cast<std::size_t>(n_) * m_, 0);
    remaining_.assign(n_, 0.0);
    done_.assign(n_, 0);
    actions_.resize(n_);
    logprob_sums_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const int item = start_items[i];
        if (instance.items[item].weight > instance.capacity + kCapacityEps)
            throw ArgumentError("KpRollout: start item " + std::to_string(item) +
                                " does not fit the knapsack");
        selected_[static_cast<std::size_t>(i) * m_ + item] = 1;
        remaining_[i] = instance.capacity - instance.items[item].weight;
        actions_[i].push_back(item);
    }
    t_ = 1;
    for (int i = 0; i < n_; ++i)
        if (!anything_fits(i)) done_[i] = 1;
}

bool KpRollout::all_done() const {
    return std::all_of(done_.begin(), done_.end(), [](std::uint8_t d) { return d != 0; });
}

bool KpRollout::anything_fits(int traj) const {
    for (int j = 0; j < m_; ++j)
        if (!selected_[static_cast<std::size_t>(traj) * m_ + j] &&
            instance_->items[j].weight <= remaining_[traj] + kCapacityEps)
            return true;
    return false;
}

std::vector<std::uint8_t> KpRollout::legal_mask() const {
    const int a_count = m_ + 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_) * a_count, 0);
    for (int i = 0; i < n_; ++i) {
        if (done_[i]) {
            mask[static_cast<std::size_t>(i) * a_count + m_] = 1;
            continue;
        }
        for (int j = 0; j < m_; ++j)
            if (!selected_[static_cast<std::size_t>(i) * m_ + j] &&
                instance_->items[j].weight <= remaining_[i] + kCapacityEps)
                mask[static_cast<std::size_t>(i) * a_count + j] = 1;
    }
    return mask;
}

void KpRollout::step(const std::vector<int>& actions, const std::vector<double>* logprobs) {
    check_step_shape(actions.size(), n_, logprobs, "KpRollout::step");
    for (int i = 0; i < n_; ++i) {
        const int a = actions[i];
        if (a < 0 || a > m_)
            throw ContractViolation("KpRollout::step: action " + std::to_string(a) +
                                    " out of range");
        if (done_[i]) {
            if (a != m_)
                throw ContractViolation("KpRollout::step: finished trajectory " +
                                        std::to_string(i) + " must take the pad action");
            actions_[i].push_back(a);
            continue;
        }
        if (a == m_)
            throw ContractViolation("KpRollout::step: pad action while items still fit in "
                                    "trajectory " +
                                    std::to_string(i));
        std::uint8_t& bit = selected_[static_cast<std::size_t>(i) * m_ + a];
        if (bit || instance_->items[a].weight > remaining_[i] + kCapacityEps)
            throw ContractViolation("KpRollout::step: illegal item " + std::to_string(a) +
                                    " in trajectory " + std::to_string(i));
        bit = 1;
        remaining_[i] -= instance_->items[a].weight;
        current_[i] = a;
        actions_[i].push_back(a);
        if (logprobs) logprob_sums_[i] += (*logprobs)[i];
        if (!anything_fits(i)) done_[i] = 1;
    }
    ++t_;
}

std::vector<double> KpRollout::returns() const {
    if (!all_done()) throw ContractViolation("KpRollout::returns: batch not finished");
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = kp_return(*instance_, actions_[i]);
    return out;
}

}  // namespace pomo
