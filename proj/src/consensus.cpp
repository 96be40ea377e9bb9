#include "semag/consensus.hpp"

#include "semag/errors.hpp"
#include "semag/text.hpp"

#include <algorithm>
#include <cmath>

namespace semag {

std::vector<double> softmax_weights(std::span<const double> performances, double tau_w) {
    if (performances.empty()) throw PreconditionError("softmax over an empty vector");
    if (!(tau_w > 0.0)) throw PreconditionError("consensus temperature must be positive");
    const double top = *std::max_element(performances.begin(), performances.end());
    std::vector<double> w(performances.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp((performances[i] - top) / tau_w);
        sum += w[i];
    }
    for (auto& x : w) x /= sum;
    return w;
}

double lexical_alignment(const DebateProposal& proposal, const DebateProposal& candidate) {
    const double overlap = text::jaccard(text::token_set(proposal.strategy_text), text::token_set(candidate.strategy_text));
    return std::clamp(overlap + 0.25 * proposal.self_score, 0.0, 1.0);
}

ConsensusDecision consensus(std::span<const DebateProposal> proposals, std::span<const double> performances,
                            double tau_w, const AlignmentFn& phi) {
    if (proposals.empty()) throw PreconditionError("consensus needs at least one proposal");
    if (proposals.size() != performances.size()) {
        throw PreconditionError("consensus needs one performance value per proposal");
    }
    ConsensusDecision out;
    out.weights.performances.assign(performances.begin(), performances.end());
    out.weights.temperature = tau_w;
    out.weights.weights = softmax_weights(performances, tau_w);

    out.scores.assign(proposals.size(), 0.0);
    for (std::size_t k = 0; k < proposals.size(); ++k) {
        for (std::size_t j = 0; j < proposals.size(); ++j) {
            out.scores[k] += out.weights.weights[j] * phi(proposals[j], proposals[k]);
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < proposals.size(); ++k) {
        const bool better = out.scores[k] > out.scores[best];
        const bool tie_lower = out.scores[k] == out.scores[best] &&
                               proposals[k].debater_index < proposals[best].debater_index;
        if (better || tie_lower) best = k;
    }
    out.chosen = best;
    out.strategy = proposals[best].strategy_text;
    out.params = proposals[best].param_text;
    return out;
}

std::vector<double> update_performance(std::vector<double> performances, int debater_index, double reward,
                                       double beta) {
    if (debater_index < 1 || static_cast<std::size_t>(debater_index) > performances.size()) {
        throw PreconditionError("debater index " + std::to_string(debater_index) + " out of range");
    }
    if (reward != 0.0 && reward != 1.0) throw PreconditionError("reward must be 0 or 1");
    auto& eta = performances[static_cast<std::size_t>(debater_index - 1)];
    eta = (1.0 - beta) * eta + beta * reward;
    return performances;
}

} // namespace semag
