#pragma once

// Weighted consensus over debater proposals and the debaters' running
// performance estimates.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace semag {

struct DebateProposal {
    int debater_index = 1; ///< 1-based
    std::string strategy_text;
    std::string param_text;
    double self_score = 0.0;
};

struct ConsensusWeights {
    std::vector<double> performances;
    double temperature = 1.0;
    std::vector<double> weights;
};

// softmax(performances / tau_w), shifted by the maximum for stability.
std::vector<double> softmax_weights(std::span<const double> performances, double tau_w);

// Alignment of a proposal with a candidate (strategy, params) pair, in [0,1].
using AlignmentFn = std::function<double(const DebateProposal& proposal, const DebateProposal& candidate)>;

// Token-set Jaccard of the two strategies plus a quarter of the proposal's self-score, clamped.
double lexical_alignment(const DebateProposal& proposal, const DebateProposal& candidate);

struct ConsensusDecision {
    std::size_t chosen = 0; ///< index into the proposal list
    std::string strategy;
    std::string params;
    ConsensusWeights weights;
    std::vector<double> scores; ///< aggregate score of each candidate
};

// Candidates are the proposals themselves; the winner maximizes sum_j w_j * phi(d_j, candidate).
// Ties go to the lowest debater index.
ConsensusDecision consensus(std::span<const DebateProposal> proposals, std::span<const double> performances,
                            double tau_w, const AlignmentFn& phi = lexical_alignment);

// EMA update of one debater's performance: eta <- (1 - beta) * eta + beta * reward.
std::vector<double> update_performance(std::vector<double> performances, int debater_index, double reward,
                                       double beta = 0.3);

} // namespace semag
