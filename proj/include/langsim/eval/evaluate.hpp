// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numeric>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/parallel.hpp"
#include "langsim/eval/metrics.hpp"
#include "langsim/synth/scenario.hpp"

namespace langsim {

/// Rollout set of one scenario for evaluation.
struct EvalCase {
  const Scenario* scenario = nullptr;
  std::vector<Trajectory> rollouts;
  std::pair<int, int> collision_pair{-1, -1};  // defaults to the interest pair
};

/// Realism scores for the interest pair, minADE over the rollouts and the pair
/// collision rate (one trial per rollout).
inline MetricReport evaluate_cases(const std::vector<EvalCase>& cases,
                                   const std::vector<StatisticConfig>& stats = default_statistics(),
                                   double lambda = kDefaultLaplace, int workers = 1) {
  require(!cases.empty(), "evaluate: no scenarios");
  std::vector<ScenarioScores> scores(cases.size());
  std::vector<double> ades(cases.size());
  std::vector<int> hits(cases.size()), trials(cases.size());
  parallel_for(static_cast<int>(cases.size()), workers, [&](int c) {
    const EvalCase& ec = cases[static_cast<size_t>(c)];
    require(ec.scenario != nullptr, "evaluate: missing scenario");
    require(!ec.rollouts.empty(), "evaluate: scenario without rollouts");
    const Scenario& sc = *ec.scenario;
    std::vector<int> targets{sc.interest_pair.first};
    if (sc.agent_count() >= 2) targets.push_back(sc.interest_pair.second);
    scores[c] = score_scenario(sc.future, ec.rollouts, sc.agent_dims, sc.map, targets, stats, lambda);
    ades[c] = min_ade(ec.rollouts, sc.future);
    auto pair = ec.collision_pair.first >= 0 ? ec.collision_pair : sc.interest_pair;
    if (sc.agent_count() >= 2) {
      for (const Trajectory& r : ec.rollouts) {
        hits[c] += pair_collided(r, sc.agent_dims, pair.first, pair.second) ? 1 : 0;
        ++trials[c];
      }
    }
  });
  MetricReport rep = aggregate(scores, stats);
  rep.min_ade = std::accumulate(ades.begin(), ades.end(), 0.0) / static_cast<double>(ades.size());
  const int h = std::accumulate(hits.begin(), hits.end(), 0);
  const int n = std::accumulate(trials.begin(), trials.end(), 0);
  rep.collision_rate = n > 0 ? static_cast<double>(h) / n : 0.0;
  rep.sample_count = static_cast<int>(cases.front().rollouts.size());
  return rep;
}

}  // namespace langsim
