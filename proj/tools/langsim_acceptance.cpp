// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: prints one PASS/FAIL line per criterion (1-9).
// Exit code 0 when every selected criterion passes, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "langsim/cli/commands.hpp"
#include "langsim/core/dynamics.hpp"
#include "langsim/costs/collision.hpp"
#include "langsim/diffusion/sampler.hpp"

namespace {

using namespace langsim;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

ad::Mat normal_mat(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  return normal_field(rows, cols, rng);
}

double max_abs(const ad::Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool close_rel(double a, double b, double rel, double floor) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

// ---------------------------------------------------------------------------
// Criterion 1: math core.

Verdict criterion1() {
  const auto t0 = Clock::now();
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  for (int K : {1, 5, 100}) {
    const NoiseSchedule s = cosine_schedule(K);
    bool ok = s.alpha_bar[0] == 1.0;
    double prod = 1.0;
    for (int k = 1; k <= K; ++k) {
      prod *= s.alpha[k];
      ok = ok && s.beta[k] > 0.0 && s.beta[k] <= 0.999 && s.alpha_bar[k] < s.alpha_bar[k - 1] &&
           std::abs(s.alpha_bar[k] - prod) < 1e-12;
    }
    check(ok, "schedule K=" + std::to_string(K));
  }

  for (int K : {5, 100}) {
    const NoiseSchedule s = cosine_schedule(K);
    const ad::Mat clean = normal_mat(4, 32, 1);
    ad::Mat tau = forward_noise(clean, K, s, normal_mat(4, 32, 2));
    for (int k = K; k >= 1; --k) tau = ddim_step(tau, clean, k, s);
    check(max_abs(tau - clean) <= 1e-6, "ddim round trip K=" + std::to_string(K));
  }

  {
    const NoiseSchedule s = cosine_schedule(100);
    double worst = 0.0;
    for (int k : {1, 2, 30, 77, 100}) {
      const ad::Mat tk = normal_mat(3, 10, 10 + k), x0 = normal_mat(3, 10, 20 + k);
      const double ab = s.alpha_bar[k], abp = s.alpha_bar[k - 1];
      const ad::Mat expect = (std::sqrt(abp) * s.beta[k] / (1.0 - ab)) * x0 +
                             (std::sqrt(s.alpha[k]) * (1.0 - abp) / (1.0 - ab)) * tk;
      worst = std::max(worst, max_abs(posterior_mean(tk, x0, k, s) - expect));
    }
    check(worst <= 1e-12, "posterior mean");
  }

  {
    const ad::Mat c = normal_mat(3, 8, 3), u = normal_mat(3, 8, 4);
    check(cfg_combine(c, u, 0.0) == c && cfg_combine(c, u, -1.0) == u, "cfg exactness");
  }

  {
    Rng rng(5);
    std::vector<AgentState> st{{0.0, 0.0, 0.3, 20.0}};
    std::vector<Action> acts;
    for (int t = 0; t < 16; ++t) {
      acts.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0)});
      st.push_back(step_unicycle(st.back(), acts.back(), kDefaultDt));
    }
    const std::vector<Action> back = inverse_dynamics(st, kDefaultDt);
    double worst = 0.0;
    for (size_t t = 0; t < acts.size(); ++t) {
      worst = std::max({worst, std::abs(back[t].accel - acts[t].accel),
                        std::abs(back[t].yaw_rate - acts[t].yaw_rate)});
    }
    check(back.size() == acts.size() && worst <= 1e-9, "inverse dynamics");
  }

  {
    const Vocabulary vocab = Vocabulary::standard();
    ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    const ParamSet params = init_params(11, cfg);
    const Scenario sc = generate_scenario(ScriptKind::Yield, 5, vocab);
    const std::vector<LanePoint> lanes = lane_sample_points(sc.map, cfg.lane_spacing);
    const SceneFeatures sf = scene_features(sc.history, lanes, cfg);
    const auto prompts = scenario_prompts(sc);
    const int n = sf.agents;
    const ad::Mat tau = normal_mat(n, cfg.action_dim(), 6);
    const ad::Mat up = normal_mat(n, cfg.action_dim(), 7);
    auto objective = [&](const ParamSet& p, const ad::Mat& x) {
      const Conditioning c = encode_conditioning(cfg, p, sf, prompts);
      return (denoise(cfg, p, x, 3, c.z_enc, c.z_lang, c.rel, n).array() * up.array()).sum();
    };
    const DenoiseGrad g = denoise_grad(cfg, params, tau, 3, sf, prompts, up);
    const double h = 1e-4;
    Rng rng(8);
    bool ok = true;
    const auto& entries = params.entries();
    for (int q = 0; q < 40; ++q) {
      const auto& e = entries[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(entries.size()) - 1))];
      const Eigen::Index idx = rng.uniform_int(0, static_cast<int>(e.value.size()) - 1);
      ParamSet plus = params, minus = params;
      plus.at(e.name).data()[idx] += h;
      minus.at(e.name).data()[idx] -= h;
      const double fd = (objective(plus, tau) - objective(minus, tau)) / (2.0 * h);
      ok = ok && close_rel(g.params.at(e.name).data()[idx], fd, 1e-3, 1e-4);
    }
    for (int q = 0; q < 10; ++q) {
      const Eigen::Index idx = rng.uniform_int(0, static_cast<int>(tau.size()) - 1);
      ad::Mat plus = tau, minus = tau;
      plus.data()[idx] += h;
      minus.data()[idx] -= h;
      const double fd = (objective(params, plus) - objective(params, minus)) / (2.0 * h);
      ok = ok && close_rel(g.tau.data()[idx], fd, 1e-3, 1e-4);
    }
    check(ok, "denoiser gradient");
  }

  {
    Rng rng(9);
    Trajectory t(2, 12, kDefaultDt);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k <= 12; ++k) {
        t.state(i, k) = {rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-kPi, kPi), 5.0};
      }
    }
    const std::vector<Vec2> g = collision_cost_grad(t, 0, 1);
    const double h = 1e-6;
    bool ok = true;
    for (int k = 1; k <= 12; ++k) {
      for (int c = 0; c < 2; ++c) {
        Trajectory p = t, m = t;
        (c == 0 ? p.state(0, k).x : p.state(0, k).y) += h;
        (c == 0 ? m.state(0, k).x : m.state(0, k).y) -= h;
        const double fd = (collision_cost(p, 0, 1) - collision_cost(m, 0, 1)) / (2.0 * h);
        ok = ok && close_rel(c == 0 ? g[k].x() : g[k].y(), fd, 1e-6, 1.0);
      }
    }
    check(ok, "collision cost gradient");
  }

  {
    const std::vector<AgentDims> dims = {{4.5, 2.0}, {5.0, 2.2}, {3.8, 1.8}, {12.0, 2.6}};
    const std::vector<DiskSet> disks = disk_sets(dims);
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      Rng rng(100 + s);
      Trajectory t(4, 6, kDefaultDt);
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k <= 6; ++k) {
          t.state(i, k) = {rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-kPi, kPi), 0.0};
        }
      }
      double total = 0.0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          if (i == j) continue;
          double sum = 0.0;
          for (int k = 0; k <= 6; ++k) {
            double best = 1e300;
            const AgentState& a = t.state(i, k);
            const AgentState& b = t.state(j, k);
            for (double oa : disks[i].offsets) {
              for (double ob : disks[j].offsets) {
                const double dx = (a.x + oa * std::cos(a.heading)) - (b.x + ob * std::cos(b.heading));
                const double dy = (a.y + oa * std::sin(a.heading)) - (b.y + ob * std::sin(b.heading));
                best = std::min(best, std::hypot(dx, dy));
              }
            }
            const double r = disks[i].radius + disks[j].radius;
            sum += best <= r ? 1.0 - best / r : 0.0;
          }
          total += std::min(1.0, sum);
        }
      }
      worst = std::max(worst, std::abs(no_collision_loss(t, disks) - total / 16.0));
    }
    check(worst <= 1e-12, "disk loss oracle");
  }

  const double secs = seconds_since(t0);
  check(secs < 120.0, "runtime");
  std::string detail = fmt("%.1f s", secs);
  for (const std::string& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------------------
// Shared scenario sets and simulation helpers.

struct Suites {
  Vocabulary vocab = Vocabulary::standard();
  std::vector<Scenario> train;      // 2000 mixed
  std::vector<Scenario> ambiguous;  // intersection yield / pass
  std::vector<Scenario> mixed;      // held-out mixed
  std::vector<Scenario> conflict;   // head-on and crossing
};

std::vector<Scenario> generate_mixed(int count, std::uint64_t seed, const Vocabulary& vocab) {
  const std::vector<ScriptKind> kinds = allocate_scripts(uniform_mix(), count, seed);
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_scenario(kinds[i], derive_seed(seed, i), vocab));
  return out;
}

std::vector<Scenario> generate_pairs(int count, ScriptKind a, ScriptKind b, std::uint64_t seed,
                                     const Vocabulary& vocab) {
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_scenario(i % 2 ? b : a, derive_seed(seed, i), vocab));
  return out;
}

struct SimOutcome {
  MetricReport report;
  double mean_ade = 0.0;  // over every rollout of every scenario
  double seconds = 0.0;
};

SimOutcome simulate_suite(const ModelConfig& cfg, const ParamSet& params, int K,
                          const std::vector<Scenario>& suite, const SimConfig& sim) {
  const NoiseSchedule sched = cosine_schedule(K);
  std::vector<EvalCase> cases;
  double ade_sum = 0.0;
  int ade_n = 0;
  const auto t0 = Clock::now();
  for (size_t i = 0; i < suite.size(); ++i) {
    const std::vector<LanePoint> lanes = lane_sample_points(suite[i].map, cfg.lane_spacing);
    const ScenarioRollouts r = simulate_scenario(cfg, params, sched, suite[i], lanes, sim, derive_seed(555, i));
    EvalCase ec{&suite[i], executed_trajectories(r), {r.adversary, r.target}};
    cases.push_back(std::move(ec));
  }
  SimOutcome out;
  out.seconds = seconds_since(t0);
  for (const EvalCase& ec : cases) {
    for (const Trajectory& tr : ec.rollouts) {
      ade_sum += ade(tr, ec.scenario->future);
      ++ade_n;
    }
  }
  out.report = evaluate_cases(cases);
  out.mean_ade = ade_sum / ade_n;
  return out;
}

/// One replan over the full horizon: open-loop joint samples from the current state.
SimConfig open_loop_sim(SimMode mode, int rollouts) {
  SimConfig s;
  s.mode = mode;
  s.replan_interval = 16;
  s.rollouts = rollouts;
  s.sample.samples = 1;
  return s;
}

void progress(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

// ---------------------------------------------------------------------------
// Criterion 2: open-loop training on 200 scenarios.

Verdict criterion2(const Suites& s) {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  cfg.vocab_size = s.vocab.size();
  const std::vector<Scenario> train = generate_mixed(200, 21, s.vocab);
  const std::vector<Scenario> test = generate_mixed(40, 22, s.vocab);
  TrainConfig tc;
  tc.K = 100;
  tc.learning_rate = 1e-3;
  tc.iterations = 1000;
  tc.seed = 3;
  const ParamSet init = init_params(3, cfg);
  ParamSet trained = train_openloop(cfg, init, prepare_examples(train, cfg), tc);
  quantize_to_float(trained);
  const double train_secs = seconds_since(t0);

  const NoiseSchedule sched = cosine_schedule(tc.K);
  auto held_out = [&](const ParamSet& p) {
    double sum = 0.0;
    for (size_t i = 0; i < test.size(); ++i) {
      const std::vector<LanePoint> lanes = lane_sample_points(test[i].map, cfg.lane_spacing);
      const SceneInput in{test[i].history, &lanes, test[i].agent_dims, scenario_prompts(test[i]), {}};
      SampleConfig sc;
      sc.samples = 8;
      sc.seed = derive_seed(77, i);
      const SampleResult r = sample_joint(cfg, p, sched, in, sc);
      std::vector<Trajectory> tr;
      for (const JointSample& j : r.samples) tr.push_back(j.traj);
      sum += min_ade(tr, test[i].future);
    }
    return sum / static_cast<double>(test.size());
  };
  const double before = held_out(init);
  const double after = held_out(trained);
  const double reduction = 1.0 - after / before;
  return {reduction >= 0.5 && train_secs < 600.0,
          fmt("minADE %.3f -> %.3f m (%.1f%% lower), training %.0f s", before, after, 100.0 * reduction,
              train_secs)};
}

// ---------------------------------------------------------------------------
// Criteria 3-7: one trained model family.

struct Models {
  ModelConfig cfg;
  ParamSet base;       // K = 100
  ParamSet retarget;   // K = 5
  ParamSet closedloop; // K = 5
};

Models train_models(const Suites& s) {
  Models m;
  m.cfg.vocab_size = s.vocab.size();
  const std::vector<TrainingExample> ex = prepare_examples(s.train, m.cfg);
  TrainConfig tc;
  tc.K = 100;
  tc.learning_rate = 1e-3;
  tc.iterations = 3000;
  tc.seed = 1;
  auto t0 = Clock::now();
  m.base = train_openloop(m.cfg, init_params(1, m.cfg), ex, tc);
  quantize_to_float(m.base);
  progress(fmt("open-loop training %.0f s", seconds_since(t0)));
  TrainConfig rt = tc;
  rt.iterations = 1000;
  t0 = Clock::now();
  m.retarget = retarget_schedule(m.cfg, m.base, 5, ex, rt);
  quantize_to_float(m.retarget);
  progress(fmt("retargeting %.0f s", seconds_since(t0)));
  TrainConfig cl = tc;
  cl.K = 5;
  cl.iterations = RunConfig{}.cl_iterations;
  cl.learning_rate = RunConfig{}.cl_learning_rate;
  t0 = Clock::now();
  m.closedloop = closedloop_train(m.cfg, m.retarget, ex, cl);
  quantize_to_float(m.closedloop);
  progress(fmt("closed-loop training %.0f s", seconds_since(t0)));
  return m;
}

Verdict criterion3(const Suites& s, const Models& m) {
  const SimOutcome u = simulate_suite(m.cfg, m.retarget, 5, s.ambiguous, open_loop_sim(SimMode::Uncond, 8));
  const SimOutcome c = simulate_suite(m.cfg, m.retarget, 5, s.ambiguous, open_loop_sim(SimMode::Text, 8));
  const double gain = 1.0 - c.report.min_ade / u.report.min_ade;
  const double drift = std::abs(c.report.composite - u.report.composite) / u.report.composite;
  return {gain >= 0.2 && drift <= 0.03,
          fmt("minADE %.3f -> %.3f m (%.1f%% lower); composite %.4f vs %.4f (%.1f%% apart)", u.report.min_ade,
              c.report.min_ade, 100.0 * gain, u.report.composite, c.report.composite, 100.0 * drift)};
}

Verdict criterion4(const Suites& s, const Models& m) {
  const SimOutcome k100 = simulate_suite(m.cfg, m.base, 100, s.mixed, open_loop_sim(SimMode::Text, 8));
  const SimOutcome k5 = simulate_suite(m.cfg, m.retarget, 5, s.mixed, open_loop_sim(SimMode::Text, 8));
  const double gap = std::abs(k5.report.composite - k100.report.composite) / k100.report.composite;
  const double speedup = k100.seconds / k5.seconds;
  return {gap <= 0.10 && speedup >= 5.0,
          fmt("composite K=100 %.4f, K=5 %.4f (%.1f%% apart); wall time %.1f s vs %.1f s (%.1fx)",
              k100.report.composite, k5.report.composite, 100.0 * gap, k100.seconds, k5.seconds, speedup)};
}

Verdict criterion5(const Suites& s, const Models& m) {
  SimConfig sim;
  sim.mode = SimMode::Text;
  sim.rollouts = 4;
  sim.sample.samples = 1;
  const SimOutcome ol = simulate_suite(m.cfg, m.retarget, 5, s.mixed, sim);
  const SimOutcome cl = simulate_suite(m.cfg, m.closedloop, 5, s.mixed, sim);
  const double gain = 1.0 - cl.mean_ade / ol.mean_ade;
  return {gain >= 0.10 && cl.report.map >= ol.report.map,
          fmt("rollout ADE %.3f -> %.3f m (%.1f%% lower); map %.4f -> %.4f", ol.mean_ade, cl.mean_ade,
              100.0 * gain, ol.report.map, cl.report.map)};
}

Verdict criterion6(const Suites& s, const Models& m) {
  SimConfig plain;
  plain.mode = SimMode::Text;
  plain.sample.samples = 4;
  SimConfig guided = plain;
  guided.mode = SimMode::Adversarial;
  guided.sample.samples = 1;
  guided.sample.guidance.alpha = 0.01;
  guided.adversarial_text = false;
  SimConfig guided_text = guided;
  guided_text.adversarial_text = true;
  const SimOutcome u = simulate_suite(m.cfg, m.closedloop, 5, s.conflict, plain);
  const SimOutcome g = simulate_suite(m.cfg, m.closedloop, 5, s.conflict, guided);
  const SimOutcome gt = simulate_suite(m.cfg, m.closedloop, 5, s.conflict, guided_text);
  const bool ok = u.report.collision_rate < 0.05 && g.report.collision_rate >= 0.30 &&
                  gt.report.map >= g.report.map;
  return {ok, fmt("collision rate %.2f unguided, %.2f guided, %.2f guided+text; map %.4f guided, %.4f guided+text",
                  u.report.collision_rate, g.report.collision_rate, gt.report.collision_rate, g.report.map,
                  gt.report.map)};
}

Verdict criterion7(const Suites& s, const Models& m) {
  const std::vector<double> weights{-1.0, 0.0, 0.5, 1.0, 2.0};
  std::vector<double> ades, maps;
  std::string detail;
  for (double w : weights) {
    SimConfig sim = open_loop_sim(SimMode::Text, 8);
    sim.sample.cfg_weight = w;
    const SimOutcome o = simulate_suite(m.cfg, m.retarget, 5, s.ambiguous, sim);
    ades.push_back(o.report.min_ade);
    maps.push_back(o.report.map);
    detail += fmt("%sw=%g minADE %.3f map %.4f", detail.empty() ? "" : "; ", w, o.report.min_ade, o.report.map);
  }
  const int best = static_cast<int>(std::min_element(ades.begin(), ades.end()) - ades.begin());
  const bool small_positive = weights[best] > 0.0 && weights[best] <= 1.0;
  const bool map_ok = maps[4] <= maps[3];
  return {small_positive && map_ok, detail};
}

// ---------------------------------------------------------------------------
// Criterion 8: metric oracles and ground truth scored against itself.

Verdict criterion8(const Suites& s) {
  std::vector<std::string> failed;
  const StatisticConfig c{"x", 64, 0.0, 64.0, false, 1.0, StatGroup::Kinematic};
  std::vector<double> samples(32, 40.5);
  const double floor_nll = histogram_nll(samples, 10.5, c);
  std::fill(samples.begin(), samples.begin() + 10, 10.5);
  const double ten_nll = histogram_nll(samples, 10.5, c);
  if (std::abs(ten_nll + std::log(10.1 / 38.4)) > 1e-9) failed.push_back("nll 10/32");
  if (std::abs(floor_nll + std::log(0.1 / 38.4)) > 1e-9) failed.push_back("nll floor");
  const std::vector<double> nll{0.0, std::log(4.0)};
  const std::vector<char> valid{1, 1};
  if (std::abs(aggregate_agent(nll, valid) - 0.5) > 1e-9) failed.push_back("agent aggregate");
  std::vector<StatisticConfig> two = default_statistics();
  for (auto& st : two) st.weight = 0.0;
  two[0].weight = two[1].weight = 0.5;
  ScenarioScores sc;
  sc.m.fill(1.0);
  sc.m[1] = 0.5;
  if (std::abs(aggregate({sc}, two).composite - 0.75) > 1e-9) failed.push_back("composite");

  std::vector<EvalCase> cases;
  for (const Scenario& sc2 : s.mixed) cases.push_back({&sc2, std::vector<Trajectory>(32, sc2.future), {-1, -1}});
  const MetricReport gt = evaluate_cases(cases);
  if (gt.composite < 0.95) failed.push_back("ground-truth composite");
  std::string detail = fmt("oracles %s; ground-truth composite %.4f (lambda 0.1, 32 copies)",
                           failed.empty() || failed.back() == "ground-truth composite" ? "exact" : "off",
                           gt.composite);
  for (const std::string& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------------------
// Criterion 9: every command rerun, single and multi worker, is byte-identical.

Verdict criterion9(const std::string& work) {
  namespace fs = std::filesystem;
  RunConfig rc;
  rc.seed = 9;
  rc.data.count = 12;
  rc.model.d_model = 32;
  rc.model.d_lang = 16;
  rc.model.heads = 2;
  rc.model.blocks = 1;
  rc.train.iterations = 20;
  rc.train.K = 20;
  rc.retarget_steps = 5;
  rc.cl_iterations = 4;
  rc.sim.sample.samples = 2;
  rc.sim.rollouts = 2;

  const std::vector<std::string> files = {
      "data/scenarios.jsonl", "data/manifest.json", "data/vocab.txt",  "base.ckpt",
      "base.ckpt.loss.jsonl", "k5.ckpt",            "cl.ckpt",         "cl.ckpt.loss.jsonl",
      "text.jsonl",           "adv.jsonl",          "report.json",     "scene.svg"};
  auto run_all = [&](const std::string& dir, int workers) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig r = rc;
    r.workers = workers;
    cmd_gen_data(r, dir + "/data");
    cmd_train(r, dir + "/data", dir + "/base.ckpt");
    cmd_retarget(r, dir + "/data", dir + "/base.ckpt", dir + "/k5.ckpt");
    cmd_train_cl(r, dir + "/data", dir + "/k5.ckpt", dir + "/cl.ckpt", false);
    cmd_simulate(r, dir + "/data", dir + "/cl.ckpt", dir + "/text.jsonl");
    RunConfig adv = r;
    adv.sim.mode = SimMode::Adversarial;
    adv.sim.sample.guidance.alpha = 0.01;
    cmd_simulate(adv, dir + "/data", dir + "/cl.ckpt", dir + "/adv.jsonl");
    cmd_evaluate(r, dir + "/data", dir + "/text.jsonl", dir + "/report.json", dir + "/adv.jsonl");
    cmd_render(dir + "/data", 0, dir + "/text.jsonl", dir + "/scene.svg");
  };
  run_all(work + "/a", 1);
  run_all(work + "/b", 1);
  run_all(work + "/c", 3);
  std::vector<std::string> differ;
  for (const std::string& f : files) {
    const std::string a = read_file(work + "/a/" + f);
    if (a != read_file(work + "/b/" + f) || a != read_file(work + "/c/" + f)) differ.push_back(f);
  }
  std::string detail = fmt("%zu artifacts compared over 3 runs (1, 1 and 3 workers)", files.size());
  for (const std::string& f : differ) detail += "; differs: " + f;
  return {differ.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"langsim acceptance suite"};
  std::vector<int> only;
  std::string work = (std::filesystem::temp_directory_path() / "langsim_acceptance").string();
  app.add_option("--only", only, "run only these criteria (1-9)");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  bool all_pass = true;
  auto report = [&](int id, const std::function<Verdict()>& fn) {
    if (!selected.count(id)) return;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all_pass = all_pass && v.pass;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << v.detail << ")" << std::endl;
  };

  Suites s;
  s.ambiguous = generate_pairs(40, ScriptKind::Pass, ScriptKind::Yield, 99, s.vocab);
  s.mixed = generate_mixed(40, 11, s.vocab);
  s.conflict = generate_pairs(100, ScriptKind::Pass, ScriptKind::HeadOn, 13, s.vocab);

  report(1, criterion1);
  report(2, [&] { return criterion2(s); });
  const bool need_models = selected.count(3) || selected.count(4) || selected.count(5) || selected.count(6) ||
                           selected.count(7);
  Models m;
  if (need_models) {
    s.train = generate_mixed(2000, 7, s.vocab);
    m = train_models(s);
  }
  report(3, [&] { return criterion3(s, m); });
  report(4, [&] { return criterion4(s, m); });
  report(5, [&] { return criterion5(s, m); });
  report(6, [&] { return criterion6(s, m); });
  report(7, [&] { return criterion7(s, m); });
  report(8, [&] { return criterion8(s); });
  report(9, [&] { return criterion9(work); });
  return all_pass ? 0 : 1;
}
