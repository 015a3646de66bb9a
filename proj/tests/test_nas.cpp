// Copyright 2026 The hexnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "doctest.h"
#include "hexnas/nas.hpp"
#include "hexnas/textio.hpp"

using namespace hexnas;
using namespace hexnas::nas;
using hexdata::Operation;
using models::SlotKind;

namespace {

struct Data {
  hexdata::Dataset train = hexdata::generate_dataset(Operation::Add, 4, 400, 1);
  hexdata::Dataset val = hexdata::generate_dataset(Operation::Add, 4, 100, 2);
};

TrialResult result(int index, double loss,
                   TrialStatus status = TrialStatus::Completed) {
  TrialResult r;
  r.config.trial_index = index;
  r.config.bindings = {{"hidden", 16 << index}};
  r.val_losses = {loss};
  r.final_val_loss = loss;
  r.status = status;
  return r;
}

}  // namespace

TEST_CASE("search spaces and mixed-radix decoding") {
  const auto v = value_choice_space();
  CHECK(v.size() == 4);
  CHECK(v.config_at(0) == Bindings{{"hidden", 16}});
  CHECK(v.config_at(3) == Bindings{{"hidden", 128}});
  CHECK_THROWS_AS(v.config_at(4), RangeError);
  const auto l = layer_choice_space();
  CHECK(l.size() == 2);
  CHECK(l.config_at(1) == Bindings{{"slot2", SlotKind::Identity}});

  SearchSpace both{v.value_choices, l.layer_choices};
  CHECK(both.size() == 8);
  CHECK(both.config_at(5) ==
        Bindings{{"hidden", 32}, {"slot2", SlotKind::Identity}});
  CHECK_THROWS_AS(SearchSpace{}.size(), ConfigError);
  CHECK_THROWS_AS((SearchSpace{{{"hidden", {}}}, {}}.size()), ConfigError);
}

TEST_CASE("bindings text round trip") {
  const Bindings b = {{"hidden", 32}, {"slot2", SlotKind::Identity}};
  CHECK(format_bindings(b) == "hidden=32;slot2=identity");
  CHECK(parse_bindings("hidden=32;slot2=identity") == b);
  CHECK_THROWS_AS(parse_bindings("hidden"), ConfigError);
}

TEST_CASE("random sampling without replacement") {
  const auto space = value_choice_space();
  const auto all = sample_random(space, 4, 10);
  std::set<int> hidden;
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].trial_index == static_cast<int>(i));
    CHECK(all[i].max_epochs == 5);
    CHECK(all[i].seed == derive_seed(10, i));
    hidden.insert(std::get<int>(all[i].bindings[0].value));
  }
  CHECK(hidden == std::set<int>{16, 32, 64, 128});
  CHECK(sample_random(space, 99, 10).size() == 4);
  CHECK(sample_random(space, 2, 10).size() == 2);
  CHECK(sample_random(space, 4, 10) == all);
  CHECK_THROWS_AS(sample_random(space, 0, 10), ConfigError);
}

TEST_CASE("first draw is roughly uniform over seeds") {
  const auto space = value_choice_space();
  std::map<int, int> counts;
  const int n = 4000;
  for (int s = 0; s < n; ++s) {
    ++counts[std::get<int>(sample_random(space, 1, s)[0].bindings[0].value)];
  }
  double chi2 = 0;
  for (const auto& [k, c] : counts) {
    chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  }
  // 3 degrees of freedom; p = 0.001 cut-off is 16.27
  CHECK(chi2 < 16.27);
}

TEST_CASE("apply_bindings edits the fully connected spec") {
  const auto spec = apply_bindings({}, {{"hidden", 32}, {"slot2", SlotKind::Identity}});
  CHECK(spec.hidden == 32);
  CHECK(spec.slot2 == SlotKind::Identity);
  CHECK_THROWS_AS(apply_bindings({}, {{"depth", 3}}), ConfigError);
  CHECK_THROWS_AS(apply_bindings({}, {{"hidden", SlotKind::Linear}}), ConfigError);
  CHECK_THROWS_AS(apply_bindings({}, {{"hidden", 0}}), ConfigError);
}

TEST_CASE("select_best: argmin, ties to the lowest index, skip divergence") {
  std::vector<TrialResult> rs = {result(0, 0.3), result(1, 0.1), result(2, 0.1),
                                 result(3, 0.05, TrialStatus::Diverged)};
  CHECK(select_best(rs).trial_index == 1);
  rs[1].status = TrialStatus::Diverged;
  CHECK(select_best(rs).trial_index == 2);
  for (auto& r : rs) r.status = TrialStatus::Diverged;
  CHECK_THROWS_AS(select_best(rs), NoWinnerError);
}

TEST_CASE("a trial trains for exactly max_epochs") {
  const Data d;
  const auto cfg = sample_random(value_choice_space(), 1, 3)[0];
  const auto r = run_trial(cfg, d.train, d.val);
  CHECK(r.status == TrialStatus::Completed);
  CHECK(r.val_losses.size() == 5);
  CHECK(r.final_val_loss == r.val_losses.back());
  CHECK(run_trial(cfg, d.train, d.val).val_losses == r.val_losses);
}

TEST_CASE("value-choice search logs every epoch and picks the argmin") {
  const Data d;
  NasConfig cfg;
  cfg.budget = 4;
  cfg.seed = 21;
  const auto out = value_choice_experiment(d.train, d.val, cfg);
  REQUIRE(out.trials.size() == 4);
  const std::string log = serialize_trial_log(out.trials);
  const auto lines = split(log, '\n');
  CHECK(lines.size() == 1 + 20 + 1);  // header, rows, trailing empty

  // independent scan of the log for the epoch-5 minimum
  double best = std::numeric_limits<double>::infinity();
  int best_index = -1;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f[2] != "5") continue;
    const double v = *parse_real(f[3]);
    const int idx = static_cast<int>(*parse_real(f[0]));
    if (v < best) {
      best = v;
      best_index = idx;
    }
  }
  CHECK(out.best.trial_index == best_index);

  cfg.threads = 3;
  const auto again = value_choice_experiment(d.train, d.val, cfg);
  CHECK(serialize_trial_log(again.trials) == log);
  CHECK(again.best == out.best);
}

TEST_CASE("layer-choice search runs both kinds") {
  const Data d;
  NasConfig cfg;
  cfg.seed = 5;
  const auto out = layer_choice_experiment(d.train, d.val, cfg);
  REQUIRE(out.trials.size() == 2);
  std::set<std::string> kinds;
  for (const auto& t : out.trials) kinds.insert(format_bindings(t.config.bindings));
  CHECK(kinds == std::set<std::string>{"slot2=identity", "slot2=linear"});
}

TEST_CASE("an all-diverged search keeps its trials") {
  Data d;
  for (auto& s : d.train.samples) s.target_norm = std::nan("");
  NasConfig cfg;
  cfg.budget = 2;
  try {
    value_choice_experiment(d.train, d.val, cfg);
    FAIL("expected SearchFailed");
  } catch (const SearchFailed& e) {
    CHECK(e.trials().size() == 2);
    CHECK(e.trials()[0].status == TrialStatus::Diverged);
  }
}

TEST_CASE("winner and comparison CSV") {
  const auto r = result(1, 0.25);
  const std::string w = serialize_winner(r);
  CHECK(w == "choice_bindings,final_val_loss\nhidden=32,0.25\n");
  CHECK(parse_winner(w) == r.config.bindings);
  CHECK_THROWS_AS(parse_winner("nope\n"), ParseError);
  Comparison c;
  c.nas_test_loss = 0.5;
  c.human_test_loss = 0.25;
  CHECK(serialize_comparison(c) == "arm,test_loss\nnas,0.5\nhuman,0.25\n");
}

TEST_CASE("retrain_and_compare trains both arms") {
  const Data d;
  TrialConfig best;
  best.bindings = {{"hidden", 16}};
  const auto c = retrain_and_compare(best, {}, d.train, d.val, 2);
  CHECK(std::isfinite(c.nas_test_loss));
  CHECK(std::isfinite(c.human_test_loss));
  CHECK(c.nas_curve.records.size() == 2);
  CHECK(c.human_curve.records.back().val_mse == c.human_test_loss);
  CHECK(retrain_and_compare(best, {}, d.train, d.val, 2).nas_test_loss ==
        c.nas_test_loss);
  try {
    retrain_and_compare(best, {}, d.train, d.val, 0);
    FAIL("expected ArmError");
  } catch (const ArmError& e) {
    CHECK(e.arm() == "nas");
  }
}
