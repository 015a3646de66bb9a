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

#include "hexnas/nas.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <thread>

#include "hexnas/random.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::nas {
namespace {

constexpr std::uint64_t kInitStream = 0x494E;
constexpr std::uint64_t kNasArmStream = 0x4E4153;
constexpr std::uint64_t kHumanArmStream = 0x48554D;

std::vector<std::string_view> data_lines(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  return lines;
}

}  // namespace

std::string format_bindings(const Bindings& bindings) {
  std::string out;
  for (const auto& b : bindings) {
    if (!out.empty()) {
      out += ';';
    }
    out += b.name + '=';
    if (const int* v = std::get_if<int>(&b.value)) {
      out += std::to_string(*v);
    } else {
      out += models::to_string(std::get<models::SlotKind>(b.value));
    }
  }
  return out;
}

Bindings parse_bindings(std::string_view text) {
  Bindings out;
  if (text.empty()) {
    return out;
  }
  for (const auto part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ConfigError("malformed binding '" + std::string(part) + "'");
    }
    Binding b;
    b.name = std::string(part.substr(0, eq));
    const auto value = part.substr(eq + 1);
    if (const auto n = parse_real(value); n && *n == static_cast<int>(*n)) {
      b.value = static_cast<int>(*n);
    } else {
      b.value = models::parse_slot_kind(value);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::size_t SearchSpace::size() const {
  if (value_choices.empty() && layer_choices.empty()) {
    throw ConfigError("search space has no choice slots");
  }
  std::size_t n = 1;
  for (const auto& c : value_choices) {
    if (c.values.empty()) {
      throw ConfigError("value choice '" + c.name + "' is empty");
    }
    n *= c.values.size();
  }
  for (const auto& c : layer_choices) {
    if (c.kinds.empty()) {
      throw ConfigError("layer choice '" + c.name + "' is empty");
    }
    n *= c.kinds.size();
  }
  return n;
}

Bindings SearchSpace::config_at(std::size_t index) const {
  if (index >= size()) {
    throw RangeError("configuration index " + std::to_string(index) +
                     " outside a space of size " + std::to_string(size()));
  }
  Bindings out;
  for (const auto& c : value_choices) {
    out.push_back({c.name, c.values[index % c.values.size()]});
    index /= c.values.size();
  }
  for (const auto& c : layer_choices) {
    out.push_back({c.name, c.kinds[index % c.kinds.size()]});
    index /= c.kinds.size();
  }
  return out;
}

SearchSpace value_choice_space() {
  return {{{"hidden", {16, 32, 64, 128}}}, {}};
}

SearchSpace layer_choice_space() {
  return {{}, {{"slot2", {models::SlotKind::Linear, models::SlotKind::Identity}}}};
}

std::vector<TrialConfig> sample_random(const SearchSpace& space,
                                       std::size_t budget, std::uint64_t seed,
                                       int max_epochs) {
  if (budget < 1) {
    throw ConfigError("search budget must be at least 1");
  }
  if (max_epochs < 1) {
    throw ConfigError("trials need at least one epoch");
  }
  const std::size_t n = space.size();
  const std::size_t take = std::min(budget, n);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: position i receives a uniform draw from the rest.
  std::vector<TrialConfig> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
    TrialConfig c;
    c.bindings = space.config_at(pool[i]);
    c.trial_index = static_cast<int>(i);
    c.max_epochs = max_epochs;
    c.seed = derive_seed(seed, i);
    out.push_back(std::move(c));
  }
  return out;
}

models::ModelSpec apply_bindings(models::ModelSpec base,
                                 const Bindings& bindings) {
  for (const auto& b : bindings) {
    if (b.name == "hidden") {
      const int* v = std::get_if<int>(&b.value);
      if (v == nullptr || *v < 1) {
        throw ConfigError("binding 'hidden' needs a positive integer");
      }
      base.hidden = *v;
    } else if (b.name == "slot2") {
      const auto* k = std::get_if<models::SlotKind>(&b.value);
      if (k == nullptr) {
        throw ConfigError("binding 'slot2' needs a layer kind");
      }
      base.slot2 = *k;
    } else {
      throw ConfigError("unknown choice slot '" + b.name + "'");
    }
  }
  return base;
}

TrialResult run_trial(const TrialConfig& config,
                      const hexdata::Dataset& train_ds,
                      const hexdata::Dataset& val_ds,
                      const trainer::TrainConfig& training,
                      const models::ModelSpec& base) {
  models::ModelSpec spec = apply_bindings(base, config.bindings);
  spec.arch = models::Arch::FullyConnected;
  auto model = models::build_fc(spec, derive_seed(config.seed, kInitStream));
  trainer::TrainConfig tc = training;
  tc.epochs = config.max_epochs;
  tc.seed = config.seed;

  TrialResult result;
  result.config = config;
  auto collect = [](const trainer::LossCurve& curve) {
    std::vector<double> out;
    for (const auto& r : curve.records) {
      out.push_back(r.val_mse);
    }
    return out;
  };
  try {
    const auto curve = trainer::train(model, train_ds, val_ds, tc);
    result.val_losses = collect(curve);
    result.final_val_loss = result.val_losses.back();
  } catch (const trainer::DivergedError& e) {
    result.status = TrialStatus::Diverged;
    result.val_losses = collect(e.partial());
    result.final_val_loss = result.val_losses.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : result.val_losses.back();
  }
  return result;
}

TrialConfig select_best(std::span<const TrialResult> trials) {
  const TrialResult* best = nullptr;
  for (const auto& t : trials) {
    if (t.status != TrialStatus::Completed) {
      continue;
    }
    if (best == nullptr || t.final_val_loss < best->final_val_loss ||
        (t.final_val_loss == best->final_val_loss &&
         t.config.trial_index < best->config.trial_index)) {
      best = &t;
    }
  }
  if (best == nullptr) {
    throw NoWinnerError("no completed trial among " +
                        std::to_string(trials.size()));
  }
  return best->config;
}

SearchOutcome run_search(const SearchSpace& space,
                         const hexdata::Dataset& train_ds,
                         const hexdata::Dataset& val_ds, const NasConfig& cfg) {
  const std::size_t budget = cfg.budget == 0 ? space.size() : cfg.budget;
  const auto configs = sample_random(space, budget, cfg.seed, cfg.max_epochs);

  std::vector<TrialResult> trials(configs.size());
  auto work = [&](std::size_t i) {
    trials[i] = run_trial(configs[i], train_ds, val_ds, cfg.training, cfg.base);
  };
  const unsigned threads = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1u, cfg.threads), configs.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      work(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          work(i);
        }
      });
    }
  }

  try {
    TrialConfig best = select_best(trials);
    return {std::move(best), std::move(trials)};
  } catch (const NoWinnerError& e) {
    throw SearchFailed(e.what(), std::move(trials));
  }
}

SearchOutcome value_choice_experiment(const hexdata::Dataset& train_ds,
                                      const hexdata::Dataset& val_ds,
                                      const NasConfig& cfg) {
  return run_search(value_choice_space(), train_ds, val_ds, cfg);
}

SearchOutcome layer_choice_experiment(const hexdata::Dataset& train_ds,
                                      const hexdata::Dataset& val_ds,
                                      const NasConfig& cfg) {
  return run_search(layer_choice_space(), train_ds, val_ds, cfg);
}

Comparison retrain_and_compare(const TrialConfig& best,
                               const models::ModelSpec& baseline,
                               const hexdata::Dataset& train_ds,
                               const hexdata::Dataset& test_ds, int epochs,
                               const trainer::TrainConfig& training) {
  auto run_arm = [&](const std::string& arm, const models::ModelSpec& spec,
                     std::uint64_t stream, trainer::LossCurve& curve) {
    try {
      trainer::TrainConfig tc = training;
      tc.epochs = epochs;
      tc.seed = derive_seed(training.seed, stream);
      auto model = models::build_model(spec, derive_seed(tc.seed, kInitStream));
      curve = trainer::train(model, train_ds, test_ds, tc);
      return trainer::evaluate(model, test_ds);
    } catch (const Error& e) {
      throw ArmError(arm, e.what());
    }
  };
  models::ModelSpec searched = apply_bindings(baseline, best.bindings);
  searched.arch = models::Arch::FullyConnected;

  Comparison c;
  c.nas_test_loss = run_arm("nas", searched, kNasArmStream, c.nas_curve);
  c.human_test_loss = run_arm("human", baseline, kHumanArmStream, c.human_curve);
  return c;
}

std::string serialize_trial_log(std::span<const TrialResult> trials) {
  std::string out = "trial_index,choice_bindings,epoch,val_loss\n";
  for (const auto& t : trials) {
    const std::string prefix = std::to_string(t.config.trial_index) + ',' +
                               format_bindings(t.config.bindings) + ',';
    for (std::size_t e = 0; e < t.val_losses.size(); ++e) {
      out += prefix + std::to_string(e + 1) + ',' +
             format_real(t.val_losses[e]) + '\n';
    }
  }
  return out;
}

std::string serialize_winner(const TrialResult& winner) {
  return "choice_bindings,final_val_loss\n" +
         format_bindings(winner.config.bindings) + ',' +
         format_real(winner.final_val_loss) + '\n';
}

Bindings parse_winner(std::string_view text) {
  const auto lines = data_lines(text);
  if (lines.size() < 2 || lines[0] != "choice_bindings,final_val_loss") {
    throw ParseError("expected a winner summary with one data row", 1);
  }
  const auto fields = split(lines[1], ',');
  if (fields.size() != 2) {
    throw ParseError("expected 2 fields", 2);
  }
  return parse_bindings(fields[0]);
}

std::string serialize_comparison(const Comparison& c) {
  return "arm,test_loss\nnas," + format_real(c.nas_test_loss) + "\nhuman," +
         format_real(c.human_test_loss) + '\n';
}

}  // namespace hexnas::nas
