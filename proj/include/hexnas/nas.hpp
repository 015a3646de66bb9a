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

// Random-strategy architecture search over the fully connected family.
//
// A search space is a product of named choice slots. A value choice binds an
// integer (the hidden width), a layer choice binds a layer kind (the middle
// slot). Configurations are drawn uniformly without replacement, each is
// trained for a short fixed budget, and the lowest final validation loss
// wins.

#ifndef HEXNAS_NAS_HPP_
#define HEXNAS_NAS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hexnas/errors.hpp"
#include "hexnas/hexdata.hpp"
#include "hexnas/models.hpp"
#include "hexnas/trainer.hpp"

namespace hexnas::nas {

inline constexpr int kTrialEpochs = 5;

struct ValueChoice {
  std::string name;
  std::vector<int> values;
};

struct LayerChoice {
  std::string name;
  std::vector<models::SlotKind> kinds;
};

struct Binding {
  std::string name;
  std::variant<int, models::SlotKind> value;

  friend bool operator==(const Binding&, const Binding&) = default;
};

using Bindings = std::vector<Binding>;

// "hidden=32", "slot2=identity"; several bindings joined with ';'.
std::string format_bindings(const Bindings& bindings);
Bindings parse_bindings(std::string_view text);

struct SearchSpace {
  std::vector<ValueChoice> value_choices;
  std::vector<LayerChoice> layer_choices;

  // Product of the slot sizes. Throws ConfigError if a slot is empty or
  // there are no slots.
  std::size_t size() const;
  // Mixed-radix decoding of index in [0, size()); value slots first.
  Bindings config_at(std::size_t index) const;
};

// hidden in {16, 32, 64, 128}.
SearchSpace value_choice_space();
// slot2 in {linear, identity}.
SearchSpace layer_choice_space();

struct TrialConfig {
  Bindings bindings;
  int trial_index = 0;
  int max_epochs = kTrialEpochs;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

enum class TrialStatus { Completed, Diverged };

struct TrialResult {
  TrialConfig config;
  std::vector<double> val_losses;  // one per finished epoch
  double final_val_loss = 0.0;
  TrialStatus status = TrialStatus::Completed;
};

// Draws min(budget, space.size()) distinct configurations uniformly without
// replacement. Trial i gets seed derive_seed(seed, i).
std::vector<TrialConfig> sample_random(const SearchSpace& space,
                                       std::size_t budget, std::uint64_t seed,
                                       int max_epochs = kTrialEpochs);

// Applies "hidden" and "slot2" bindings. Throws ConfigError on unknown
// names or mistyped values.
models::ModelSpec apply_bindings(models::ModelSpec base,
                                 const Bindings& bindings);

// Builds the configured fully connected model and trains it for
// config.max_epochs epochs. Divergence is recorded, not thrown.
// `training` supplies batch size and learning rate.
TrialResult run_trial(const TrialConfig& config,
                      const hexdata::Dataset& train_ds,
                      const hexdata::Dataset& val_ds,
                      const trainer::TrainConfig& training = {},
                      const models::ModelSpec& base = {});

class NoWinnerError : public Error {
 public:
  using Error::Error;
};

// Completed trial with the lowest final_val_loss; ties go to the lowest
// trial_index. Throws NoWinnerError if no trial completed.
TrialConfig select_best(std::span<const TrialResult> trials);

struct NasConfig {
  std::size_t budget = 0;  // 0 means the full space size
  std::uint64_t seed = 0;
  int max_epochs = kTrialEpochs;
  trainer::TrainConfig training;
  models::ModelSpec base;
  unsigned threads = 1;
};

struct SearchOutcome {
  TrialConfig best;
  std::vector<TrialResult> trials;  // ordered by trial_index
};

// Samples, runs every trial and selects the winner. Throws NoWinnerError
// when every trial diverged; `trials` is still reachable through
// SearchFailed.
SearchOutcome run_search(const SearchSpace& space,
                         const hexdata::Dataset& train_ds,
                         const hexdata::Dataset& val_ds, const NasConfig& cfg);

class SearchFailed : public NoWinnerError {
 public:
  SearchFailed(std::string what, std::vector<TrialResult> trials)
      : NoWinnerError(std::move(what)), trials_(std::move(trials)) {}
  const std::vector<TrialResult>& trials() const { return trials_; }

 private:
  std::vector<TrialResult> trials_;
};

SearchOutcome value_choice_experiment(const hexdata::Dataset& train_ds,
                                      const hexdata::Dataset& val_ds,
                                      const NasConfig& cfg);
SearchOutcome layer_choice_experiment(const hexdata::Dataset& train_ds,
                                      const hexdata::Dataset& val_ds,
                                      const NasConfig& cfg);

struct Comparison {
  double nas_test_loss = 0.0;
  double human_test_loss = 0.0;
  trainer::LossCurve nas_curve;
  trainer::LossCurve human_curve;
};

// A failure inside one arm of retrain_and_compare.
class ArmError : public Error {
 public:
  ArmError(std::string arm, const std::string& what)
      : Error(arm + " arm: " + what), arm_(std::move(arm)) {}
  const std::string& arm() const { return arm_; }

 private:
  std::string arm_;
};

// Trains the searched configuration and the baseline from fresh seeds for
// `epochs` epochs each and evaluates both on `test_ds`. The test set also
// serves as the per-epoch validation set of both curves.
Comparison retrain_and_compare(const TrialConfig& best,
                               const models::ModelSpec& baseline,
                               const hexdata::Dataset& train_ds,
                               const hexdata::Dataset& test_ds,
                               int epochs = trainer::kLongEpochs,
                               const trainer::TrainConfig& training = {});

// trial_index,choice_bindings,epoch,val_loss
std::string serialize_trial_log(std::span<const TrialResult> trials);
// choice_bindings,final_val_loss
std::string serialize_winner(const TrialResult& winner);
// Returns the bindings of the first data row.
Bindings parse_winner(std::string_view text);
// arm,test_loss
std::string serialize_comparison(const Comparison& c);

}  // namespace hexnas::nas

#endif  // HEXNAS_NAS_HPP_
