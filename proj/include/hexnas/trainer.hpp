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

#ifndef HEXNAS_TRAINER_HPP_
#define HEXNAS_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexnas/errors.hpp"
#include "hexnas/hexdata.hpp"
#include "hexnas/models.hpp"

namespace hexnas::trainer {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

inline constexpr int kLongEpochs = 200;
inline constexpr int kShortEpochs = 25;

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct LossCurve {
  std::vector<EpochRecord> records;

  friend bool operator==(const LossCurve&, const LossCurve&) = default;
};

// Training produced a NaN or infinite loss. Carries the records completed
// before the failure.
class DivergedError : public Error {
 public:
  DivergedError(int epoch, std::size_t batch, LossCurve partial);

  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  const LossCurve& partial() const { return partial_; }

 private:
  int epoch_;
  std::size_t batch_;
  LossCurve partial_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on MSE against target_norm. Each epoch reshuffles with a
// stream derived from cfg.seed, then records the epoch-mean training MSE and
// the full-pass validation MSE. Throws DivergedError, ConfigError.
LossCurve train(models::Model& model, const hexdata::Dataset& train_ds,
                const hexdata::Dataset& val_ds, const TrainConfig& cfg,
                const EpochCallback& on_epoch = {});

// MSE of predictions against target_norm. Throws ConfigError when empty.
double evaluate(const models::Model& model, const hexdata::Dataset& ds);

// Test MSE of a model on full-range (width 4) data. Throws ConfigError when
// the test set is not full-range.
double extrapolation_eval(const models::Model& model,
                          const hexdata::Dataset& test_ds);

std::string serialize_loss_curve(const LossCurve& curve);
LossCurve parse_loss_curve(std::string_view text);
void write_loss_curve(const LossCurve& curve, const std::filesystem::path& path);

// ----------------------------------------------------------------- grid --

struct GridConfig {
  TrainConfig train;
  std::size_t train_count = hexdata::kDeskCount;
  std::size_t test_count = 2'500;
  int hidden = models::kDefaultHidden;
  std::uint64_t data_seed = 0;
  // 0 picks the HEXNAS_THREADS environment variable, else hardware threads.
  unsigned threads = 0;
};

struct ReportRow {
  std::string arch;  // "fc", "attn", "lstm", or a comparison arm
  int width = 0;
  double train_loss_final = 0.0;
  double test_loss = 0.0;
  std::optional<std::string> error;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  friend bool operator==(const ExperimentReport&,
                         const ExperimentReport&) = default;
};

// Canonical row order: fc, attn, lstm; widths descending.
int arch_rank(models::Arch arch);

// One fresh model per (arch, width). Each trains on width-w data and is
// tested on the same full-range (width 4) held-out set. Cell i trains with
// seed cfg.train.seed ^ i, so parallel and serial runs match. A failing cell
// is reported with its error instead of aborting the grid.
ExperimentReport run_grid(std::span<const models::Arch> archs,
                          std::span<const int> widths, hexdata::Operation op,
                          const GridConfig& cfg);

// Data used by a grid cell: train/validation split at width w and the shared
// full-range test split.
struct GridData {
  hexdata::Dataset train;
  hexdata::Dataset val;
  hexdata::Dataset test;
};
GridData grid_data(hexdata::Operation op, int width, const GridConfig& cfg);

std::string serialize_report(const ExperimentReport& report);
ExperimentReport parse_report(std::string_view text);
std::string render_table(const ExperimentReport& report);

// Worker count from HEXNAS_THREADS, falling back to hardware concurrency.
unsigned default_threads();

}  // namespace hexnas::trainer

#endif  // HEXNAS_TRAINER_HPP_
