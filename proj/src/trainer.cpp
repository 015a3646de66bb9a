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

#include "hexnas/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "hexnas/numcore/adam.hpp"
#include "hexnas/random.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::trainer {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kInitStream = 0x494E;
constexpr std::size_t kEvalChunk = 1024;
constexpr std::string_view kCurveHeader = "epoch,train_mse,val_mse";
constexpr std::string_view kReportHeader = "arch,width,train_loss_final,test_loss";

void flatten(const hexdata::Dataset& ds, std::vector<std::uint8_t>& tokens,
             std::vector<double>& targets) {
  tokens.resize(ds.count() * models::kInputTokens);
  targets.resize(ds.count());
  for (std::size_t i = 0; i < ds.count(); ++i) {
    const auto t = hexdata::tokens_of(ds.samples[i]);
    std::copy(t.begin(), t.end(),
              tokens.begin() + static_cast<std::ptrdiff_t>(i * t.size()));
    targets[i] = ds.samples[i].target_norm;
  }
}

std::string arch_label(std::string_view arch) {
  if (arch == "fc") return "Fully Connected";
  if (arch == "attn") return "Self-Attention";
  if (arch == "lstm") return "LSTM";
  if (arch == "nas") return "NAS";
  if (arch == "human") return "Human";
  return std::string(arch);
}

}  // namespace

DivergedError::DivergedError(int epoch, std::size_t batch, LossCurve partial)
    : Error("training diverged at epoch " + std::to_string(epoch) +
            ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch),
      partial_(std::move(partial)) {}

LossCurve train(models::Model& model, const hexdata::Dataset& train_ds,
                const hexdata::Dataset& val_ds, const TrainConfig& cfg,
                const EpochCallback& on_epoch) {
  if (cfg.epochs < 1 || cfg.batch_size < 1) {
    throw ConfigError("training needs epochs >= 1 and batch_size >= 1");
  }
  if (!(cfg.lr > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (train_ds.count() == 0 || val_ds.count() == 0) {
    throw ConfigError("training and validation datasets must be nonempty");
  }

  std::vector<std::uint8_t> all_tokens;
  std::vector<double> all_targets;
  flatten(train_ds, all_tokens, all_targets);

  auto params = model.parameters();
  numcore::Adam<double> adam(params, numcore::AdamHyper{.lr = cfg.lr});
  Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));

  const std::size_t n = train_ds.count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::uint8_t> tokens;
  std::vector<double> targets;
  tokens.reserve(cfg.batch_size * models::kInputTokens);
  targets.reserve(cfg.batch_size);

  LossCurve curve;
  curve.records.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      shuffle_rng.shuffle(std::span(order));
    }
    double sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      tokens.clear();
      targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t s = order[i];
        const auto* t = all_tokens.data() + s * models::kInputTokens;
        tokens.insert(tokens.end(), t, t + models::kInputTokens);
        targets.push_back(all_targets[s]);
      }
      const double loss = model.loss_and_grad(tokens, targets);
      if (!std::isfinite(loss)) {
        throw DivergedError(epoch, batch_index, curve);
      }
      adam.step(params);
      sum += loss * static_cast<double>(end - start);
    }
    EpochRecord rec{epoch, sum / static_cast<double>(n), evaluate(model, val_ds)};
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.val_mse)) {
      throw DivergedError(epoch, batch_index, curve);
    }
    curve.records.push_back(rec);
    if (on_epoch) {
      on_epoch(rec);
    }
  }
  return curve;
}

double evaluate(const models::Model& model, const hexdata::Dataset& ds) {
  if (ds.count() == 0) {
    throw ConfigError("cannot evaluate on an empty dataset");
  }
  double sum = 0.0;
  const std::span<const hexdata::Sample> all(ds.samples);
  for (std::size_t start = 0; start < ds.count(); start += kEvalChunk) {
    const auto chunk = all.subspan(start, std::min(kEvalChunk, ds.count() - start));
    const auto pred = model.forward(chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const double e = pred[i] - chunk[i].target_norm;
      sum += e * e;
    }
  }
  return sum / static_cast<double>(ds.count());
}

double extrapolation_eval(const models::Model& model,
                          const hexdata::Dataset& test_ds) {
  if (test_ds.value_width != hexdata::kCanonicalWidth) {
    throw ConfigError("extrapolation test data must span the full " +
                      std::to_string(hexdata::kCanonicalWidth) +
                      "-digit range, got width " +
                      std::to_string(test_ds.value_width));
  }
  return evaluate(model, test_ds);
}

// ----------------------------------------------------------- curve csv --

std::string serialize_loss_curve(const LossCurve& curve) {
  std::string out(kCurveHeader);
  out += '\n';
  for (const auto& r : curve.records) {
    out += std::to_string(r.epoch) + ',' + format_real(r.train_mse) + ',' +
           format_real(r.val_mse) + '\n';
  }
  return out;
}

LossCurve parse_loss_curve(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  if (lines.empty() || lines.front() != kCurveHeader) {
    throw ParseError("expected header '" + std::string(kCurveHeader) + "'", 1);
  }
  LossCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    const auto epoch = f.size() == 3 ? parse_real(f[0]) : std::nullopt;
    const auto tr = f.size() == 3 ? parse_real(f[1]) : std::nullopt;
    const auto va = f.size() == 3 ? parse_real(f[2]) : std::nullopt;
    if (!epoch || !tr || !va) {
      throw ParseError("malformed loss-curve row", i + 1);
    }
    curve.records.push_back({static_cast<int>(*epoch), *tr, *va});
  }
  return curve;
}

void write_loss_curve(const LossCurve& curve,
                      const std::filesystem::path& path) {
  write_file_atomic(path, serialize_loss_curve(curve));
}

// ----------------------------------------------------------------- grid --

int arch_rank(models::Arch arch) {
  switch (arch) {
    case models::Arch::FullyConnected:
      return 0;
    case models::Arch::SelfAttention:
      return 1;
    case models::Arch::Lstm:
      return 2;
  }
  return 3;
}

unsigned default_threads() {
  if (const char* env = std::getenv("HEXNAS_THREADS")) {
    const auto v = parse_real(env);
    if (v && *v >= 1) {
      return static_cast<unsigned>(*v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

GridData grid_data(hexdata::Operation op, int width, const GridConfig& cfg) {
  const std::size_t total = cfg.train_count + cfg.test_count;
  const double fraction =
      static_cast<double>(cfg.train_count) / static_cast<double>(total);
  auto split_at = [&](int w) {
    const auto full = hexdata::generate_dataset(
        op, w, total, derive_seed(cfg.data_seed, static_cast<std::uint64_t>(w)));
    return hexdata::split_dataset(full, fraction,
                                  derive_seed(cfg.data_seed, 0x5B17));
  };
  auto [train, val] = split_at(width);
  GridData out{std::move(train), std::move(val), {}};
  out.test = width == hexdata::kCanonicalWidth
                 ? out.val
                 : split_at(hexdata::kCanonicalWidth).second;
  return out;
}

ExperimentReport run_grid(std::span<const models::Arch> archs,
                          std::span<const int> widths, hexdata::Operation op,
                          const GridConfig& cfg) {
  if (archs.empty() || widths.empty()) {
    throw ConfigError("grid needs at least one architecture and one width");
  }
  for (const int w : widths) {
    hexdata::check_value_width(w);
  }
  struct Cell {
    models::Arch arch;
    int width;
  };
  std::vector<Cell> cells;
  for (const auto a : archs) {
    for (const int w : widths) {
      cells.push_back({a, w});
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    if (arch_rank(x.arch) != arch_rank(y.arch)) {
      return arch_rank(x.arch) < arch_rank(y.arch);
    }
    return x.width > y.width;
  });

  ExperimentReport report;
  report.rows.resize(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell& c = cells[i];
    ReportRow& row = report.rows[i];
    row.arch = std::string(models::to_string(c.arch));
    row.width = c.width;
    try {
      const GridData data = grid_data(op, c.width, cfg);
      TrainConfig tc = cfg.train;
      tc.seed = cfg.train.seed ^ static_cast<std::uint64_t>(i);
      models::ModelSpec spec{c.arch, cfg.hidden, models::SlotKind::Linear};
      auto model = models::build_model(spec, derive_seed(tc.seed, kInitStream));
      const LossCurve curve = train(model, data.train, data.val, tc);
      row.train_loss_final = curve.records.back().train_mse;
      row.test_loss = extrapolation_eval(model, data.test);
    } catch (const Error& e) {
      row.error = "cell " + row.arch + "/" + std::to_string(c.width) + ": " +
                  e.what();
    }
  };

  const unsigned threads =
      std::min<std::size_t>(cfg.threads > 0 ? cfg.threads : default_threads(),
                            cells.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      run_cell(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
          run_cell(i);
        }
      });
    }
  }
  return report;
}

std::string serialize_report(const ExperimentReport& report) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : report.rows) {
    out += r.arch + ',' + std::to_string(r.width) + ',';
    if (r.error) {
      out += "error,error\n";
    } else {
      out += format_real(r.train_loss_final) + ',' + format_real(r.test_loss) +
             '\n';
    }
  }
  return out;
}

ExperimentReport parse_report(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  if (lines.empty() || lines.front() != kReportHeader) {
    throw ParseError("expected header '" + std::string(kReportHeader) + "'", 1);
  }
  ExperimentReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 4) {
      throw ParseError("expected 4 fields", i + 1);
    }
    ReportRow row;
    row.arch = std::string(f[0]);
    const auto width = parse_real(f[1]);
    if (!width) {
      throw ParseError("malformed width", i + 1);
    }
    row.width = static_cast<int>(*width);
    if (f[2] == "error" || f[3] == "error") {
      row.error = "error";
    } else {
      const auto tr = parse_real(f[2]);
      const auto te = parse_real(f[3]);
      if (!tr || !te) {
        throw ParseError("malformed loss value", i + 1);
      }
      row.train_loss_final = *tr;
      row.test_loss = *te;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string render_table(const ExperimentReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %-24s %-24s\n", "Model",
                "Final train loss", "Test loss");
  out << line << std::string(78, '-') << '\n';
  for (const auto& r : report.rows) {
    const std::string name =
        arch_label(r.arch) + ", " + std::to_string(r.width) + " Digits";
    if (r.error) {
      std::snprintf(line, sizeof line, "%-28s %-24s %-24s\n", name.c_str(),
                    "error", "error");
    } else {
      std::snprintf(line, sizeof line, "%-28s %-24s %-24s\n", name.c_str(),
                    format_real(r.train_loss_final).c_str(),
                    format_real(r.test_loss).c_str());
    }
    out << line;
  }
  return out.str();
}

}  // namespace hexnas::trainer
