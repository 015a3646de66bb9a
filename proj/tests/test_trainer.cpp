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

#include "doctest.h"
#include "hexnas/hexdata.hpp"
#include "hexnas/models.hpp"
#include "hexnas/trainer.hpp"

using namespace hexnas;
using namespace hexnas::trainer;
using hexdata::Operation;

namespace {

TrainConfig quick(int epochs, std::uint64_t seed = 1) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

GridConfig tiny_grid() {
  GridConfig g;
  g.train.epochs = 2;
  g.train.seed = 3;
  g.train_count = 300;
  g.test_count = 100;
  g.hidden = 8;
  g.data_seed = 4;
  g.threads = 1;
  return g;
}

}  // namespace

TEST_CASE("one record per epoch, numbered from 1") {
  const auto tr = hexdata::generate_dataset(Operation::Add, 4, 200, 1);
  const auto va = hexdata::generate_dataset(Operation::Add, 4, 50, 2);
  auto m = models::build_model({}, 1);
  std::vector<int> seen;
  const auto curve = train(m, tr, va, quick(3),
                           [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  REQUIRE(curve.records.size() == 3);
  CHECK(curve.records[2].epoch == 3);
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(curve.records.back().val_mse == doctest::Approx(evaluate(m, va)).epsilon(1e-15));
}

TEST_CASE("training is bitwise reproducible") {
  const auto tr = hexdata::generate_dataset(Operation::Mul, 3, 300, 5);
  const auto va = hexdata::generate_dataset(Operation::Mul, 3, 60, 6);
  for (const auto arch : {models::Arch::FullyConnected, models::Arch::Lstm,
                          models::Arch::SelfAttention}) {
    auto a = models::build_model({arch, 6, models::SlotKind::Linear}, 2);
    auto b = models::build_model({arch, 6, models::SlotKind::Linear}, 2);
    const auto ca = train(a, tr, va, quick(2, 9));
    const auto cb = train(b, tr, va, quick(2, 9));
    CHECK(ca == cb);
    const auto pa = a.named_parameters();
    const auto pb = b.named_parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].tensor == pb[i].tensor);
    }
  }
}

TEST_CASE("a different seed changes the shuffle") {
  const auto tr = hexdata::generate_dataset(Operation::Add, 4, 300, 5);
  const auto va = hexdata::generate_dataset(Operation::Add, 4, 60, 6);
  auto a = models::build_model({}, 2);
  auto b = models::build_model({}, 2);
  CHECK_FALSE(train(a, tr, va, quick(1, 1)) == train(b, tr, va, quick(1, 2)));
}

TEST_CASE("loss falls on a learnable task") {
  const auto tr = hexdata::generate_dataset(Operation::Add, 2, 2000, 7);
  const auto va = hexdata::generate_dataset(Operation::Add, 2, 200, 8);
  auto m = models::build_model({}, 3);
  const auto curve = train(m, tr, va, quick(8));
  CHECK(curve.records.back().train_mse < 0.2 * curve.records.front().train_mse);
  CHECK(curve.records.back().val_mse < curve.records.front().val_mse);
}

TEST_CASE("NaN targets raise DivergedError with the completed records") {
  auto tr = hexdata::generate_dataset(Operation::Add, 4, 100, 1);
  const auto va = hexdata::generate_dataset(Operation::Add, 4, 20, 2);
  tr.samples[0].target_norm = std::numeric_limits<double>::quiet_NaN();
  auto m = models::build_model({}, 1);
  TrainConfig c = quick(2);
  c.shuffle = false;
  try {
    train(m, tr, va, c);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.epoch() == 1);
    CHECK(e.batch() == 0);
    CHECK(e.partial().records.empty());
  }
}

TEST_CASE("bad training configuration") {
  const auto ds = hexdata::generate_dataset(Operation::Add, 4, 10, 1);
  auto m = models::build_model({}, 1);
  TrainConfig c = quick(1);
  c.batch_size = 0;
  CHECK_THROWS_AS(train(m, ds, ds, c), ConfigError);
  c = quick(0);
  CHECK_THROWS_AS(train(m, ds, ds, c), ConfigError);
  CHECK_THROWS_AS(evaluate(m, hexdata::Dataset{}), ConfigError);
}

TEST_CASE("extrapolation test data must be full range") {
  const auto m = models::build_model({}, 1);
  CHECK_THROWS_AS(
      extrapolation_eval(m, hexdata::generate_dataset(Operation::Add, 2, 10, 1)),
      ConfigError);
  const auto full = hexdata::generate_dataset(Operation::Add, 4, 10, 1);
  CHECK(extrapolation_eval(m, full) == evaluate(m, full));
}

TEST_CASE("loss curve CSV round trip is exact") {
  LossCurve c;
  c.records = {{1, 0.1, 1.0 / 3.0}, {2, 5.605e-7, 0.29370000000000002}};
  const std::string text = serialize_loss_curve(c);
  CHECK(text.starts_with("epoch,train_mse,val_mse\n1,0.1,"));
  CHECK(parse_loss_curve(text) == c);
  CHECK_THROWS_AS(parse_loss_curve("epoch,train_mse,val_mse\n1,x,2\n"), ParseError);
}

TEST_CASE("grid data shares one full-range test set") {
  const GridConfig g = tiny_grid();
  const auto d4 = grid_data(Operation::Add, 4, g);
  const auto d2 = grid_data(Operation::Add, 2, g);
  CHECK(d4.train.count() == 300);
  CHECK(d4.test.count() == 100);
  CHECK(d2.train.value_width == 2);
  CHECK(d2.test.value_width == 4);
  CHECK(d2.test == d4.test);
  CHECK(d4.test == d4.val);
}

TEST_CASE("grid rows in canonical order, identical serial and parallel") {
  const std::vector<models::Arch> archs = {models::Arch::Lstm,
                                           models::Arch::FullyConnected,
                                           models::Arch::SelfAttention};
  const std::vector<int> widths = {2, 4};
  GridConfig g = tiny_grid();
  g.train.epochs = 1;
  const auto serial = run_grid(archs, widths, Operation::Add, g);
  g.threads = 3;
  const auto parallel = run_grid(archs, widths, Operation::Add, g);
  CHECK(serial == parallel);
  std::vector<std::pair<std::string, int>> order;
  for (const auto& r : serial.rows) {
    CHECK_FALSE(r.error.has_value());
    order.emplace_back(r.arch, r.width);
  }
  CHECK(order == std::vector<std::pair<std::string, int>>{
                     {"fc", 4}, {"fc", 2}, {"attn", 4}, {"attn", 2},
                     {"lstm", 4}, {"lstm", 2}});
  CHECK(parse_report(serialize_report(serial)) == serial);
  const std::string table = render_table(serial);
  CHECK(table.find("Fully Connected, 4 Digits") != std::string::npos);
  CHECK(table.find("LSTM, 2 Digits") != std::string::npos);
}

TEST_CASE("a failing cell is reported, not thrown") {
  GridConfig g = tiny_grid();
  g.train.lr = -1.0;
  const std::vector<models::Arch> archs = {models::Arch::FullyConnected};
  const std::vector<int> widths = {4};
  const auto rep = run_grid(archs, widths, Operation::Add, g);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].error.has_value());
  const std::string csv = serialize_report(rep);
  CHECK(csv.find("fc,4,error,error") != std::string::npos);
  CHECK(parse_report(csv).rows[0].error.has_value());
}
