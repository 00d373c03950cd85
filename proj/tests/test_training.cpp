#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <ftsweep/loss.hpp>
#include <ftsweep/metrics.hpp>
#include <ftsweep/registry.hpp>
#include <ftsweep/rng.hpp>
#include <ftsweep/split.hpp>
#include <ftsweep/store.hpp>
#include <ftsweep/sweep.hpp>
#include <ftsweep/synthetic.hpp>
#include <ftsweep/trainer.hpp>

#include "testutil.hpp"

using namespace ftsweep;
using testutil::TempDir;

namespace {

/// Small manifest-backed architecture so sweep tests stay millisecond-fast.
void ensure_toy_registered() {
  static const bool once = [] {
    ArchDescriptor desc;
    desc.name = "toy";
    desc.input_size = 8;
    desc.feature_dim = 4;
    desc.backbone_layers = 6;
    desc.backbone_params = 300;
    desc.depth_schedule = {0, 1, 2, 3};
    auto factory = [](const LoadOptions& opt) -> std::unique_ptr<Model> {
      ModelIR ir;
      ir.architecture = "toy";
      ir.input_size = 8;
      ir.feature_dim = 4;
      ir.num_classes = opt.num_classes;
      const std::size_t params[6] = {100, 0, 40, 60, 20, 80};
      for (std::size_t i = 0; i < 6; ++i) {
        LayerSpec l;
        l.index = i;
        l.name = "layer" + std::to_string(i);
        l.kind = i == 1 ? "relu" : "conv2d";
        l.param_count = params[i];
        l.trainable_param_count = params[i];
        l.trainable = false;
        ir.backbone.push_back(std::move(l));
      }
      ir.head.index = 6;
      ir.head.name = "predictions";
      ir.head.kind = "dense";
      ir.head.param_count = 4 * opt.num_classes + opt.num_classes;
      ir.head.trainable_param_count = ir.head.param_count;
      ir.head.trainable = true;
      return std::make_unique<ManifestModel>(std::move(ir), opt.seed);
    };
    BackboneRegistry::instance().register_architecture(std::move(desc), std::move(factory));
    return true;
  }();
  (void)once;
}

/// Delegates to the mock trainer except at one depth, which always throws.
class FailingTrainer : public Trainer {
 public:
  explicit FailingTrainer(std::size_t fail_depth) : fail_depth_(fail_depth) {}
  std::string kind() const override { return inner_.kind(); }
  TrainOutcome train(Model& model, const Dataset& train_set, const Dataset& val_set,
                     const TrainConfig& cfg) override {
    if (model.trainable_layer_count() == fail_depth_) {
      throw NonFiniteLossError("loss diverged at depth " + std::to_string(fail_depth_));
    }
    return inner_.train(model, train_set, val_set, cfg);
  }

 private:
  MockTrainer inner_;
  std::size_t fail_depth_;
};

Dataset tiny_train_set() {
  SyntheticSpec spec;
  spec.image_size = 8;
  spec.counts = {4, 2, 2};
  spec.seed = 3;
  return make_synthetic_dataset(spec);
}

Dataset tiny_val_set() {
  SyntheticSpec spec;
  spec.image_size = 8;
  spec.counts = {2, 1, 1};
  spec.seed = 4;
  return make_synthetic_dataset(spec);
}

long double oracle_weighted_ce(const std::vector<double>& probs,
                               const std::vector<ObjectClass>& labels,
                               const std::array<double, 3>& weights) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    long double p = static_cast<long double>(probs[i * 3 + y]);
    p = std::min(1.0L, std::max((long double)1e-7, p));
    total += static_cast<long double>(weights[y]) * -std::log(p);
  }
  return total / static_cast<long double>(labels.size());
}

}  // namespace

TEST_CASE("cross entropy of a single row is the negative log probability", "[loss]") {
  const std::vector<double> probs{0.1, 0.8, 0.1};
  const std::vector<ObjectClass> labels{ObjectClass::kQso};
  const double loss = weighted_cross_entropy<double>(probs, labels, WeightMap{});
  CHECK(loss == Catch::Approx(0.2231435513).margin(1e-5));
  CHECK(loss == Catch::Approx(-std::log(0.8)).epsilon(1e-12));
}

TEST_CASE("cross entropy applies class weights to the batch mean", "[loss]") {
  const std::vector<double> probs{0.7, 0.2, 0.1, 0.1, 0.6, 0.3};
  const std::vector<ObjectClass> labels{ObjectClass::kGalaxy, ObjectClass::kQso};
  WeightMap w;
  w.weights = {2.0, 1.0, 1.0};
  const double loss = weighted_cross_entropy<double>(probs, labels, w);
  const double expected = (2.0 * -std::log(0.7) + 1.0 * -std::log(0.6)) / 2.0;
  CHECK(loss == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cross entropy clips probabilities at 1e-7", "[loss]") {
  const std::vector<double> zero{1.0, 0.0, 0.0};
  const std::vector<ObjectClass> qso{ObjectClass::kQso};
  const double clipped = weighted_cross_entropy<double>(zero, qso, WeightMap{});
  CHECK(clipped == Catch::Approx(-std::log(1e-7)).epsilon(1e-12));

  const std::vector<ObjectClass> galaxy{ObjectClass::kGalaxy};
  CHECK(weighted_cross_entropy<double>(zero, galaxy, WeightMap{}) == 0.0);
}

TEST_CASE("cross entropy validates its inputs", "[loss]") {
  const std::vector<ObjectClass> labels{ObjectClass::kGalaxy};
  const std::vector<double> short_probs{0.5, 0.5};
  REQUIRE_THROWS_AS(weighted_cross_entropy<double>(short_probs, labels, WeightMap{}),
                    ShapeMismatchError);

  const std::vector<double> not_dist{0.5, 0.3, 0.1};
  REQUIRE_THROWS_AS(weighted_cross_entropy<double>(not_dist, labels, WeightMap{}),
                    InvalidDistributionError);

  const std::vector<double> empty;
  const std::vector<ObjectClass> none;
  REQUIRE_THROWS_AS(weighted_cross_entropy<double>(empty, none, WeightMap{}), EmptyDatasetError);
}

TEST_CASE("cross entropy agrees with an extended-precision reference", "[loss][property]") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.uniform_index(32);
    std::vector<double> probs(rows * 3);
    std::vector<ObjectClass> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        probs[i * 3 + c] = 1e-9 + rng.uniform();
        sum += probs[i * 3 + c];
      }
      for (std::size_t c = 0; c < 3; ++c) probs[i * 3 + c] /= sum;
      labels[i] = static_cast<ObjectClass>(rng.uniform_index(3));
    }
    WeightMap w;
    w.weights = {0.5 + rng.uniform(), 0.5 + 5.0 * rng.uniform(), 0.5 + rng.uniform()};

    const double got = weighted_cross_entropy<double>(probs, labels, w);
    const long double want = oracle_weighted_ce(probs, labels, w.weights);
    REQUIRE(std::abs(got - static_cast<double>(want)) <=
            1e-12 * std::max(1.0, std::abs(static_cast<double>(want))));
  }
}

TEST_CASE("loss gradient matches finite differences through softmax", "[loss][gradcheck]") {
  Rng rng(66);
  const std::size_t rows = 4;
  std::vector<double> logits(rows * 3);
  for (auto& v : logits) v = rng.uniform() * 4.0 - 2.0;
  std::vector<ObjectClass> labels(rows);
  for (auto& l : labels) l = static_cast<ObjectClass>(rng.uniform_index(3));
  WeightMap w;
  w.weights = {0.76, 5.38, 0.67};

  auto loss_of = [&](const std::vector<double>& z) {
    nn::Tensor4<double> t(rows, 1, 1, 3);
    t.data = z;
    const auto probs = nn::softmax(t);
    return weighted_cross_entropy<double>(std::span<const double>(probs.data), labels, w);
  };

  nn::Tensor4<double> t(rows, 1, 1, 3);
  t.data = logits;
  const auto probs = nn::softmax(t);
  std::vector<double> grad(rows * 3);
  weighted_cross_entropy_grad<double>(std::span<const double>(probs.data), labels, w,
                                      std::span<double>(grad));

  const double h = 1e-6;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    auto up = logits, down = logits;
    up[k] += h;
    down[k] -= h;
    const double numeric = (loss_of(up) - loss_of(down)) / (2.0 * h);
    REQUIRE(grad[k] == Catch::Approx(numeric).margin(1e-7));
  }
}

TEST_CASE("confusion accounting matches a direct recount", "[metrics][property]") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(200);
    std::vector<ObjectClass> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<ObjectClass>(rng.uniform_index(3));
      pred[i] = static_cast<ObjectClass>(rng.uniform_index(3));
    }
    const Confusion m = make_confusion(truth, pred);
    REQUIRE(confusion_total(m) == n);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i] ? 1 : 0;
    REQUIRE(accuracy(m) == Catch::Approx(static_cast<double>(correct) / n).epsilon(1e-12));

    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool t = static_cast<std::size_t>(truth[i]) == c;
        const bool p = static_cast<std::size_t>(pred[i]) == c;
        tp += (t && p) ? 1 : 0;
        fp += (!t && p) ? 1 : 0;
        fn += (t && !p) ? 1 : 0;
      }
      const ClassMetrics cm = class_metrics(m, c);
      const double want_p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
      const double want_r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
      REQUIRE(cm.precision == Catch::Approx(want_p).margin(1e-12));
      REQUIRE(cm.recall == Catch::Approx(want_r).margin(1e-12));
    }
  }
}

TEST_CASE("metrics handle perfect and degenerate predictors", "[metrics]") {
  Confusion perfect{};
  perfect[0][0] = 132;
  perfect[1][1] = 19;
  perfect[2][2] = 149;
  CHECK(accuracy(perfect) == 1.0);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto cm = class_metrics(perfect, c);
    CHECK(cm.precision == 1.0);
    CHECK(cm.recall == 1.0);
    CHECK(cm.f1 == 1.0);
  }
  CHECK(macro_metrics(perfect).f1 == 1.0);

  // Everything predicted as galaxy: precision/recall collapse for the rest.
  Confusion collapsed{};
  collapsed[0][0] = 132;
  collapsed[1][0] = 19;
  collapsed[2][0] = 149;
  CHECK(accuracy(collapsed) == Catch::Approx(132.0 / 300.0).epsilon(1e-12));
  CHECK(class_metrics(collapsed, 1).precision == 0.0);
  CHECK(class_metrics(collapsed, 1).recall == 0.0);
  CHECK(class_metrics(collapsed, 1).f1 == 0.0);
  CHECK(class_metrics(collapsed, 0).recall == 1.0);

  const Confusion empty{};
  REQUIRE_THROWS_AS(accuracy(empty), EmptyConfusionError);
  REQUIRE_THROWS_AS(class_metrics(empty, 0), EmptyConfusionError);

  const std::vector<ObjectClass> two{ObjectClass::kGalaxy, ObjectClass::kStar};
  const std::vector<ObjectClass> one{ObjectClass::kGalaxy};
  REQUIRE_THROWS_AS(make_confusion(two, one), ShapeMismatchError);
}

TEST_CASE("rng streams are deterministic and tag-separated", "[rng]") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  CHECK(a.next_u64() != c.next_u64());

  CHECK(mix_seed(42, "epoch:1") != mix_seed(42, "epoch:2"));
  CHECK(mix_seed(42, "x") != mix_seed(43, "x"));
  CHECK(mix_seed(42, "x") == mix_seed(42, "x"));

  std::vector<std::size_t> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  Rng d(7);
  d.shuffle(perm);
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("train config canonical form pins every field", "[trainer]") {
  TrainConfig cfg;
  CHECK(cfg.canonical() ==
        "optimizer=adam;lr=1e-04;epochs=30;batch=16;early_stop=0;patience=5;seed=42;"
        "weights=inverse_frequency");
  CHECK(cfg.hash().size() == 64);

  TrainConfig other = cfg;
  other.batch_size = 32;
  CHECK(other.hash() != cfg.hash());
  other = cfg;
  other.weight_scheme = WeightScheme::kNone;
  CHECK(other.hash() != cfg.hash());
}

TEST_CASE("mock trainer is deterministic and self-consistent", "[trainer][mock]") {
  ensure_toy_registered();
  auto& reg = BackboneRegistry::instance();
  TrainConfig cfg;
  cfg.epochs = 6;
  const auto val = tiny_val_set();

  MockTrainer mock;
  auto m1 = reg.load("toy", LoadOptions{});
  apply_freeze_plan(*m1, make_freeze_plan(m1->ir(), 2));
  const TrainOutcome a = mock.train(*m1, {}, val, cfg);

  auto m2 = reg.load("toy", LoadOptions{});
  apply_freeze_plan(*m2, make_freeze_plan(m2->ir(), 2));
  const TrainOutcome b = mock.train(*m2, {}, val, cfg);

  REQUIRE(a.history.size() == 6);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].val_accuracy == b.history[i].val_accuracy);
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
  }
  CHECK(a.confusion == b.confusion);
  CHECK(a.wall_seconds == 0.0);

  // The reported best is re-derived from the confusion, and the history
  // peak agrees with it.
  CHECK(a.best_val_accuracy == accuracy(a.confusion));
  double peak = 0.0;
  for (const auto& e : a.history) peak = std::max(peak, e.val_accuracy);
  CHECK(a.best_val_accuracy == Catch::Approx(peak).epsilon(1e-12));
  CHECK(confusion_total(a.confusion) == val.size());
}

TEST_CASE("mock trainer honors scripted accuracies", "[trainer][mock]") {
  ensure_toy_registered();
  MockTrainer mock;
  mock.script_final_accuracy("toy", {{2, 0.93}});

  auto model = BackboneRegistry::instance().load("toy", LoadOptions{});
  apply_freeze_plan(*model, make_freeze_plan(model->ir(), 2));
  TrainConfig cfg;
  cfg.epochs = 5;
  const TrainOutcome out = mock.train(*model, {}, {}, cfg);

  // Empty validation set falls back to the published 132/19/149 composition.
  CHECK(confusion_total(out.confusion) == 300);
  CHECK(out.best_val_accuracy == Catch::Approx(0.93).margin(0.02));
  CHECK(out.best_epoch == 5);
}

TEST_CASE("mock trainer default curves deepen with depth", "[trainer][mock]") {
  ensure_toy_registered();
  MockTrainer mock;
  TrainConfig cfg;
  cfg.epochs = 4;

  auto shallow = BackboneRegistry::instance().load("toy", LoadOptions{});
  apply_freeze_plan(*shallow, make_freeze_plan(shallow->ir(), 0));
  auto deep = BackboneRegistry::instance().load("toy", LoadOptions{});
  apply_freeze_plan(*deep, make_freeze_plan(deep->ir(), 6));

  const auto val = tiny_val_set();
  const double a0 = mock.train(*shallow, {}, val, cfg).best_val_accuracy;
  const double a6 = mock.train(*deep, {}, val, cfg).best_val_accuracy;
  CHECK(a6 > a0);
}

TEST_CASE("native trainer reduces the training loss on the tiny backbone", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {10, 5, 5};
  spec.seed = 5;
  const Dataset data = make_synthetic_dataset(spec);

  auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
  apply_freeze_plan(*model, make_freeze_plan(model->ir(), 4));

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 8;

  NativeTrainer trainer;
  const TrainOutcome out = trainer.train(*model, data, data, cfg);
  REQUIRE(out.history.size() == 5);
  CHECK(out.history.back().train_loss < out.history.front().train_loss);
  CHECK(out.best_epoch >= 1);
  CHECK(out.best_val_accuracy >= 0.0);
  CHECK(confusion_total(out.confusion) == data.size());
  CHECK(out.wall_seconds > 0.0);
}

TEST_CASE("native training leaves frozen layers byte-identical", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {6, 3, 3};
  spec.seed = 6;
  const Dataset data = make_synthetic_dataset(spec);

  auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
  const auto ir = model->ir();
  const std::size_t depth = 4;
  apply_freeze_plan(*model, make_freeze_plan(ir, depth));

  std::vector<std::string> before;
  for (std::size_t i = 0; i < ir.backbone.size(); ++i) before.push_back(model->layer_state_hash(i));
  const std::string head_before = model->head_state_hash();

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 6;
  NativeTrainer trainer;
  trainer.train(*model, data, data, cfg);

  for (std::size_t i = 0; i < ir.backbone.size() - depth; ++i) {
    INFO("frozen layer " << ir.backbone[i].name);
    CHECK(model->layer_state_hash(i) == before[i]);
  }
  // The unfrozen convolution watches the gradient; the head always trains.
  CHECK(model->layer_state_hash(4) != before[4]);  // conv2
  CHECK(model->head_state_hash() != head_before);
}

TEST_CASE("native training at depth zero touches only the head", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {6, 3, 3};
  spec.seed = 8;
  const Dataset data = make_synthetic_dataset(spec);

  auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
  apply_freeze_plan(*model, make_freeze_plan(model->ir(), 0));

  std::vector<std::string> before;
  for (std::size_t i = 0; i < model->ir().backbone.size(); ++i) {
    before.push_back(model->layer_state_hash(i));
  }

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 6;
  NativeTrainer trainer;
  trainer.train(*model, data, data, cfg);

  for (std::size_t i = 0; i < before.size(); ++i) {
    INFO("layer " << model->ir().backbone[i].name);
    CHECK(model->layer_state_hash(i) == before[i]);
  }
}

TEST_CASE("native training is bit-deterministic for a fixed seed", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {6, 3, 3};
  spec.seed = 9;
  const Dataset data = make_synthetic_dataset(spec);

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 4;

  auto run_once = [&]() {
    auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
    apply_freeze_plan(*model, make_freeze_plan(model->ir(), 2));
    NativeTrainer trainer;
    const auto out = trainer.train(*model, data, data, cfg);
    return std::make_pair(model_state_hash(*model), out);
  };

  const auto [hash_a, out_a] = run_once();
  const auto [hash_b, out_b] = run_once();
  CHECK(hash_a == hash_b);
  REQUIRE(out_a.history.size() == out_b.history.size());
  for (std::size_t i = 0; i < out_a.history.size(); ++i) {
    CHECK(out_a.history[i].train_loss == out_b.history[i].train_loss);
    CHECK(out_a.history[i].val_accuracy == out_b.history[i].val_accuracy);
  }
}

TEST_CASE("early stopping halts after the configured patience", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {4, 2, 2};
  spec.seed = 10;
  const Dataset data = make_synthetic_dataset(spec);

  auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
  apply_freeze_plan(*model, make_freeze_plan(model->ir(), 0));

  // A learning rate below float resolution cannot move the weights, so the
  // validation accuracy never improves past epoch one.
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.learning_rate = 1e-30;
  cfg.batch_size = 4;
  cfg.early_stopping = true;
  cfg.patience = 2;

  NativeTrainer trainer;
  const TrainOutcome out = trainer.train(*model, data, data, cfg);
  CHECK(out.history.size() == 3);  // epoch 1 best, then patience exhausted
  CHECK(out.best_epoch == 1);
}

TEST_CASE("native trainer rejects what it cannot train", "[trainer][native]") {
  ensure_toy_registered();
  NativeTrainer trainer;
  TrainConfig cfg;
  const Dataset data = tiny_train_set();

  auto manifest_model = BackboneRegistry::instance().load("toy", LoadOptions{});
  REQUIRE_THROWS_AS(trainer.train(*manifest_model, data, data, cfg), UnsupportedModelError);

  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {2, 1, 1};
  const Dataset small = make_synthetic_dataset(spec);
  auto native = BackboneRegistry::instance().load("tinycnn", LoadOptions{});

  REQUIRE_THROWS_AS(trainer.train(*native, {}, small, cfg), EmptyDatasetError);
  REQUIRE_THROWS_AS(trainer.train(*native, small, {}, cfg), EmptyDatasetError);

  TrainConfig bad = cfg;
  bad.optimizer = "rmsprop";
  REQUIRE_THROWS_AS(trainer.train(*native, small, small, bad), ConfigError);
}

TEST_CASE("sgd optimizer path trains the tiny backbone", "[trainer][native]") {
  register_builtin_tiny(16);
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.counts = {4, 2, 2};
  spec.seed = 11;
  const Dataset data = make_synthetic_dataset(spec);

  auto model = BackboneRegistry::instance().load("tinycnn", LoadOptions{});
  apply_freeze_plan(*model, make_freeze_plan(model->ir(), 2));

  TrainConfig cfg;
  cfg.optimizer = "sgd";
  cfg.epochs = 2;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 4;
  NativeTrainer trainer;
  const auto out = trainer.train(*model, data, data, cfg);
  REQUIRE(out.history.size() == 2);
}

TEST_CASE("run records survive the JSON round trip field for field", "[store]") {
  RunRecord r;
  r.architecture = "toy";
  r.depth = 3;
  r.config_hash = std::string(64, 'e');
  r.status = "failed";
  r.error = "loss diverged at epoch 2";
  r.seed = 17;
  r.trainable_layers = 3;
  r.trainable_params = 175;
  r.total_params = 315;
  r.total_layers = 8;
  r.layer_ratio = 0.375;
  r.param_ratio = 175.0 / 315.0;
  r.best_val_accuracy = 0.8125;
  r.best_epoch = 2;
  r.confusion[0][0] = 5;
  r.confusion[1][2] = 3;
  r.confusion[2][2] = 4;
  EpochRecord e;
  e.epoch = 1;
  e.train_loss = 1.0986122886681098;
  e.train_accuracy = 0.333;
  e.val_loss = 1.05;
  e.val_accuracy = 0.41;
  r.history.push_back(e);
  r.wall_seconds = 1.25;
  r.init_hash = std::string(64, 'b');

  const auto back = run_record_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.architecture == r.architecture);
  CHECK(back.depth == r.depth);
  CHECK(back.config_hash == r.config_hash);
  CHECK(back.status == r.status);
  CHECK(back.error == r.error);
  CHECK(back.seed == r.seed);
  CHECK(back.trainable_layers == r.trainable_layers);
  CHECK(back.trainable_params == r.trainable_params);
  CHECK(back.total_params == r.total_params);
  CHECK(back.total_layers == r.total_layers);
  CHECK(back.layer_ratio == r.layer_ratio);
  CHECK(back.param_ratio == r.param_ratio);
  CHECK(back.best_val_accuracy == r.best_val_accuracy);
  CHECK(back.best_epoch == r.best_epoch);
  CHECK(back.confusion == r.confusion);
  REQUIRE(back.history.size() == 1);
  CHECK(back.history[0].train_loss == e.train_loss);
  CHECK(back.history[0].val_accuracy == e.val_accuracy);
  CHECK(back.wall_seconds == r.wall_seconds);
  CHECK(back.init_hash == r.init_hash);
}

TEST_CASE("run store keeps the newest record per key", "[store]") {
  TempDir tmp("ftsweep-store");
  RunStore store(tmp / "runs.jsonl");
  CHECK_FALSE(store.exists());
  CHECK(store.load().empty());

  RunRecord r;
  r.architecture = "toy";
  r.depth = 1;
  r.config_hash = "c1";
  r.best_val_accuracy = 0.5;
  store.append(r);

  RunRecord newer = r;
  newer.best_val_accuracy = 0.75;
  store.append(newer);

  RunRecord other = r;
  other.depth = 2;
  store.append(other);

  RunStore::LoadReport report;
  const auto records = store.load(&report);
  CHECK(report.lines == 3);
  CHECK(report.corrupted == 0);
  REQUIRE(records.size() == 2);
  CHECK(records[0].depth == 1);
  CHECK(records[0].best_val_accuracy == 0.75);  // newest wins, position stays
  CHECK(records[1].depth == 2);
}

TEST_CASE("run store skips corrupted lines with a warning", "[store]") {
  TempDir tmp("ftsweep-corrupt-store");
  RunStore store(tmp / "runs.jsonl");

  RunRecord r;
  r.architecture = "toy";
  r.depth = 0;
  r.config_hash = "c1";
  store.append(r);

  {
    std::ofstream out(tmp / "runs.jsonl", std::ios::app);
    out << "{\"architecture\": truncated nonsense\n";
  }
  r.depth = 1;
  store.append(r);

  RunStore::LoadReport report;
  const auto records = store.load(&report);
  CHECK(report.lines == 3);
  CHECK(report.corrupted == 1);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("line 2") != std::string::npos);
  REQUIRE(records.size() == 2);
}

TEST_CASE("sweep runs every rung of every architecture in order", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-sweep");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0, 1, 3};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 4;

  MockTrainer trainer;
  const auto train = tiny_train_set();
  const auto val = tiny_val_set();
  const SweepSummary summary = run_sweep(req, trainer, train, val);

  CHECK(summary.planned == 3);
  CHECK(summary.executed == 3);
  CHECK(summary.skipped == 0);
  CHECK(summary.failed == 0);
  REQUIRE(summary.records.size() == 3);

  const std::size_t expected_depths[] = {0, 1, 3};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& rec = summary.records[i];
    CHECK(rec.architecture == "toy");
    CHECK(rec.depth == expected_depths[i]);
    CHECK(rec.status == "ok");
    CHECK(rec.config_hash == req.train.hash());
    CHECK(rec.total_layers == 8);  // 6 backbone + pooling + head
    CHECK(rec.trainable_layers == rec.depth);
    CHECK_FALSE(rec.history.empty());
  }

  // Every rung starts from the same freshly initialized model.
  CHECK(summary.records[0].init_hash == summary.records[1].init_hash);
  CHECK(summary.records[1].init_hash == summary.records[2].init_hash);

  // Ratio fields reproduce the freeze-plan arithmetic.
  const auto& deep = summary.records[2];
  CHECK(deep.trainable_params == 160 + 15);  // last three layers + head
  CHECK(deep.layer_ratio == Catch::Approx(3.0 / 8.0).epsilon(1e-12));
  CHECK(deep.param_ratio == Catch::Approx(175.0 / 315.0).epsilon(1e-12));

  const auto persisted = RunStore(req.store_path).load();
  REQUIRE(persisted.size() == 3);
}

TEST_CASE("sweep records failed rungs and keeps going", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-failures");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0, 1, 2};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  FailingTrainer trainer(1);
  const SweepSummary summary = run_sweep(req, trainer, tiny_train_set(), tiny_val_set());

  CHECK(summary.executed == 3);
  CHECK(summary.failed == 1);
  REQUIRE(summary.records.size() == 3);
  CHECK(summary.records[0].status == "ok");
  CHECK(summary.records[1].status == "failed");
  CHECK(summary.records[1].error.find("depth 1") != std::string::npos);
  CHECK(summary.records[2].status == "ok");
}

TEST_CASE("sweep refuses to overwrite an existing store", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-exists");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 1;

  MockTrainer trainer;
  run_sweep(req, trainer, tiny_train_set(), tiny_val_set());
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()), ConfigError);
}

TEST_CASE("resume skips successful rungs and preserves their bytes", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-resume");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0, 1};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  MockTrainer trainer;
  run_sweep(req, trainer, tiny_train_set(), tiny_val_set());
  const std::string before = testutil::read_file(req.store_path);

  req.schedule = {0, 1, 2, 3};
  req.resume = true;
  const SweepSummary summary = run_sweep(req, trainer, tiny_train_set(), tiny_val_set());

  CHECK(summary.planned == 4);
  CHECK(summary.skipped == 2);
  CHECK(summary.executed == 2);
  REQUIRE(summary.records.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(summary.records[i].depth == i);

  const std::string after = testutil::read_file(req.store_path);
  REQUIRE(after.size() > before.size());
  CHECK(after.substr(0, before.size()) == before);

  const auto records = RunStore(req.store_path).load();
  CHECK(records.size() == 4);
}

TEST_CASE("resume reruns rungs that previously failed", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-rerun");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0, 1, 2};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  FailingTrainer failing(1);
  run_sweep(req, failing, tiny_train_set(), tiny_val_set());

  req.resume = true;
  MockTrainer healthy;
  const SweepSummary summary = run_sweep(req, healthy, tiny_train_set(), tiny_val_set());

  CHECK(summary.skipped == 2);
  CHECK(summary.executed == 1);
  CHECK(summary.failed == 0);

  const auto records = RunStore(req.store_path).load();
  REQUIRE(records.size() == 3);
  for (const auto& r : records) CHECK(r.status == "ok");
}

TEST_CASE("resume rejects a store written under a different config", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-config-clash");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  MockTrainer trainer;
  run_sweep(req, trainer, tiny_train_set(), tiny_val_set());

  req.resume = true;
  req.train.learning_rate = 5e-4;
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()), ConfigError);
}

TEST_CASE("sweep writes a manifest before any rung trains", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-manifest");

  SweepRequest req;
  req.architectures = {"toy"};
  req.schedule = {0, 1};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  // Even when every rung fails the manifest is complete.
  struct ThrowingTrainer : Trainer {
    std::string kind() const override { return "mock"; }
    TrainOutcome train(Model&, const Dataset&, const Dataset&, const TrainConfig&) override {
      throw NonFiniteLossError("loss diverged at epoch 1");
    }
  } always_failing;
  run_sweep(req, always_failing, tiny_train_set(), tiny_val_set());

  const auto manifest_path = tmp / "manifest.json";
  REQUIRE(std::filesystem::exists(manifest_path));
  const auto j = nlohmann::json::parse(testutil::read_file(manifest_path));

  CHECK(j.at("manifest_id").get<std::string>() == req.train.hash());
  CHECK(j.at("config_hash").get<std::string>() == req.train.hash());
  CHECK(j.at("trainer").get<std::string>() == "mock");
  CHECK(j.at("seed").get<std::uint64_t>() == 42);
  CHECK(j.at("config").get<std::string>() == req.train.canonical());
  REQUIRE(j.at("architectures").size() == 1);
  CHECK(j.at("architectures")[0].at("name").get<std::string>() == "toy");
  CHECK(j.at("architectures")[0].at("schedule").get<std::vector<std::size_t>>() ==
        std::vector<std::size_t>{0, 1});
  CHECK(j.at("data").at("train_samples").get<std::size_t>() == tiny_train_set().size());
  CHECK(j.at("data").at("train_fingerprint").get<std::string>().size() == 64);
  CHECK(j.at("data").at("val_fingerprint").get<std::string>().size() == 64);
  CHECK_FALSE(j.at("environment").at("compiler").get<std::string>().empty());

  const std::string ts = j.at("created_at").get<std::string>();
  REQUIRE(ts.size() == 20);
  CHECK(ts[4] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts[19] == 'Z');

  // Every persisted record points back at the manifest id.
  for (const auto& r : RunStore(req.store_path).load()) {
    CHECK(r.config_hash == j.at("manifest_id").get<std::string>());
  }
}

TEST_CASE("sweep validates schedules before touching anything", "[sweep]") {
  ensure_toy_registered();
  TempDir tmp("ftsweep-validation");
  MockTrainer trainer;

  SweepRequest req;
  req.architectures = {"toy"};
  req.store_path = tmp / "runs.jsonl";

  req.schedule = {1, 2};
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()), ConfigError);

  req.schedule = {0, 2, 2};
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()), ConfigError);

  req.schedule = {0, 7};  // toy has 6 backbone layers
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()),
                    DepthOutOfRangeError);

  req.schedule = {0};
  req.architectures = {};
  REQUIRE_THROWS_AS(run_sweep(req, trainer, tiny_train_set(), tiny_val_set()), ConfigError);

  CHECK_FALSE(std::filesystem::exists(tmp / "runs.jsonl"));
}

TEST_CASE("sweep covers multiple architectures against one store", "[sweep]") {
  ensure_toy_registered();
  register_builtin_tiny(16);
  TempDir tmp("ftsweep-multi");

  SweepRequest req;
  req.architectures = {"toy", "tinycnn"};
  req.schedule = {0, 2};
  req.store_path = tmp / "runs.jsonl";
  req.train.epochs = 2;

  MockTrainer trainer;
  const auto summary = run_sweep(req, trainer, tiny_train_set(), tiny_val_set());
  CHECK(summary.planned == 4);
  CHECK(summary.executed == 4);
  REQUIRE(summary.records.size() == 4);
  CHECK(summary.records[0].architecture == "toy");
  CHECK(summary.records[2].architecture == "tinycnn");

  std::set<std::string> keys;
  for (const auto& r : RunStore(req.store_path).load()) keys.insert(r.key());
  CHECK(keys.size() == 4);
}
