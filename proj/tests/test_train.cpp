#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "i3net/checkpoint.hpp"
#include "i3net/train.hpp"
#include "i3net/volume.hpp"

using namespace i3net;
using namespace i3net::train;
namespace fs = std::filesystem;

namespace {

model::ModelConfig tiny_model() {
    model::ModelConfig cfg;
    cfg.channels = 8;
    cfg.n_blocks = 1;
    cfg.cvb_positions = {1};
    cfg.window = 8;
    cfg.s_in = 4;
    cfg.scale = 2;
    return cfg;
}

TrainConfig tiny_train(int epochs, int batch) {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.crop = 16;
    tc.checkpoint_interval = 0;
    tc.val_interval = 0;
    tc.seed = 5;
    return tc;
}

std::vector<vol::Volume> phantom_set(int count, std::uint64_t seed0, int s = 9, int hw = 24) {
    std::vector<vol::Volume> out;
    for (int i = 0; i < count; ++i) {
        vol::PhantomSpec spec;
        spec.seed = seed0 + i;
        spec.s = s;
        spec.h = hw;
        spec.w = hw;
        out.push_back(vol::normalize_intensity(vol::gen_phantom(spec)));
    }
    return out;
}

} // namespace

TEST_CASE("l1_loss values and float64 oracle") {
    Tensor<float> a = Tensor<float>::full(1, 2, 4, 4, 0.25f);
    Tensor<float> b = a;
    CHECK(l1_loss(a, b) == 0.0);
    for (auto& v : b.v) v += 0.5f;
    CHECK(l1_loss(a, b) == doctest::Approx(0.5).epsilon(1e-7));
    Tensor<float> c(1, 2, 4, 3);
    CHECK_THROWS_AS(l1_loss(a, c), ValidationError);

    SUBCASE("random pairs match the elementwise float64 sum") {
        Rng rng(3);
        for (int t = 0; t < 10; ++t) {
            Tensor<float> x = Tensor<float>::random_uniform(2, 3, 8, 8, rng);
            Tensor<float> y = Tensor<float>::random_uniform(2, 3, 8, 8, rng);
            double want = 0.0;
            for (size_t i = 0; i < x.size(); ++i)
                want += std::fabs(double(x.v[i]) - double(y.v[i]));
            want /= double(x.size());
            CHECK(std::fabs(l1_loss(x, y) - want) <= 1e-7 * std::max(1.0, want));
        }
    }
    SUBCASE("gradient is sign/count") {
        Tensor<float> x(1, 1, 1, 3), y(1, 1, 1, 3), d;
        x.v = {1.0f, 0.0f, -2.0f};
        y.v = {0.5f, 0.5f, -1.0f};
        l1_loss_grad(x, y, d);
        CHECK(d.v[0] == doctest::Approx(1.0 / 3));
        CHECK(d.v[1] == doctest::Approx(-1.0 / 3));
        CHECK(d.v[2] == doctest::Approx(-1.0 / 3));
    }
}

TEST_CASE("cosine schedule endpoints, midpoint, monotonicity") {
    CHECK(lr_at(0, 1000, 3e-4) == doctest::Approx(3e-4).epsilon(1e-12));
    CHECK(lr_at(1000, 1000, 3e-4) == doctest::Approx(0.0));
    CHECK(lr_at(500, 1000, 3e-4) == doctest::Approx(1.5e-4).epsilon(1e-12));
    CHECK(lr_at(2000, 1000, 3e-4) == 0.0); // clamps past the end
    double prev = lr_at(0, 400, 1.0);
    for (int s = 1; s <= 400; ++s) {
        double cur = lr_at(s, 400, 1.0);
        CHECK(cur <= prev + 1e-15);
        CHECK(prev - cur <= 1.0 * 3.1416 / 400.0 * 0.5 + 1e-9); // continuity bound
        prev = cur;
    }
}

TEST_CASE("adam converges on a quadratic") {
    Tensor<float> p(1, 1, 1, 1), g(1, 1, 1, 1);
    p.v[0] = 0.0f;
    std::vector<model::ParamRef<float>> refs{{"p", &p, &g}};
    Adam opt(refs, 0.9, 0.999, 1e-8);
    for (int i = 0; i < 800; ++i) {
        g.v[0] = 2.0f * (p.v[0] - 3.0f);
        opt.step(0.05);
    }
    CHECK(p.v[0] == doctest::Approx(3.0f).epsilon(1e-3));
}

TEST_CASE("one volume, one epoch, batch 1 runs exactly one optimizer step") {
    model::I3Net<float> net(tiny_model());
    net.init_params(1);
    Trainer t(net, tiny_train(1, 1));
    auto data = phantom_set(1, 100);
    t.run(data, {});
    CHECK(t.global_step() == 1);
    CHECK(t.history().loss.size() == 1);
}

TEST_CASE("fixed seed gives a bitwise-identical loss trajectory") {
    auto data = phantom_set(3, 200);
    auto run_once = [&] {
        model::I3Net<float> net(tiny_model());
        net.init_params(9);
        Trainer t(net, tiny_train(3, 2));
        t.run(data, {});
        return t.history().loss;
    };
    auto l1 = run_once();
    auto l2 = run_once();
    REQUIRE(l1.size() == l2.size());
    for (size_t i = 0; i < l1.size(); ++i) CHECK(l1[i] == l2[i]);
}

TEST_CASE("short overfit run decreases the loss") {
    auto data = phantom_set(1, 300);
    model::I3Net<float> net(tiny_model());
    net.init_params(17);
    Trainer t(net, tiny_train(60, 1));
    set_finite_checks(true); // exercise the per-step NaN/Inf guards
    t.run(data, {});
    set_finite_checks(false);
    const auto& loss = t.history().loss;
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) first += loss[i];
    for (int i = 0; i < 10; ++i) last += loss[loss.size() - 1 - i];
    CHECK(last < first);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted trajectory bitwise") {
    const auto dir = fs::temp_directory_path() / "i3net_train_test";
    fs::create_directories(dir);
    const auto ck = (dir / "mid.i3ck").string();
    auto data = phantom_set(2, 400);
    const TrainConfig four = tiny_train(4, 1);

    // Uninterrupted: 4 epochs, 2 steps each.
    model::I3Net<float> net_a(tiny_model());
    net_a.init_params(21);
    Trainer ta(net_a, four);
    ta.run(data, {});

    // Interrupted at epoch 2 (same 4-epoch schedule), checkpoint, reload, resume.
    model::I3Net<float> net_b(tiny_model());
    net_b.init_params(21);
    Trainer tb(net_b, four);
    tb.run(data, {}, "", nullptr, 2);
    model::TrainStatePayload st{tb.global_step(), tb.epoch(), four.seed, tb.best_psnr(),
                                tb.best_found()};
    model::save_checkpoint(ck, net_b, &tb.optimizer(), &st);

    auto loaded = model::load_checkpoint(ck);
    REQUIRE(loaded.state.has_value());
    model::I3Net<float> net_c = model::model_from_checkpoint(loaded);
    Trainer td(net_c, four);
    model::apply_optimizer_state(loaded, td.optimizer());
    td.restore_progress(loaded.state->step, loaded.state->epoch, loaded.state->best_psnr,
                        loaded.state->best_found);
    td.run(data, {});

    REQUIRE(ta.history().loss.size() == 8);
    REQUIRE(td.history().loss.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(td.history().loss[i] == ta.history().loss[4 + i]);

    auto pa = net_a.params();
    auto pd = net_c.params();
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].value->v == pd[i].value->v);
}

TEST_CASE("optimizer state round-trips bitwise through the checkpoint") {
    model::I3Net<float> net(tiny_model());
    net.init_params(31);
    Trainer t(net, tiny_train(2, 1));
    auto data = phantom_set(1, 500);
    t.run(data, {});
    const auto dir = fs::temp_directory_path() / "i3net_train_test";
    fs::create_directories(dir);
    const auto ck = (dir / "opt.i3ck").string();
    model::TrainStatePayload st{t.global_step(), t.epoch(), 5, t.best_psnr(), t.best_found()};
    model::save_checkpoint(ck, net, &t.optimizer(), &st);
    auto loaded = model::load_checkpoint(ck);
    REQUIRE(loaded.state.has_value());
    CHECK(loaded.state->step == t.global_step());
    model::I3Net<float> net2 = model::model_from_checkpoint(loaded);
    Trainer t2(net2, tiny_train(2, 1));
    model::apply_optimizer_state(loaded, t2.optimizer());
    for (size_t i = 0; i < t.optimizer().moments_m().size(); ++i) {
        CHECK(t.optimizer().moments_m()[i].v == t2.optimizer().moments_m()[i].v);
        CHECK(t.optimizer().moments_v()[i].v == t2.optimizer().moments_v()[i].v);
    }
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
    model::I3Net<float> net(tiny_model());
    net.init_params(41);
    net.head.w.v[0] = std::numeric_limits<float>::quiet_NaN();
    Trainer t(net, tiny_train(1, 1));
    auto data = phantom_set(1, 600);
    CHECK_THROWS_WITH_AS(t.run(data, {}), doctest::Contains("non-finite"), NumericError);
}

TEST_CASE("empty dataset and unnormalized volumes are rejected") {
    model::I3Net<float> net(tiny_model());
    net.init_params(43);
    Trainer t(net, tiny_train(1, 1));
    CHECK_THROWS_AS(t.run({}, {}), ValidationError);
    vol::PhantomSpec spec;
    spec.s = 9;
    spec.h = 24;
    spec.w = 24;
    std::vector<vol::Volume> raw{vol::gen_phantom(spec)};
    Trainer t2(net, tiny_train(1, 1));
    CHECK_THROWS_AS(t2.run(raw, {}), ValidationError);
}

TEST_CASE("validation tracks the best checkpoint") {
    const auto dir = fs::temp_directory_path() / "i3net_train_best";
    fs::create_directories(dir);
    model::I3Net<float> net(tiny_model());
    net.init_params(47);
    TrainConfig tc = tiny_train(2, 1);
    tc.val_interval = 1;
    tc.checkpoint_interval = 1;
    Trainer t(net, tc);
    auto data = phantom_set(1, 700);
    auto val = phantom_set(1, 800, 9, 24);
    t.run(data, val, dir.string());
    CHECK(t.best_found());
    CHECK(fs::exists(dir / "best.i3ck"));
    CHECK(fs::exists(dir / "last.i3ck"));
    CHECK(t.history().val_psnr.size() == 2);
}
