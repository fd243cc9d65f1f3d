#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "i3net/errors.hpp"
#include "i3net/volume.hpp"

using namespace i3net;
using namespace i3net::vol;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
    static fs::path d = [] {
        auto p = fs::temp_directory_path() / "i3net_volformat_test";
        fs::create_directories(p);
        return p;
    }();
    return d;
}

Volume random_volume(Rng& rng, int s, int h, int w) {
    Volume v(s, h, w);
    v.ds = 3.0;
    v.dh = 0.7;
    v.dw = 0.7;
    v.domain = IntensityDomain::raw_hu;
    for (auto& x : v.data) x = static_cast<float>(rng.uniform(-1000.0, 1500.0));
    return v;
}

} // namespace

TEST_CASE("rvl1 file size is header + payload") {
    Volume v(2, 8, 8);
    v.domain = IntensityDomain::raw_hu;
    const auto path = (tmpdir() / "zero.rvl1").string();
    write_volume(v, path);
    CHECK(fs::file_size(path) == kRvl1HeaderSize + 2 * 8 * 8 * 4);
}

TEST_CASE("write/read round-trip is bitwise for 100 random volumes") {
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        const int s = 2 + static_cast<int>(rng.below(6));
        const int h = 8 + static_cast<int>(rng.below(9));
        const int w = 8 + static_cast<int>(rng.below(9));
        Volume v = random_volume(rng, s, h, w);
        if (i % 3 == 0) v = normalize_intensity(v);
        const auto path = (tmpdir() / "rt.rvl1").string();
        write_volume(v, path);
        Volume back = read_volume(path);
        CHECK(back.s == v.s);
        CHECK(back.h == v.h);
        CHECK(back.w == v.w);
        CHECK(back.ds == v.ds);
        CHECK(back.dh == v.dh);
        CHECK(back.dw == v.dw);
        CHECK(back.domain == v.domain);
        REQUIRE(back.data.size() == v.data.size());
        CHECK(std::memcmp(back.data.data(), v.data.data(), v.data.size() * 4) == 0);
    }
}

TEST_CASE("write rejects invalid volumes") {
    Volume v(1, 8, 8); // S = 1 violates S >= 2
    CHECK_THROWS_AS(write_volume(v, (tmpdir() / "bad.rvl1").string()), ValidationError);
    Volume v2(2, 8, 8);
    v2.ds = 0.0;
    CHECK_THROWS_AS(write_volume(v2, (tmpdir() / "bad.rvl1").string()), ValidationError);
}

TEST_CASE("read errors name the failing field") {
    const auto dir = tmpdir();
    Rng rng(5);
    Volume v = random_volume(rng, 4, 16, 16);
    const auto good = (dir / "good.rvl1").string();
    write_volume(v, good);

    SUBCASE("bad magic") {
        auto path = (dir / "magic.rvl1").string();
        fs::copy_file(good, path, fs::copy_options::overwrite_existing);
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
        f.close();
        CHECK_THROWS_WITH_AS(read_volume(path), doctest::Contains("bad magic"), FormatError);
    }
    SUBCASE("truncated payload") {
        auto path = (dir / "trunc.rvl1").string();
        fs::copy_file(good, path, fs::copy_options::overwrite_existing);
        fs::resize_file(path, fs::file_size(path) - 4); // one voxel short
        CHECK_THROWS_WITH_AS(read_volume(path), doctest::Contains("payload length"), FormatError);
    }
    SUBCASE("trailing bytes") {
        auto path = (dir / "extra.rvl1").string();
        fs::copy_file(good, path, fs::copy_options::overwrite_existing);
        std::ofstream f(path, std::ios::app | std::ios::binary);
        f << "junk";
        f.close();
        CHECK_THROWS_WITH_AS(read_volume(path), doctest::Contains("payload length"), FormatError);
    }
    SUBCASE("header side matches the example dims") {
        Volume g = read_volume(good);
        CHECK(g.s == 4);
        CHECK(g.h == 16);
        CHECK(g.w == 16);
    }
}

TEST_CASE("normalize_intensity boundary and formula") {
    Volume v(2, 8, 8);
    v.domain = IntensityDomain::raw_hu;
    v.at(0, 0, 0) = -1024.0f;
    v.at(0, 0, 1) = 3071.0f;
    v.at(0, 0, 2) = 0.0f;
    v.at(0, 0, 3) = -5000.0f; // clamps
    Volume n = normalize_intensity(v);
    CHECK(n.at(0, 0, 0) == 0.0f);
    CHECK(n.at(0, 0, 1) == 1.0f);
    CHECK(n.at(0, 0, 2) == doctest::Approx(1024.0 / 4095.0).epsilon(1e-6));
    CHECK(n.at(0, 0, 3) == 0.0f);
    CHECK(n.domain == IntensityDomain::normalized_unit);
    CHECK_THROWS_AS(normalize_intensity(v, 10.0f, 10.0f), ValidationError);
    CHECK_THROWS_AS(normalize_intensity(n), ValidationError); // already normalized
}

TEST_CASE("downsample_axial keeps every R-th slice") {
    Rng rng(1);
    SUBCASE("paper case: 19 slices at R=6 give 4 inputs") {
        Volume v = random_volume(rng, 19, 8, 8);
        auto [lr, hr] = downsample_axial(v, 6);
        CHECK(lr.s == 4);
        CHECK(hr.s == 19);
        CHECK(lr.ds == doctest::Approx(6 * v.ds));
    }
    SUBCASE("R=1 is the identity") {
        Volume v = random_volume(rng, 5, 8, 8);
        auto [lr, hr] = downsample_axial(v, 1);
        CHECK(lr.s == v.s);
        CHECK(std::memcmp(lr.data.data(), hr.data.data(), hr.data.size() * 4) == 0);
    }
    SUBCASE("S=9, R=2 keeps indices 0,2,4,6,8") {
        Volume v = random_volume(rng, 9, 8, 8);
        auto [lr, hr] = downsample_axial(v, 2);
        REQUIRE(lr.s == 5);
        for (int k = 0; k < 5; ++k)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) CHECK(lr.at(k, y, x) == v.at(2 * k, y, x));
    }
    SUBCASE("trailing slices are trimmed, never padded") {
        Volume v = random_volume(rng, 20, 8, 8);
        auto [lr, hr] = downsample_axial(v, 6);
        CHECK(hr.s == 19);
        CHECK(lr.s == 4);
    }
    SUBCASE("errors") {
        Volume v = random_volume(rng, 5, 8, 8);
        CHECK_THROWS_AS(downsample_axial(v, 0), ValidationError);
        Volume small = random_volume(rng, 3, 8, 8);
        CHECK_THROWS_AS(downsample_axial(small, 4), ValidationError);
    }
}

TEST_CASE("gen_phantom is seed-deterministic") {
    PhantomSpec spec;
    spec.seed = 7;
    spec.s = 19;
    spec.h = 64;
    spec.w = 64;
    Volume a = gen_phantom(spec);
    Volume b = gen_phantom(spec);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0);
    spec.seed = 8;
    Volume c = gen_phantom(spec);
    CHECK(std::memcmp(a.data.data(), c.data.data(), a.data.size() * 4) != 0);
}

TEST_CASE("gen_phantom degenerate spec gives a constant volume") {
    PhantomSpec spec;
    spec.n_ellipsoids = 0;
    spec.n_tubes = 0;
    spec.background_smoothness = std::numeric_limits<double>::infinity();
    Volume v = gen_phantom(spec);
    for (float x : v.data) CHECK(x == v.data[0]);
}

TEST_CASE("gen_phantom spans a CT-like intensity range") {
    PhantomSpec spec;
    spec.seed = 3;
    Volume v = gen_phantom(spec);
    float mn = 1e9f, mx = -1e9f;
    for (float x : v.data) {
        mn = std::min(mn, x);
        mx = std::max(mx, x);
    }
    CHECK(mn < -900.0f); // air
    CHECK(mx > 500.0f);  // tubes
    CHECK(mn >= -1100.0f);
    CHECK(mx <= 1600.0f);
    CHECK_THROWS_AS(gen_phantom(PhantomSpec{.s = 0}), ValidationError);
}

TEST_CASE("sample_patch shapes, determinism, decimation consistency") {
    PhantomSpec spec;
    spec.seed = 21;
    Volume hr = normalize_intensity(gen_phantom(spec));

    SUBCASE("hr patch slice count is (s_in-1)*R+1") {
        Rng rng(0);
        PatchPair pp = sample_patch(hr, 2, 4, 32, rng);
        CHECK(pp.hr.c() == 7);
        CHECK(pp.lr.c() == 4);
        CHECK(pp.hr.h() == 32);
        CHECK(pp.hr.w() == 32);
    }
    SUBCASE("fixed rng seed reproduces the patch") {
        Rng r1(9), r2(9);
        PatchPair a = sample_patch(hr, 2, 4, 32, r1);
        PatchPair b = sample_patch(hr, 2, 4, 32, r2);
        CHECK(a.hr.v == b.hr.v);
        CHECK(a.lr.v == b.lr.v);
    }
    SUBCASE("lr slice k equals hr slice k*R bitwise") {
        for (int seed = 0; seed < 20; ++seed) {
            Rng rng(seed);
            PatchPair pp = sample_patch(hr, 2, 4, 32, rng);
            for (int kk = 0; kk < 4; ++kk)
                CHECK(std::memcmp(&pp.lr.at(0, kk, 0, 0), &pp.hr.at(0, 2 * kk, 0, 0),
                                  sizeof(float) * 32 * 32) == 0);
        }
    }
    SUBCASE("crop validation") {
        Rng rng(0);
        CHECK_THROWS_WITH_AS(sample_patch(hr, 2, 4, 30, rng), doctest::Contains("divisible by 16"),
                             ValidationError);
        CHECK_THROWS_AS(sample_patch(hr, 2, 4, 128, rng), ValidationError); // exceeds in-plane
    }
    SUBCASE("never reads outside bounds on extreme dims") {
        PhantomSpec tiny;
        tiny.seed = 1;
        tiny.s = 7;
        tiny.h = 16;
        tiny.w = 48;
        Volume v = normalize_intensity(gen_phantom(tiny));
        for (int seed = 0; seed < 50; ++seed) {
            Rng rng(seed);
            PatchPair pp = sample_patch(v, 2, 4, 16, rng);
            for (float x : pp.hr.v) CHECK(std::isfinite(x));
        }
        Rng rng(0);
        CHECK_THROWS_AS(sample_patch(v, 6, 4, 16, rng), ValidationError); // needs 19 slices
    }
}

TEST_CASE("crop_center takes the middle region") {
    Rng rng(13);
    Volume v = random_volume(rng, 3, 16, 16);
    Volume c = crop_center(v, 8);
    CHECK(c.h == 8);
    CHECK(c.w == 8);
    CHECK(c.at(0, 0, 0) == v.at(0, 4, 4));
}
