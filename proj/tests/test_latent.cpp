#include <doctest.h>

#include "vplan/latent.hpp"
#include "vplan/rng.hpp"

using namespace vplan;

namespace {

PixelVideo random_video(Eigen::Index frames, Eigen::Index c, Eigen::Index h, Eigen::Index w,
                        std::uint64_t seed) {
    Rng rng(seed);
    PixelVideo v = PixelVideo::zeros(frames, c, h, w);
    for (Eigen::Index i = 0; i < v.data.rows(); ++i)
        for (Eigen::Index j = 0; j < v.data.cols(); ++j) v.data(i, j) = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST_SUITE("latent") {

TEST_CASE("shape law at reference geometry") {
    // [49, 3, 832, 480] in float to keep the test light on memory.
    PixelVideoT<float> v;
    v.channels = 3;
    v.height = 832;
    v.width = 480;
    v.data = FrameMatrix<float>::Zero(49, v.per_frame());
    const auto latent = encode(v);
    CHECK(latent.frames() == 13);
    CHECK(latent.h == 104);
    CHECK(latent.w == 60);
    CHECK(latent.channels == 3 * 8 * 8 * 4);
}

TEST_CASE("shape law across frame counts") {
    const PatchSpec patch;
    CHECK(latent_frame_count(1, patch) == 1);    // T = 0 single image
    CHECK(latent_frame_count(13, patch) == 4);   // T = 12
    CHECK(latent_frame_count(49, patch) == 13);  // T = 48
    for (Eigen::Index t = 0; t <= 20; ++t)
        CHECK(latent_frame_count(1 + t, patch) == 1 + (t + 3) / 4);
}

TEST_CASE("small geometry example") {
    const PixelVideo v = random_video(13, 3, 16, 16, 7);  // T = 12
    const auto latent = encode(v);
    CHECK(latent.frames() == 4);
    CHECK(latent.h == 2);
    CHECK(latent.w == 2);
}

TEST_CASE("round trip is bit exact") {
    for (Eigen::Index frames : {1, 2, 5, 13}) {
        const PixelVideo v = random_video(frames, 3, 16, 16, 100 + frames);
        const PixelVideo back = decode(encode(v));
        REQUIRE(back.frames() == v.frames());
        CHECK(back.data == v.data);  // element-for-element
    }
}

TEST_CASE("round trip with non-divisible temporal length") {
    // T = 5 needs tail padding; the round trip must still be exact.
    const PixelVideo v = random_video(6, 1, 8, 8, 3);
    const auto latent = encode(v);
    CHECK(latent.frames() == 1 + 2);
    const PixelVideo back = decode(latent);
    CHECK(back.frames() == 6);
    CHECK(back.data == v.data);
}

TEST_CASE("all-zero latent decodes to all-zero video") {
    const PixelVideo v = random_video(5, 1, 8, 8, 11);
    auto latent = encode(v);
    latent.data.setZero();
    const PixelVideo back = decode(latent);
    CHECK(back.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-frame latent decodes to single frame") {
    const PixelVideo v = random_video(1, 3, 8, 8, 12);
    const auto latent = encode(v);
    CHECK(latent.frames() == 1);
    const PixelVideo back = decode(latent);
    CHECK(back.frames() == 1);
    CHECK(back.data == v.data);
}

TEST_CASE("encoding is linear") {
    const PixelVideo a = random_video(9, 1, 16, 16, 21);
    PixelVideo b = random_video(9, 1, 16, 16, 22);
    PixelVideo combo = a;
    combo.data = 0.25 * a.data + (-1.5) * b.data;
    const auto lhs = encode(combo);
    auto rhs = encode(a);
    rhs.data = 0.25 * rhs.data + (-1.5) * encode(b).data;
    CHECK((lhs.data - rhs.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rejects non-divisible spatial dims") {
    const PixelVideo v = random_video(2, 1, 12, 16, 5);
    CHECK_THROWS_AS(encode(v), std::invalid_argument);
}

TEST_CASE("decode rejects inconsistent channels") {
    const PixelVideo v = random_video(5, 1, 8, 8, 6);
    auto latent = encode(v);
    latent.channels += 1;
    latent.data.conservativeResize(latent.frames(), latent.per_frame());
    CHECK_THROWS_AS(decode(latent), std::invalid_argument);
}

}  // TEST_SUITE
