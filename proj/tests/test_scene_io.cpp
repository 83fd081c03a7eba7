#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <png.h>

#include "relight/errors.hpp"
#include "relight/scene_io.hpp"
#include "support/fixtures.hpp"

using namespace relight;
using namespace relight::testing;

namespace {

void write_raw(const fs::path& p, const std::string& header, const std::vector<float>& payload) {
    std::ofstream out(p, std::ios::binary);
    out << header;
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 4));
}

std::vector<unsigned char> read_png(const fs::path& p, int channels) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_file(&image, p.c_str()));
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    REQUIRE(png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr));
    return buf;
}

}  // namespace

TEST_CASE("constant grayscale PFM loads") {
    const auto dir = scratch_dir("pfm_const");
    write_raw(dir / "c.pfm", "Pf\n2 2\n-1.0\n", {0.5f, 0.5f, 0.5f, 0.5f});
    const ImageF img = load_float_map(dir / "c.pfm");
    CHECK(img == ImageF(2, 2, 1, std::vector<double>{0.5, 0.5, 0.5, 0.5}));
}

TEST_CASE("PFM rows are returned top row first") {
    const auto dir = scratch_dir("pfm_flip");
    // Stored bottom row first: bottom = {1,2}, top = {3,4}.
    write_raw(dir / "f.pfm", "Pf\n2 2\n-1.0\n", {1, 2, 3, 4});
    const ImageF img = load_float_map(dir / "f.pfm");
    CHECK(img.at(0, 0) == 3.0);
    CHECK(img.at(0, 1) == 4.0);
    CHECK(img.at(1, 0) == 1.0);
}

TEST_CASE("big-endian PFM is decoded by positive scale") {
    const auto dir = scratch_dir("pfm_be");
    std::vector<float> payload = {0.25f, -1.5f};
    for (float& f : payload) f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
    write_raw(dir / "be.pfm", "Pf\n2 1\n1.0\n", payload);
    const ImageF img = load_float_map(dir / "be.pfm");
    CHECK(img.at(0, 0) == 0.25);
    CHECK(img.at(0, 1) == -1.5);
}

TEST_CASE("PFM round trip is bit exact") {
    const auto dir = scratch_dir("pfm_rt");
    Rng rng(11);
    for (int channels : {1, 3}) {
        ImageF img(8, 8, channels);
        for (double& v : img.data()) v = static_cast<float>(rng.uniform(-10.0, 10.0));
        save_float_map(img, dir / "rt.pfm");
        const ImageF back = load_float_map(dir / "rt.pfm");
        REQUIRE(back.channels() == channels);
        CHECK(std::memcmp(back.data().data(), img.data().data(), img.data().size_bytes()) == 0);
    }
}

TEST_CASE("PFM header encodes the channel count") {
    const auto dir = scratch_dir("pfm_header");
    save_float_map(ImageF(3, 2, 3, 1.0), dir / "rgb.pfm");
    save_float_map(ImageF(3, 2, 1, 1.0), dir / "gray.pfm");
    auto head = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(head(dir / "rgb.pfm") == "PF");
    CHECK(head(dir / "gray.pfm") == "Pf");
}

TEST_CASE("malformed PFM input is rejected") {
    const auto dir = scratch_dir("pfm_bad");
    SUBCASE("three-channel header with one-channel payload") {
        write_raw(dir / "bad.pfm", "PF\n2 2\n-1.0\n", {0.5f, 0.5f, 0.5f, 0.5f});
        CHECK_THROWS_AS(load_float_map(dir / "bad.pfm"), FormatError);
    }
    SUBCASE("unknown magic") {
        write_raw(dir / "bad.pfm", "P6\n2 2\n255\n", {});
        CHECK_THROWS_AS(load_float_map(dir / "bad.pfm"), FormatError);
    }
    SUBCASE("non-numeric dimensions") {
        write_raw(dir / "bad.pfm", "Pf\nx 2\n-1.0\n", {0, 0});
        CHECK_THROWS_AS(load_float_map(dir / "bad.pfm"), FormatError);
    }
    SUBCASE("NaN payload fails validation") {
        write_raw(dir / "nan.pfm", "Pf\n1 1\n-1.0\n", {std::numeric_limits<float>::quiet_NaN()});
        CHECK_THROWS_AS(load_float_map(dir / "nan.pfm"), ValidationError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_float_map(dir / "absent.pfm"), IoError); }
}

TEST_CASE("save_float_map rejects empty images and unwritable paths") {
    CHECK_THROWS_AS(save_float_map(ImageF(0, 0, 1), "/tmp/never.pfm"), ValidationError);
    CHECK_THROWS_AS(save_float_map(ImageF(1, 1, 1), "/nonexistent-dir/x.pfm"), IoError);
}

TEST_CASE("preview quantization clamps and rounds half to even") {
    CHECK(quantize_preview(1.0) == 255);
    CHECK(quantize_preview(0.0) == 0);
    CHECK(quantize_preview(2.0) == 255);
    CHECK(quantize_preview(-0.3) == 0);
    CHECK(quantize_preview(0.5 / 255.0) == 0);  // 0.5 -> even neighbour 0
    CHECK(quantize_preview(1.5 / 255.0) == 2);  // 1.5 -> even neighbour 2
}

TEST_CASE("PNG preview round trip") {
    const auto dir = scratch_dir("png");
    ImageF img(2, 1, 3);
    img.at(0, 0, 0) = 1.0;
    img.at(0, 0, 1) = 0.0;
    img.at(0, 0, 2) = 2.0;
    img.at(0, 1, 0) = 0.5;
    save_preview_png(img, dir / "p.png");
    const auto bytes = read_png(dir / "p.png", 3);
    REQUIRE(bytes.size() == 6);
    CHECK(bytes[0] == 255);
    CHECK(bytes[1] == 0);
    CHECK(bytes[2] == 255);
    CHECK(bytes[3] == quantize_preview(0.5));
    CHECK_THROWS_AS(save_preview_png(img, "/nonexistent-dir/p.png"), IoError);
}

TEST_CASE("light files round trip exactly") {
    const auto dir = scratch_dir("lights");
    SUBCASE("empty list") {
        save_lights({}, dir / "l.json");
        CHECK(load_lights(dir / "l.json").empty());
    }
    SUBCASE("default and random lights") {
        Rng rng(5);
        LightList lights = {PointLight{}};
        for (int i = 0; i < 10; ++i) lights.push_back(random_light(rng));
        lights.back().intensity = 1.0 / 3.0;
        save_lights(lights, dir / "l.json");
        CHECK(load_lights(dir / "l.json") == lights);
    }
}

TEST_CASE("light files are validated") {
    const auto dir = scratch_dir("lights_bad");
    auto write = [&](const std::string& text) {
        std::ofstream(dir / "l.json") << text;
        return dir / "l.json";
    };
    const std::string ok_tail = R"("ellipsoid_ratio": 1, "diffuse_exponent": 1}])";
    CHECK_THROWS_AS(load_lights(write(R"([{"color": [0.5,0.5,0.5], "position": [0.5,0.5,0.5], "intensity": -1, )" +
                                      ok_tail)),
                    ValidationError);
    CHECK_THROWS_AS(load_lights(write(R"([{"color": [0.5,0.5,0.5], "intensity": 1, )" + ok_tail)), ValidationError);
    CHECK_THROWS_AS(load_lights(write(R"([{"color": [1.5,0.5,0.5], "position": [0.5,0.5,0.5], "intensity": 1, )" +
                                      ok_tail)),
                    ValidationError);
    CHECK_THROWS_AS(load_lights(write("{not json")), FormatError);
}

TEST_CASE("scene maps validate geometry") {
    const ImageF albedo(4, 4, 3, 0.5), depth(4, 4, 1, 0.5);
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(SceneMaps(albedo, constant_normals(4, 4, 0, 0, 1), ImageF(4, 3, 1, 0.5)), ValidationError);
    }
    SUBCASE("slightly off-unit normals are re-normalized") {
        const SceneMaps s(albedo, constant_normals(4, 4, 0, 0, 1.005), depth);
        for (int r = 0; r < 4; ++r) CHECK(std::abs(s.normal().at(r, 0, 2) - 1.0) <= 1e-12);
    }
    SUBCASE("far-off normals are rejected") {
        CHECK_THROWS_AS(SceneMaps(albedo, constant_normals(4, 4, 0, 0, 0.5), depth), ValidationError);
    }
    SUBCASE("depth outside [0,1] is rejected, not rescaled") {
        CHECK_THROWS_AS(SceneMaps(albedo, constant_normals(4, 4, 0, 0, 1), ImageF(4, 4, 1, 1.5)), ValidationError);
    }
    SUBCASE("wrong channel counts") {
        CHECK_THROWS_AS(SceneMaps(depth, constant_normals(4, 4, 0, 0, 1), depth), ValidationError);
    }
}

TEST_CASE("atomic writes leave no temporary files behind") {
    const auto dir = scratch_dir("atomic");
    write_file_atomic(dir / "a.txt", "hello");
    write_file_atomic(dir / "a.txt", "world");
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::ifstream in(dir / "a.txt");
    std::string s;
    in >> s;
    CHECK(s == "world");
}
