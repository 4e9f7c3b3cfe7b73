#include <doctest.h>

#include "sft/config_file.hpp"
#include "sft/image.hpp"

#include <filesystem>

using namespace sft;

TEST_CASE("key-value files: parse, access, dump") {
  const std::string text = R"(# comment
[simulation]
step = 1
gravity = 0 0 -9.8
[simulation.solver]
tol = 1e-9
[material]
density = 0.15
enabled = true
)";
  KeyValueFile kv = KeyValueFile::parse(text);
  CHECK(kv.get_scalar("simulation.step") == 1.0);
  CHECK(kv.get_vec3("simulation.gravity") == Vec3(0, 0, -9.8));
  CHECK(kv.get_scalar("simulation.solver.tol") == 1e-9);
  CHECK(kv.get_bool("material.enabled"));
  CHECK(kv.get_scalar("missing.key", 7.0) == 7.0);
  CHECK_THROWS_AS(kv.get_scalar("missing.key"), ParseError);
  CHECK_THROWS_AS(kv.get_scalar("material.enabled"), ParseError);

  // dump/parse round trip preserves every entry
  KeyValueFile again = KeyValueFile::parse(kv.dump());
  CHECK(again.get_vec3("simulation.gravity") == Vec3(0, 0, -9.8));
  CHECK(again.get_scalar("material.density") == 0.15);
}

TEST_CASE("key-value files: malformed input") {
  CHECK_THROWS_AS(KeyValueFile::parse("[unterminated\n"), ParseError);
  CHECK_THROWS_AS(KeyValueFile::parse("keywithoutvalue\n"), ParseError);
}

TEST_CASE("png round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sft_png_test";
  fs::create_directories(dir);

  Image img(7, 5, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = ((x * 3 + y * 7 + c * 11) % 256) / 255.0;
  const std::string path = (dir / "t.png").string();
  save_png(img, path);
  const Image back = load_png(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  REQUIRE(back.channels == 3);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]));

  Image gray(4, 4, 1, 0.5);
  save_png(gray, (dir / "g.png").string());
  const Image gback = load_png((dir / "g.png").string());
  CHECK(gback.channels == 1);
  CHECK(gback.at(2, 2) == doctest::Approx(0.5).epsilon(0.01));
  fs::remove_all(dir);
}

TEST_CASE("bilinear sampling and its gradient") {
  Image img(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(x, y) = 0.1 * x + 0.25 * y;
  double v;
  bilinear_sample(img, 1.5, 2.25, &v);
  CHECK(v == doctest::Approx(0.1 * 1.5 + 0.25 * 2.25));
  double dx, dy;
  bilinear_sample_grad(img, 1.5, 2.25, &dx, &dy);
  CHECK(dx == doctest::Approx(0.1));
  CHECK(dy == doctest::Approx(0.25));
  // clamp-to-edge outside
  bilinear_sample(img, -3.0, 1.0, &v);
  CHECK(v == doctest::Approx(0.25));
}
