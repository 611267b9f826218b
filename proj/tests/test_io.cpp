#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "vmf/checkpoint.hpp"
#include "vmf/dataset.hpp"
#include "vmf/directional.hpp"
#include "vmf/errors.hpp"
#include "vmf/rng.hpp"
#include "vmf/textio.hpp"

using namespace vmf;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test run, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vmf_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static inline int counter = 0;
};

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char buf[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_idx_images(const std::string& path, std::uint32_t magic,
                      const std::vector<unsigned char>& pixels,
                      std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, std::uint32_t magic,
                      const std::vector<unsigned char>& labels,
                      std::uint32_t n) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, n);
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Matrix random_unit_rows(Rng& rng, std::size_t n, std::size_t p) {
  Matrix m(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    auto u = random_unit_vector(rng, p);
    for (std::size_t j = 0; j < p; ++j) m(i, j) = u[j];
  }
  return m;
}

}  // namespace

TEST_CASE("dense label validation") {
  CHECK(validate_dense_labels({0, 1, 2, 1, 0}) == 3);
  CHECK(validate_dense_labels({0}) == 1);
  CHECK_THROWS_AS(validate_dense_labels({}), DataError);
  CHECK_THROWS_AS(validate_dense_labels({0, -1}), DataError);
  CHECK_THROWS_AS(validate_dense_labels({0, 2}), DataError);  // class 1 missing
}

TEST_CASE("idx round trip and scaling") {
  TempDir dir;
  // Two 2x3 images.
  const std::vector<unsigned char> pixels{0,   255, 128, 7,  64, 200,
                                          255, 1,   0,   99, 50, 13};
  write_idx_images(dir.file("img"), 0x803, pixels, 2, 2, 3);
  write_idx_labels(dir.file("lab"), 0x801, {1, 0}, 2);

  LabeledDataset data = load_idx(dir.file("img"), dir.file("lab"));
  REQUIRE(data.features.rows() == 2);
  REQUIRE(data.features.cols() == 6);
  CHECK(data.num_classes == 2);
  CHECK(data.labels == std::vector<int>{1, 0});
  CHECK(data.features(0, 0) == 0.0);
  CHECK(data.features(0, 1) == 1.0);
  CHECK(data.features(0, 2) == 128.0 / 255.0);
  CHECK(data.features(1, 0) == 1.0);
  CHECK(data.features(1, 3) == 99.0 / 255.0);
}

TEST_CASE("idx error handling") {
  TempDir dir;
  const std::vector<unsigned char> pixels(12, 17);

  SUBCASE("bad image magic") {
    write_idx_images(dir.file("img"), 0x804, pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x801, {0, 1}, 2);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("bad magic"), DataError);
  }
  SUBCASE("bad label magic") {
    write_idx_images(dir.file("img"), 0x803, pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x803, {0, 1}, 2);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("bad magic"), DataError);
  }
  SUBCASE("count mismatch") {
    write_idx_images(dir.file("img"), 0x803, pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x801, {0, 1, 1}, 3);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("count mismatch"), DataError);
  }
  SUBCASE("truncated pixels") {
    std::vector<unsigned char> short_pixels(9, 17);  // need 12
    write_idx_images(dir.file("img"), 0x803, short_pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x801, {0, 1}, 2);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("truncated"), DataError);
  }
  SUBCASE("truncated labels") {
    write_idx_images(dir.file("img"), 0x803, pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x801, {0}, 2);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("truncated"), DataError);
  }
  SUBCASE("sparse labels") {
    write_idx_images(dir.file("img"), 0x803, pixels, 2, 2, 3);
    write_idx_labels(dir.file("lab"), 0x801, {0, 2}, 2);
    CHECK_THROWS_WITH_AS(load_idx(dir.file("img"), dir.file("lab")),
                         doctest::Contains("sparse"), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_idx(dir.file("absent"), dir.file("lab")), DataError);
  }
}

TEST_CASE("the bundled digit corpus loads with the documented shape") {
  LabeledDataset train = load_idx(VMF_DATA_DIR "/digits/train-images.idx3-ubyte",
                                  VMF_DATA_DIR "/digits/train-labels.idx1-ubyte");
  LabeledDataset test = load_idx(VMF_DATA_DIR "/digits/test-images.idx3-ubyte",
                                 VMF_DATA_DIR "/digits/test-labels.idx1-ubyte");
  CHECK(train.features.rows() == 1348);
  CHECK(test.features.rows() == 449);
  CHECK(train.features.cols() == 64);
  CHECK(test.features.cols() == 64);
  CHECK(train.num_classes == 10);
  CHECK(test.num_classes == 10);
  for (double v : test.features.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("csv parsing") {
  TempDir dir;

  SUBCASE("values parse exactly and comments are skipped") {
    write_text_file(dir.file("d.csv"),
                    "# label,f0,f1\n"
                    "1,0.25,-3\n"
                    "0,1e-3,42.5\n"
                    "1,0,0.1\n");
    LabeledDataset data = load_csv(dir.file("d.csv"));
    REQUIRE(data.features.rows() == 3);
    REQUIRE(data.features.cols() == 2);
    CHECK(data.labels == std::vector<int>{1, 0, 1});
    CHECK(data.num_classes == 2);
    CHECK(data.features(0, 0) == 0.25);
    CHECK(data.features(0, 1) == -3.0);
    CHECK(data.features(1, 0) == 1e-3);
    CHECK(data.features(2, 1) == 0.1);
  }
  SUBCASE("ragged row") {
    write_text_file(dir.file("d.csv"), "0,1,2\n1,3\n");
    CHECK_THROWS_WITH_AS(load_csv(dir.file("d.csv")),
                         doctest::Contains("ragged"), DataError);
  }
  SUBCASE("non-numeric feature") {
    write_text_file(dir.file("d.csv"), "0,1,oops\n1,3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(dir.file("d.csv")),
                         doctest::Contains("non-numeric"), DataError);
  }
  SUBCASE("non-numeric label") {
    write_text_file(dir.file("d.csv"), "a,1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(dir.file("d.csv")),
                         doctest::Contains("non-numeric label"), DataError);
  }
  SUBCASE("trailing empty field") {
    write_text_file(dir.file("d.csv"), "0,1,\n1,3,4\n");
    CHECK_THROWS_AS(load_csv(dir.file("d.csv")), DataError);
  }
  SUBCASE("sparse labels") {
    write_text_file(dir.file("d.csv"), "0,1,2\n3,4,5\n");
    CHECK_THROWS_WITH_AS(load_csv(dir.file("d.csv")),
                         doctest::Contains("sparse"), DataError);
  }
  SUBCASE("empty file") {
    write_text_file(dir.file("d.csv"), "# only a comment\n");
    CHECK_THROWS_WITH_AS(load_csv(dir.file("d.csv")),
                         doctest::Contains("no data rows"), DataError);
  }
}

TEST_CASE("checkpoint round trip is bitwise") {
  TempDir dir;
  Rng rng(7);
  for (Activation act : {Activation::tanh, Activation::relu}) {
    Network net = init_network(NetworkConfig{{5, 7, 3}, act, 12345});
    // Perturb biases so they are not trivially zero.
    for (auto& layer : net.layers()) {
      for (auto& b : layer.bias) b = rng.uniform(-1.0, 1.0);
    }
    PrototypeSet protos(random_unit_rows(rng, 4, 3), 27.5);
    const std::string path = dir.file("ck");
    save_checkpoint(path, net, protos);

    LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.net.config().widths == net.config().widths);
    CHECK(loaded.net.config().activation == act);
    CHECK(loaded.net.config().seed == 12345);
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
      CHECK(testutil::bitwise_equal(loaded.net.layers()[k].weights.data(),
                                    net.layers()[k].weights.data()));
      CHECK(testutil::bitwise_equal(loaded.net.layers()[k].bias,
                                    net.layers()[k].bias));
    }
    CHECK(testutil::bitwise_equal(loaded.protos.mus().data(),
                                  protos.mus().data()));
    CHECK(loaded.protos.kappa() == 27.5);
  }
}

TEST_CASE("checkpoint corruption detection") {
  TempDir dir;
  Rng rng(11);
  Network net = init_network(NetworkConfig{{4, 6, 3}, Activation::tanh, 9});
  PrototypeSet protos(random_unit_rows(rng, 3, 3), 15.0);
  const std::string good = dir.file("good");
  save_checkpoint(good, net, protos);
  const std::string bytes = slurp(good);

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    write_text_file(dir.file("bad"), bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("bad")),
                         doctest::Contains("bad magic"), DataError);
  }
  SUBCASE("unsupported version") {
    std::string bad = bytes;
    bad[8] = 2;
    write_text_file(dir.file("bad"), bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("bad")),
                         doctest::Contains("version"), DataError);
  }
  SUBCASE("truncation at every prefix length") {
    for (std::size_t len : {4ul, 12ul, 30ul, 100ul, bytes.size() - 8,
                            bytes.size() - 1}) {
      write_text_file(dir.file("bad"), bytes.substr(0, len));
      CHECK_THROWS_AS(load_checkpoint(dir.file("bad")), DataError);
    }
  }
  SUBCASE("trailing bytes") {
    write_text_file(dir.file("bad"), bytes + "extra");
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("bad")),
                         doctest::Contains("trailing"), DataError);
  }
  SUBCASE("corrupted prototype row fails the unit check") {
    std::string bad = bytes;
    // Last 8 bytes are kappa; the previous doubles are prototype entries.
    // Blow up the exponent byte of the final prototype entry.
    bad[bad.size() - 9] = static_cast<char>(bad[bad.size() - 9] ^ 0x7f);
    write_text_file(dir.file("bad"), bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("bad")),
                         doctest::Contains("prototypes"), DataError);
  }
  SUBCASE("negative kappa is rejected") {
    std::string bad = bytes;
    bad[bad.size() - 1] = static_cast<char>(bad[bad.size() - 1] | 0x80);
    write_text_file(dir.file("bad"), bad);
    CHECK_THROWS_AS(load_checkpoint(dir.file("bad")), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir.file("absent")), DataError);
  }
}

TEST_CASE("format_double round-trips doubles through text") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-2.5) == "-2.5");

  Rng rng(13);
  std::vector<double> values{0.0, 1.0, -1.0, 1e300, 1e-300, 5e-324,
                             3.141592653589793, 2.2250738585072014e-308};
  for (int i = 0; i < 40; ++i) {
    values.push_back(rng.uniform(-1e6, 1e6));
    values.push_back(rng.normal() * 1e-9);
  }
  for (double v : values) {
    const double back = std::strtod(format_double(v).c_str(), nullptr);
    CHECK(back == v);
  }
}

TEST_CASE("embedding text files round trip bitwise") {
  TempDir dir;
  Rng rng(17);
  Matrix coords = random_unit_rows(rng, 12, 4);
  coords(3, 0) = 0.1;  // awkward decimal
  coords(5, 2) = -1e-17;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 12; ++i) {
    labels.push_back(static_cast<int>(rng.index(5)));
  }
  const std::string path = dir.file("emb.txt");
  write_embeddings(path, labels, coords);

  const std::string text = slurp(path);
  CHECK(text.rfind("# label x0 x1 x2 x3\n", 0) == 0);

  auto [rlabels, rcoords] = read_embeddings(path);
  CHECK(rlabels == labels);
  REQUIRE(rcoords.rows() == coords.rows());
  REQUIRE(rcoords.cols() == coords.cols());
  CHECK(testutil::bitwise_equal(rcoords.data(), coords.data()));

  CHECK_THROWS_AS(write_embeddings(dir.file("x"), {0, 1}, coords), ConfigError);
  CHECK_THROWS_AS(read_embeddings(dir.file("absent")), DataError);
  write_text_file(dir.file("bad1"), "0 0.5\n");  // single coordinate
  CHECK_THROWS_AS(read_embeddings(dir.file("bad1")), DataError);
  write_text_file(dir.file("bad2"), "0 0.5 0.5\n1 0.1 0.2 0.3\n");
  CHECK_THROWS_WITH_AS(read_embeddings(dir.file("bad2")),
                       doctest::Contains("ragged"), DataError);
  write_text_file(dir.file("bad3"), "0 0.5 abc\n");
  CHECK_THROWS_AS(read_embeddings(dir.file("bad3")), DataError);
}

TEST_CASE("report, points, and csv writers") {
  TempDir dir;
  write_report(dir.file("r.txt"), {{"accuracy", "0.97"}, {"loss", "0.12"}});
  CHECK(slurp(dir.file("r.txt")) == "accuracy: 0.97\nloss: 0.12\n");

  Matrix pts(2, 2);
  pts(0, 0) = 1.0;
  pts(1, 1) = -0.5;
  write_points(dir.file("p.txt"), pts);
  CHECK(slurp(dir.file("p.txt")) == "1 0\n0 -0.5\n");

  write_csv(dir.file("m.csv"), {"k", "recall"}, {{"1", "0.9"}, {"4", "0.95"}});
  CHECK(slurp(dir.file("m.csv")) == "k,recall\n1,0.9\n4,0.95\n");
  CHECK_THROWS_AS(
      write_csv(dir.file("m.csv"), {"a", "b"}, {{"1", "2", "3"}}), ConfigError);
}

TEST_CASE("train log rendering is exact and timestamp-free") {
  TrainLog log;
  log.losses = {0.5, 0.25, 0.125};
  log.learning_rates = {0.1, 0.1, 0.05};
  log.timestamps = {0.001, 0.002, 0.003};  // must not appear anywhere
  Matrix protos(2, 2);
  protos(0, 0) = 1.0;
  protos(1, 1) = 1.0;
  log.refreshes.push_back({0, protos, {1, 2}});
  log.refreshes.push_back({2, protos, {}});
  log.refreshes.push_back({3, protos, {}});
  log.warnings.push_back("something odd");

  const std::string expected =
      "refresh 0 degenerate 1;2\n"
      "iter 0 loss 0.5 lr 0.10000000000000001\n"
      "iter 1 loss 0.25 lr 0.10000000000000001\n"
      "refresh 2 degenerate -\n"
      "iter 2 loss 0.125 lr 0.050000000000000003\n"
      "refresh 3 degenerate -\n"
      "warning something odd\n";
  const std::string got = render_train_log(log);
  CHECK(got == expected);
  CHECK(got.find("0.001") == std::string::npos);  // timestamps excluded
  // Rendering is a pure function of the log.
  CHECK(render_train_log(log) == got);

  TempDir dir;
  write_train_log(dir.file("log.txt"), log);
  CHECK(slurp(dir.file("log.txt")) == got);
}
