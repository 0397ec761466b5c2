#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "chunklab/config.hpp"
#include "chunklab/io.hpp"
#include "chunklab/scan.hpp"
#include "chunklab/serialization.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli() { return CHUNKLAB_CLI_PATH; }

int run(const std::string& args) {
  const std::string command = std::string(cli()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chunklab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("verify-fixtures passes end to end") {
  const fs::path dir = fresh_dir("verify");
  CHECK(run("verify-fixtures --out " + dir.string()) == 0);
}

TEST_CASE("scan-check reports bitwise equivalence") {
  const fs::path dir = fresh_dir("scan");
  CHECK(run("scan-check --L 512 --d 8 --dstate 4 --chunks 1,32,64,512 --seed 3 --out " +
            dir.string()) == 0);
}

TEST_CASE("chunk subcommand prints the legacy example") {
  const fs::path dir = fresh_dir("chunk");
  const std::string out = dir.string();
  const std::string command = std::string(cli()) +
                              " chunk --signal 4.60 --href legacy --out " +
                              out + " > " + out + "/stdout.txt 2>&1";
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  const std::string text = chunklab::read_text_file(out + "/stdout.txt");
  CHECK(text.find("chunk 256") != std::string::npos);
  CHECK(text.find("r=0.575") != std::string::npos);
}

TEST_CASE("manifest replay reproduces artifacts byte for byte") {
  const fs::path first = fresh_dir("replay_a");
  REQUIRE(run("sweep --lengths 4,8,16 --regimes low,mixed --instances 2 "
              "--seed 11 --out " + first.string()) == 0);
  const std::string csv_a =
      chunklab::read_text_file(first / "fusion_sweep.csv");

  // Manifest parameters point at the original out dir; rerun and compare.
  const std::string manifest = (first / "manifest_sweep.json").string();
  const std::string moved = manifest + ".replay";
  fs::copy_file(manifest, moved);
  fs::remove(first / "fusion_sweep.csv");
  REQUIRE(run("--replay " + moved) == 0);
  const std::string csv_b =
      chunklab::read_text_file(first / "fusion_sweep.csv");
  CHECK(csv_a == csv_b);
}

TEST_CASE("replayed rotate runs are byte-identical") {
  const fs::path dir = fresh_dir("rotate");
  REQUIRE(run("rotate --dist student_t3 --seeds 5 --seed 2000 --out " +
              dir.string()) == 0);
  const std::string first =
      chunklab::read_text_file(dir / "rotation_report.csv");
  REQUIRE(run("--replay " + (dir / "manifest_rotate.json").string()) == 0);
  CHECK(first == chunklab::read_text_file(dir / "rotation_report.csv"));
}

TEST_CASE("schedule aggregates a chunk distribution") {
  const fs::path dir = fresh_dir("schedule");
  REQUIRE(run("schedule --variant learned_table --threshold 50 "
              "--short-chunk 128 --long-chunk 512 --layers 4 "
              "--shape 16,976 --seed 5 --out " + dir.string()) == 0);
  const std::string summary =
      chunklab::read_text_file(dir / "schedule_summary.json");
  CHECK(summary.find("{512:4}") != std::string::npos);
  const std::string trace =
      chunklab::read_text_file(dir / "schedule_trace.jsonl");
  CHECK(trace.find("\"policy\":\"learned_table\"") != std::string::npos);
  CHECK(trace.find("\"layer\":3") != std::string::npos);
}

TEST_CASE("unknown subcommand and invalid input produce error records") {
  CHECK(run("frobnicate") != 0);
  CHECK(run("chunk") != 0);                       // missing --signal
  CHECK(run("chunk --signal -3 --href legacy") != 0);  // precondition violated
  CHECK(run("entropy --synthetic sparse --fraction 1.5 --shape 100") != 0);
}

TEST_CASE("policy documents parse into every variant") {
  using namespace chunklab;
  using nlohmann::json;
  const json buckets = {128, 256, 512, 1024, 2048};

  auto parse = [&](json doc) {
    doc["bucket_set"] = buckets;
    return parse_policy(doc);
  };

  CHECK(std::holds_alternative<StaticPolicy>(
      parse(json{{"variant", "static"}, {"chunk", 512}}).variant));
  CHECK(std::holds_alternative<NoEntropyMidpointPolicy>(
      parse(json{{"variant", "no_entropy_midpoint"}}).variant));
  CHECK(std::holds_alternative<RandomPolicy>(
      parse(json{{"variant", "random"}, {"seed", 7}}).variant));
  CHECK(std::holds_alternative<FullHistogramPolicy>(
      parse(json{{"variant", "full_histogram"}}).variant));
  const SchedulerPolicy sampled =
      parse(json{{"variant", "sampled_histogram"}, {"stride", 4}});
  CHECK(std::get<SampledHistogramPolicy>(sampled.variant).stride == 4);
  CHECK(std::holds_alternative<TokenHistogramPolicy>(
      parse(json{{"variant", "token_histogram"}}).variant));
  const SchedulerPolicy moment = parse(json{
      {"variant", "moment_proxy"}, {"kind", "kurtosis"}, {"reference_scale", 10.0}});
  CHECK(std::get<MomentProxyPolicy>(moment.variant).kind ==
        MomentKind::Kurtosis);
  const SchedulerPolicy learned = parse(json{{"variant", "learned_table"},
                                             {"threshold_tokens", 50},
                                             {"short_chunk", 128},
                                             {"long_chunk", 512}});
  CHECK(std::get<LearnedTablePolicy>(learned.variant).threshold_tokens == 50);

  // Guarded nests its inner policy; the inner inherits the bucket set.
  const SchedulerPolicy guarded =
      parse(json{{"variant", "guarded"},
                 {"safe_chunk", 512},
                 {"min_delta_buckets", 2},
                 {"inner", json{{"variant", "sampled_histogram"}}}});
  const auto& g = std::get<GuardedPolicy>(guarded.variant);
  REQUIRE(g.inner != nullptr);
  CHECK(g.inner->bucket_set == guarded.bucket_set);

  CHECK_THROWS_AS(parse(json{{"variant", "mystery"}}),
                  chunklab::invalid_input);
  CHECK_THROWS_AS(parse_policy(json{{"variant", "static"}, {"chunk", 512}}),
                  chunklab::invalid_input);  // bucket_set missing
  CHECK_THROWS_AS(parse(json{{"variant", "static"}, {"chunk", 96}}),
                  chunklab::invalid_input);  // not in bucket_set
}

TEST_CASE("CHUNKLAB_OUT provides the default output directory") {
  const fs::path dir = fresh_dir("envout");
  const std::string command = "CHUNKLAB_OUT=" + dir.string() + " " + cli() +
                              " chunk --signal 2.0 --href legacy >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  CHECK(fs::exists(dir / "chunk.json"));
  CHECK(fs::exists(dir / "manifest_chunk.json"));
}

TEST_CASE("tampered manifests are rejected with a checksum error") {
  const fs::path dir = fresh_dir("tamper");
  REQUIRE(run("chunk --signal 2.0 --href legacy --out " + dir.string()) == 0);
  const fs::path manifest = dir / "manifest_chunk.json";
  std::string text = chunklab::read_text_file(manifest);
  const auto pos = text.find("\"chunk_sweep\": \"");
  REQUIRE(pos != std::string::npos);
  text[pos + 17] = text[pos + 17] == '0' ? '1' : '0';
  chunklab::write_text_file(manifest, text);
  CHECK(run("--replay " + manifest.string()) != 0);
}

TEST_CASE("config documents are validated before execution") {
  const fs::path dir = fresh_dir("config");
  chunklab::write_text_file(dir / "bad.json", "{\"bins\": 1}\n");
  CHECK(run("chunk --signal 2.0 --config " + (dir / "bad.json").string() +
            " --out " + dir.string()) != 0);
  chunklab::write_text_file(dir / "good.json",
                            "{\"bins\": 64, \"calibration\": \"legacy\"}\n");
  CHECK(run("chunk --signal 2.0 --config " + (dir / "good.json").string() +
            " --out " + dir.string()) == 0);

  using chunklab::config_from_json;
  using nlohmann::json;
  CHECK_THROWS_AS(config_from_json(json{{"ema_decay", 1.0}}),
                  chunklab::invalid_input);
  CHECK_THROWS_AS(config_from_json(json{{"epsilon", 0.0}}),
                  chunklab::invalid_input);
  CHECK_THROWS_AS(config_from_json(json{{"bucket_set", {512, 128}}}),
                  chunklab::invalid_input);
  CHECK_THROWS_AS(config_from_json(json{{"bounds", {48, 512}}}),
                  chunklab::invalid_input);
  const chunklab::Config cfg =
      config_from_json(json{{"bins", 64}, {"tau", 0.45}});
  CHECK(cfg.bins == 64);
  CHECK(cfg.weights.tau == 0.45);
}

TEST_CASE("scan parameter fixtures round-trip bit-exactly") {
  const fs::path dir = fresh_dir("scanfix");
  const chunklab::ScanParams p =
      chunklab::random_scan_params(123, 8, 4, 100);
  chunklab::save_scan_params(dir / "params", p);
  const chunklab::ScanParams q = chunklab::load_scan_params(dir / "params");
  CHECK(p.a == q.a);
  CHECK(p.b == q.b);
  CHECK(p.c == q.c);
  CHECK(p.d == q.d);
  CHECK(p.x == q.x);
  CHECK(p.seq_len == q.seq_len);

  const auto [y1, h1] = chunklab::scan_sequential(p, chunklab::ScanState{});
  const auto [y2, h2] = chunklab::scan_sequential(q, chunklab::ScanState{});
  CHECK(y1.y == y2.y);
  CHECK(h1.h == h2.h);
}

TEST_CASE("f32 inputs are accepted and widened") {
  const fs::path dir = fresh_dir("f32");
  std::vector<double> values = {0.0, 0.25, 0.5, 0.75};
  chunklab::write_flat_array(dir / "t.bin", values, "f32");
  const std::vector<double> back =
      chunklab::read_flat_array(dir / "t.bin", "f32");
  CHECK(back == values);  // exact: quarter steps are f32-representable
  CHECK(run("entropy --input " + (dir / "t.bin").string() +
            " --dtype f32 --shape 4 --bins 2 --out " + dir.string()) == 0);
}

TEST_CASE("entropy subcommand round-trips a binary tensor") {
  const fs::path dir = fresh_dir("entropy");
  // 4096 f64 values from the uniform generator written as a flat file.
  std::vector<double> values(4096);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = static_cast<double>(i) / 4096.0;
  chunklab::write_flat_array(dir / "tensor.bin", values, "f64");
  const std::string out = dir.string();
  const std::string command =
      std::string(cli()) + " entropy --input " + (dir / "tensor.bin").string() +
      " --dtype f64 --shape 4096 --bins 64 --out " + out + " > " + out +
      "/stdout.txt 2>&1";
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  const std::string record = chunklab::read_text_file(out + "/stdout.txt");
  // Equal-width values fill all 64 bins evenly: normalized entropy ~ 1.
  CHECK(record.find("\"K\":64") != std::string::npos);
  CHECK(record.find("\"normalized\":0.99") != std::string::npos);
}
