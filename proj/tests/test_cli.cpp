#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

#ifndef SPOOFGUARD_BIN
#error "SPOOFGUARD_BIN must name the CLI executable"
#endif

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const std::filesystem::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(SPOOFGUARD_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("cli exit codes and identity vector") {
  testutil::TempDir dir("cli");
  const auto d = dir.path.string();
  REQUIRE(run("synth --subjects 1 --seed 3 --out " + d + "/c", dir.path).code == 0);
  const std::string img = d + "/c/reals/s001_1.pgm";

  const auto id = run("metrics-all --th 8 " + img + " " + img, dir.path);
  CHECK(id.code == 0);
  CHECK(id.out == "[0,100,1,0,0,0,1,1,2,0]\n");

  const auto one = run("metric --metric gms " + img + " " + img, dir.path);
  CHECK(one.code == 0);
  CHECK(one.out == "0\n");

  const auto bad_flag = run("metrics-all --bogus " + img + " " + img, dir.path);
  CHECK(bad_flag.code == 1);
  CHECK(bad_flag.err.find("Usage") != std::string::npos);

  CHECK(run("--help", dir.path).code == 0);
  CHECK(run("metrics-all " + img + " " + d + "/missing.pgm", dir.path).code == 2);

  std::ofstream(dir.path / "junk.pgm") << "P5\n9";
  const auto fmt = run("metrics-all " + img + " " + d + "/junk.pgm", dir.path);
  CHECK(fmt.code == 2);
  CHECK(fmt.err.rfind("error: ", 0) == 0);

  CHECK(run("metric --metric zz " + img + " " + img, dir.path).code == 1);
  CHECK(run("metrics-all --th -1 " + img + " " + img, dir.path).code == 1);
  CHECK(run("degrade --kind salt-pepper --strength 2 --out " + d + "/o.pgm " + img, dir.path).code == 1);
  CHECK(run("--threads 0 metrics-all " + img + " " + img, dir.path).code == 0);
  CHECK(run("--threads many metrics-all " + img + " " + img, dir.path).code == 1);
}

TEST_CASE("cli pipeline on 10 subjects") {
  testutil::TempDir dir("pipeline");
  const auto d = dir.path.string();
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run("synth --subjects 10 --seed 5 --out " + d + "/c", dir.path).code == 0);
  REQUIRE(run("build-fakes --manifest " + d + "/c/manifest.csv --kinds salt-pepper --seed 5 --out " + d + "/f",
              dir.path)
              .code == 0);
  const auto ev = run("eval --manifest " + d + "/f/manifest.csv --model knn,svm-rbf --seed 1 --out " + d + "/rep",
                      dir.path);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("pipeline took " << secs << " s");
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("knn: FFR") != std::string::npos);
  CHECK(secs < 180.0);

  const auto rep = run("report " + d + "/rep", dir.path);
  CHECK(rep.code == 0);
  CHECK(rep.out.find("degradation=salt-pepper") != std::string::npos);

  REQUIRE(run("extract --manifest " + d + "/f/manifest.csv --out " + d + "/feat.csv", dir.path).code == 0);
  REQUIRE(run("train --features " + d + "/feat.csv --model svm-linear --out " + d + "/m.json", dir.path).code == 0);
  const auto pred = run("predict --model " + d + "/m.json --features " + d + "/feat.csv", dir.path);
  CHECK(pred.code == 0);
  CHECK(std::count(pred.out.begin(), pred.out.end(), '\n') == 60);

  const auto gm = run("gradmap --out " + d + "/gm " + d + "/c/reals/s001_1.pgm", dir.path);
  CHECK(gm.code == 0);
  CHECK(std::filesystem::exists(dir.path / "gm" / "gradmap_th8.pgm"));
}
