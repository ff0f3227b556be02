// cdctc/tests/test_cli.cpp

// Copyright 2026  The cdctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Run cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd =
      std::string("'") + CDCTC_CLI + "' " + args + " > '" + out.string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  const fs::path dir = cdctc::test::work_dir("cli_usage");
  CHECK(cli("", dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);
  CHECK(cli("oracle-check --bogus", dir).code == 2);
  CHECK(cli("build-graph --topology bichar", dir).code == 2);
  CHECK(cli("train --config /nonexistent.cfg", dir).code == 2);
  CHECK(slurp(dir / "stderr.txt").find("error:") != std::string::npos);
  CHECK(cli("grad-check --loss mmi", dir).code == 2);
  CHECK(cli("--help", dir).code == 0);
}

TEST_CASE("build-graph emits the nine-state bi-char graph") {
  const fs::path dir = cdctc::test::work_dir("cli_graph");
  write(dir / "ab.txt", "a\nb\n");
  const Run r = cli("build-graph --topology bichar --alphabet '" + (dir / "ab.txt").string() + "' --out '" +
                        (dir / "g").string() + "'",
                    dir);
  CHECK(r.code == 0);
  CHECK(slurp(dir / "g" / "graph.summary").rfind("states 9\n", 0) == 0);
  CHECK_FALSE(slurp(dir / "g" / "graph.fst").empty());
  const Run cd = cli("build-graph --topology bichar --blank-mode cd --alphabet '" + (dir / "ab.txt").string() + "'", dir);
  CHECK(cd.code == 0);
  CHECK(slurp(dir / "stderr.txt").rfind("states 9\n", 0) == 0);
  CHECK(cli("build-graph --topology trichar --alphabet '" + (dir / "ab.txt").string() + "'", dir).code == 2);
}

TEST_CASE("check subcommands") {
  const fs::path dir = cdctc::test::work_dir("cli_checks");
  const Run oracle = cli("oracle-check --cases 20 --out '" + (dir / "o").string() + "'", dir);
  CHECK(oracle.code == 0);
  CHECK(fs::exists(dir / "o" / "oracle.tsv"));

  const Run grad = cli("grad-check --loss ctc-gb", dir);
  CHECK(grad.code == 0);
  CHECK(grad.out.find("max_rel_error ") != std::string::npos);
  for (const char* loss : {"ctc", "ctc-g"}) {
    for (const char* scoring : {"lookup", "cde"}) {
      CAPTURE(loss);
      CAPTURE(scoring);
      CHECK(cli(std::string("grad-check --loss ") + loss + " --scoring " + scoring, dir).code == 0);
    }
  }
}

TEST_CASE("train, decode and sweep round trip") {
  const fs::path dir = cdctc::test::work_dir("cli_pipeline");
  write(dir / "run.cfg", "samples = 40\nsteps = 30\neval_every = 10\nkappa_grid = 0.5,1\n");
  const std::string cfg = "--config '" + (dir / "run.cfg").string() + "'";
  CHECK(cli("train " + cfg + " --out '" + (dir / "run").string() + "'", dir).code == 0);
  for (const char* f : {"config.txt", "metrics.csv", "model.ckpt", "lm.arpa", "summary.txt"})
    CHECK(fs::exists(dir / "run" / f));
  const Run dec = cli("decode " + cfg + " --checkpoint '" + (dir / "run" / "model.ckpt").string() + "' --lm '" +
                          (dir / "run" / "lm.arpa").string() + "' --out '" + (dir / "dec").string() + "'",
                      dir);
  CHECK(dec.code == 0);
  CHECK(slurp(dir / "dec" / "decode.txt").rfind("cer = ", 0) == 0);
  const Run sw = cli("sweep --run '" + (dir / "run").string() + "' --out '" + (dir / "sw").string() + "'", dir);
  CHECK(sw.code == 0);
  const std::string csv = slurp(dir / "sw" / "sweep.csv");
  CHECK(csv.rfind("loss_kind,kappa,cer\nctc-g,0.50,", 0) == 0);
  CHECK(fs::exists(dir / "sw" / "argmin.txt"));
}

TEST_CASE("synth output is byte-identical across runs") {
  const fs::path dir = cdctc::test::work_dir("cli_synth");
  CHECK(cli("synth --seed 3 --out '" + (dir / "a").string() + "'", dir).code == 0);
  CHECK(cli("synth --seed 3 --out '" + (dir / "b").string() + "'", dir).code == 0);
  CHECK(cli("synth --seed 4 --out '" + (dir / "c").string() + "'", dir).code == 0);
  for (const char* f : {"data.txt", "chars.txt", "allowed.txt"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / f).empty());
  }
  CHECK(slurp(dir / "a" / "data.txt") != slurp(dir / "c" / "data.txt"));
}
