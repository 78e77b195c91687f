//
// Copyright 2026 The SA2 Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Drives the sa2 binary through a shell and checks output and exit codes.

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result RunSa2(const std::string& args) {
  const std::string cmd =
      std::string(SA2_BINARY) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Config(const char* name) {
  return std::string(SA2_SOURCE_DIR) + "/configs/" + name;
}

std::string LastLine(const std::string& s) {
  std::vector<std::string> lines = absl::StrSplit(s, '\n', absl::SkipEmpty());
  return lines.empty() ? "" : lines.back();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string TempPath(const char* name) {
  return ::testing::TempDir() + "/" + name;
}

TEST(CliAcctTest, ReferenceValues) {
  EXPECT_EQ(RunSa2("acct gaussian --sigma 7 --delta 1e-8").out, "0.872337\n");
  EXPECT_EQ(RunSa2("acct analytic --sigma 4.5 --delta 1e-8").out, "1.1413\n");
  EXPECT_EQ(RunSa2("acct shuffle --eps0 4 --n 10000 --delta 1e-10").out,
            "1.10873\n");
  EXPECT_EQ(RunSa2("acct amplify --eps 0.61 --delta 1e-10 --gamma 0.02").out,
            "0.0166689 2e-12\n");
  EXPECT_EQ(RunSa2("acct donation --eps 1 --delta 1e-6 --m 100").out,
            "0.910059 0.000101\n");
  EXPECT_EQ(RunSa2("--precision 3 acct gaussian --sigma 7 --delta 1e-8").out,
            "0.872\n");
}

TEST(CliAcctTest, SubsampledAndCompose) {
  const Result r = RunSa2("acct subsampled --sigma 5.1 --q 0.02 --steps 2500 --delta 1e-8");
  EXPECT_EQ(r.code, 0);
  EXPECT_LT(std::stod(r.out), 2.0);
  const Result full = RunSa2("acct subsampled --sigma 5.1 --q 1 --steps 2500 --delta 1e-8");
  EXPECT_GT(std::stod(full.out), 100.0);
  const Result c = RunSa2("acct compose --step 5.1:1:25 --step 5.1:1:25 --delta 1e-8");
  const Result single = RunSa2("acct compose --step 5.1:1:50 --delta 1e-8");
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out, single.out);
}

TEST(CliAcctTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunSa2("acct gaussian --sigma -1 --delta 1e-8").code, 2);
  EXPECT_EQ(RunSa2("acct gaussian --sigma 1").code, 2);
  EXPECT_EQ(RunSa2("acct bogus").code, 2);
  EXPECT_EQ(RunSa2("acct gaussian --sigma 1 --delta 1e-8 --nope").code, 2);
  EXPECT_EQ(RunSa2("acct compose --step 1:2 --delta 1e-8").code, 2);
  EXPECT_EQ(RunSa2("").code, 2);
}

TEST(CliSimTest, DeterministicTranscript) {
  const std::string cfg = Config("sim_rappor.ini");
  const Result a = RunSa2("sim run --config " + cfg);
  const Result b = RunSa2("sim run --config " + cfg);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(LastLine(a.out).rfind("output_hash ", 0), 0u);
  EXPECT_EQ(LastLine(a.out).find("output_hash bottom"), std::string::npos);
  const Result c = RunSa2("sim run --config " + cfg + " --seed 2");
  EXPECT_NE(LastLine(a.out), LastLine(c.out));
}

TEST(CliSimTest, TranscriptFileAndView) {
  const std::string path = TempPath("sim_transcript.tsv");
  const Result r = RunSa2("sim run --config " + Config("sim_gaussian.ini") +
                       " --transcript " + path + " --view");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# view leader"), std::string::npos);
  EXPECT_EQ(r.out.find("\taccept\t"), std::string::npos);
  const std::string log = ReadFile(path);
  EXPECT_EQ(log.rfind("# time\tparty\tevent\tdigest", 0), 0u);
  EXPECT_NE(log.find("\tleader\treveal\t"), std::string::npos);
  EXPECT_NE(LastLine(r.out).find(" k 1010 "), std::string::npos);
}

TEST(CliSimTest, ReplaysReportedAsDuplicates) {
  const Result r = RunSa2("sim run --config " + Config("sim_rappor.ini") + " --replays 5");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(LastLine(r.out).find(" duplicates 5 "), std::string::npos) << r.out;
}

TEST(CliSimTest, BottomExitsThree) {
  const std::string path = TempPath("zero_rate.ini");
  std::ofstream(path) << "[recipe]\nsampling_rate = 0\n[population]\nsize = 50\n";
  const Result r = RunSa2("sim run --config " + path);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(LastLine(r.out).rfind("output_hash bottom k 0 ", 0), 0u) << r.out;
}

TEST(CliSimTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(RunSa2("sim run --config /nonexistent.ini").code, 2);
  const std::string path = TempPath("bad_key.ini");
  std::ofstream(path) << "[recipe]\nthreshold = 3\n";
  EXPECT_EQ(RunSa2("sim run --config " + path).code, 2);
  EXPECT_EQ(RunSa2("sim run").code, 2);
}

TEST(CliExpTest, HistogramCsv) {
  const std::string out = TempPath("hist.csv");
  const Result r = RunSa2("exp histogram --K 100 --M 1000,3000 --T 1,10 --N 100000 "
                       "--trials 20 --seed 3 --out " + out);
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "12 rows written to " + out + "\n");
  const std::string csv = ReadFile(out);
  std::vector<std::string> lines = absl::StrSplit(csv, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 13u);
  EXPECT_EQ(lines[0],
            "method,K,N,M,T,gamma,eps_total,delta_total,sigma,analytic_mse,"
            "mc_mse,mc_stderr,trials,seed");
  const std::string again = TempPath("hist2.csv");
  RunSa2("exp histogram --K 100 --M 1000,3000 --T 1,10 --N 100000 --trials 20 "
      "--seed 3 --jobs 2 --out " + again);
  EXPECT_EQ(ReadFile(again), csv);
}

TEST(CliExpTest, MethodFilterAndNeedles) {
  const std::string out = TempPath("needles.csv");
  const Result r = RunSa2("exp needles --K 100 --M 1000 --T 1 --N 100000 "
                       "--gamma 0.1,0.01 --methods SAMPAGG --out " + out);
  ASSERT_EQ(r.code, 0);
  std::vector<std::string> lines =
      absl::StrSplit(ReadFile(out), '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].rfind("SAMPAGG,100,100000,1000,1,0.1,", 0), 0u) << lines[1];
  EXPECT_EQ(RunSa2("exp histogram --methods NONPRIV_UNIF --out " + out).code, 2);
  EXPECT_EQ(RunSa2("exp histogram --K 10 --M 200 --N 100 --out " + out).code, 2);
}

}  // namespace
