#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

// End-to-end checks against the built binary.

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string(PERFECT_SIM_BINARY) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  std::array<char, 4096> buffer{};
  while (fgets(buffer.data(), static_cast<int>(buffer.size()), pipe) != nullptr) {
    result.output += buffer.data();
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("ar die emits N JSONL records and exits 0") {
  const auto result = run_cli("ar die --samples 10 --seed 42");
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.output);
  REQUIRE(lines.size() == 10);
  for (const auto& line : lines) {
    const auto record = nlohmann::json::parse(line);
    REQUIRE(record.contains("value"));
    REQUIRE(record.contains("depth"));
    REQUIRE(record.contains("draws"));
    const int value = record["value"];
    REQUIRE(value >= 1);
    REQUIRE(value <= 5);
    REQUIRE(record["depth"].get<std::int64_t>() >= 0);
    REQUIRE(record["draws"].get<std::uint64_t>() >= 1);
  }
}

TEST_CASE("identical invocations produce byte-identical output") {
  const auto first = run_cli("cftp toy --chain reset-walk --samples 50 --seed 7");
  const auto second = run_cli("cftp toy --chain reset-walk --samples 50 --seed 7");
  REQUIRE(first.exit_code == 0);
  REQUIRE(first.output == second.output);
  const auto shifted = run_cli("cftp toy --chain reset-walk --samples 50 --seed 8");
  REQUIRE(shifted.output != first.output);
}

TEST_CASE("csv output carries the fixed header") {
  const auto result = run_cli("ar die --samples 5 --seed 1 --format csv");
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.output);
  REQUIRE(lines.size() == 6);
  REQUIRE(lines[0] == "value,depth,flips,draws");
  const std::regex row(R"(^[1-5],\d+,0,\d+$)");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    REQUIRE(std::regex_match(lines[i], row));
  }
}

TEST_CASE("ising CFTP emits spin strings") {
  const auto result = run_cli("cftp ising --width 2 --height 2 --beta 0.3 --samples 5 --seed 1");
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.output);
  REQUIRE(lines.size() == 5);
  const std::regex spins(R"(^[+-]{4}$)");
  for (const auto& line : lines) {
    const auto record = nlohmann::json::parse(line);
    REQUIRE(std::regex_match(record["value"].get<std::string>(), spins));
  }
}

TEST_CASE("factory records use the bit/flips/depth schema") {
  const auto result = run_cli("factory exp --c 1 --p 0.5 --samples 8 --seed 3");
  REQUIRE(result.exit_code == 0);
  for (const auto& line : lines_of(result.output)) {
    const auto record = nlohmann::json::parse(line);
    REQUIRE(record.contains("bit"));
    REQUIRE(record.contains("flips"));
    REQUIRE(record.contains("depth"));
    const int bit = record["bit"];
    REQUIRE((bit == 0 || bit == 1));
  }
}

TEST_CASE("a never-halting factory exits 1 with a diagnostic") {
  const auto result = run_cli("factory von-neumann --p 1 --samples 1 --seed 1");
  REQUIRE(result.exit_code == 1);
  REQUIRE(result.output.find("depth") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  REQUIRE(run_cli("factory linear --c 0.5 --eps 0.2 --p 0.1 --samples 1 --seed 1").exit_code == 2);
  REQUIRE(run_cli("factory linear --c 2 --eps 1.5 --p 0.1 --samples 1 --seed 1").exit_code == 2);
  REQUIRE(run_cli("ar die --seed 1").exit_code == 2);  // missing --samples
  REQUIRE(run_cli("ar die --samples 0 --seed 1").exit_code == 2);
  REQUIRE(run_cli("cftp toy --chain bogus --samples 1 --seed 1").exit_code == 2);
  REQUIRE(run_cli("nonsense").exit_code == 2);
  REQUIRE(run_cli("").exit_code == 2);
}

TEST_CASE("help exits 0") {
  REQUIRE(run_cli("--help").exit_code == 0);
  REQUIRE(run_cli("ar --help").exit_code == 0);
}

TEST_CASE("custom AR samples the conditioned table") {
  const std::string table_path = "cli_test_table.csv";
  {
    std::ofstream table(table_path);
    table << "value,probability\n";
    table << "alpha,0.5\n";
    table << "beta,0.3\n";
    table << "gamma,0.2\n";
  }
  const auto result = run_cli("ar custom --table " + table_path +
                              " --accept-set alpha,beta --samples 2000 --seed 11");
  std::remove(table_path.c_str());
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.output);
  REQUIRE(lines.size() == 2000);
  std::size_t alpha_count = 0;
  for (const auto& line : lines) {
    const auto record = nlohmann::json::parse(line);
    const std::string value = record["value"];
    REQUIRE((value == "alpha" || value == "beta"));
    if (value == "alpha") ++alpha_count;
  }
  // Conditional probability of alpha is 5/8.
  const double freq = static_cast<double>(alpha_count) / 2000.0;
  REQUIRE(std::abs(freq - 0.625) < 4.0 * std::sqrt(0.625 * 0.375 / 2000.0));
}

TEST_CASE("output lands in --out and stays reproducible") {
  const std::string out_path = "cli_test_out.jsonl";
  const auto result =
      run_cli("factory linear --c 2 --eps 0.2 --p 0.4 --samples 20 --seed 5 --out " + out_path);
  REQUIRE(result.exit_code == 0);
  std::ifstream in(out_path);
  REQUIRE(in.good());
  std::stringstream content;
  content << in.rdbuf();
  REQUIRE(lines_of(content.str()).size() == 20);
  std::remove(out_path.c_str());
}

TEST_CASE("verify writes a schema-complete report") {
  const std::string report_path = "cli_test_report.json";
  const auto result = run_cli("verify --suite bounds --seed 8675309 --out " + report_path);
  REQUIRE(result.exit_code == 0);
  std::ifstream in(report_path);
  REQUIRE(in.good());
  const auto report = nlohmann::json::parse(in);
  std::remove(report_path.c_str());
  REQUIRE(report.contains("checks"));
  REQUIRE(report["checks"].size() == 10);  // five sandwich indices, two sides each
  for (const auto& check : report["checks"]) {
    REQUIRE(check.contains("name"));
    REQUIRE(check.contains("statistic"));
    REQUIRE(check.contains("threshold"));
    REQUIRE(check.contains("pass"));
    REQUIRE(check.contains("n"));
    REQUIRE(check.contains("seed"));
    REQUIRE(check["pass"] == true);
  }
}
