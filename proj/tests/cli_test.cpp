#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("KEYRATE_CLI");
  return env ? env : "";
}

int run(const std::string& args) {
  const int status = std::system((cli_path() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "keyrate_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_small_config(const fs::path& p) {
  std::ofstream out(p);
  out << R"({
  "grid": {"k": [3], "sx_exponents": [6, 7]},
  "optimizer": {"restarts": 6, "seed": 3, "max_evals": 1500}
})";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("cli binary is wired into the test environment") {
  REQUIRE_FALSE(cli_path().empty());
  REQUIRE(fs::exists(cli_path()));
}

TEST_CASE("scan: identical config and seed give byte-identical csv") {
  const fs::path dir = temp_dir();
  const fs::path cfg = dir / "small.json";
  write_small_config(cfg);

  const fs::path out1 = dir / "scan1.csv";
  const fs::path out2 = dir / "scan2.csv";
  REQUIRE(run("--config " + cfg.string() + " scan --format csv --out " + out1.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " scan --format csv --out " + out2.string()) == 0);
  const std::string a = slurp(out1);
  const std::string b = slurp(out2);
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("scan csv round-trips numeric fields at full precision") {
  const fs::path dir = temp_dir();
  const fs::path cfg = dir / "small.json";
  write_small_config(cfg);
  const fs::path csv_path = dir / "roundtrip.csv";
  const fs::path json_path = dir / "roundtrip.json";
  REQUIRE(run("--config " + cfg.string() + " scan --format csv --out " + csv_path.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " scan --format json --out " + json_path.string()) ==
          0);

  std::ifstream csv(csv_path);
  std::string header, line;
  REQUIRE(std::getline(csv, header));
  const auto cols = split(header, ',');
  REQUIRE(cols[2] == "rate");

  // the json view carries the same values; parse both and compare to 15
  // significant digits
  const std::string json_text = slurp(json_path);
  std::vector<double> json_rates;
  std::size_t pos = 0;
  while ((pos = json_text.find("\"rate\":", pos)) != std::string::npos) {
    pos += 7;
    json_rates.push_back(std::strtod(json_text.c_str() + pos, nullptr));
  }

  std::size_t row = 0;
  while (std::getline(csv, line)) {
    const auto fields = split(line, ',');
    REQUIRE(fields.size() >= 4);
    const double rate = std::strtod(fields[2].c_str(), nullptr);
    REQUIRE(row < json_rates.size());
    if (json_rates[row] != 0.0) {
      CHECK(std::abs(rate - json_rates[row]) <= 1e-15 * std::abs(json_rates[row]));
    } else {
      CHECK(rate == 0.0);
    }
    ++row;
  }
  CHECK(row == 2);
}

TEST_CASE("config errors exit with code 2") {
  const fs::path dir = temp_dir();
  const fs::path bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  CHECK(run("--config " + bad.string() + " scan") == 2);

  const fs::path badfield = dir / "badfield.json";
  {
    std::ofstream out(badfield);
    out << R"({"security": {"kappa": 2.0}})";
  }
  CHECK(run("--config " + badfield.string() + " scan") == 2);

  CHECK(run("--config /nonexistent/path.json scan") == 2);
  CHECK(run("rate") == 2);  // --mu is required
}

TEST_CASE("rate subcommand evaluates a single point") {
  const fs::path dir = temp_dir();
  const fs::path out = dir / "rate.json";
  REQUIRE(run("rate --mu 0.2,0.1,1e-6 --pmu 0.61,0.27,0.12 --px 0.9 --sx 1e9 --format json"
              " --out " +
              out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"rate\"") != std::string::npos);
  CHECK(text.find("\"feasible\": true") != std::string::npos);
}

TEST_CASE("verify subcommand passes on a small budget") {
  CHECK(run("verify --trials 150 --coverage-trials 1000") == 0);
}
