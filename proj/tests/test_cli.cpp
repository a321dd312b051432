// Drives the holotable executable as an operator would.
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "process.hpp"
#include "scenarios.hpp"

using namespace holotable;
using holotable::testing::spawn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kExe = HOLOTABLE_EXE;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("holotable_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

int listening_port(holotable::testing::Proc& p) {
  const std::string line = p.read_line();  // "listening on 127.0.0.1:PORT"
  const auto colon = line.rfind(':');
  if (line.rfind("listening on ", 0) != 0 || colon == std::string::npos) return -1;
  return std::stoi(line.substr(colon + 1));
}

bool wait_for_log(const fs::path& log, const std::string& needle, int count) {
  for (int i = 0; i < 1000; ++i) {
    int n = 0;
    std::ifstream in(log);
    for (std::string line; std::getline(in, line);) n += line.find(needle) != std::string::npos;
    if (n >= count) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return false;
}

}  // namespace

TEST(Cli, RejectsBadPin) {
  auto p = spawn({kExe, "server", "--pin", "12345"});
  EXPECT_EQ(p.wait(), 1);
  auto q = spawn({kExe, "server", "--pin", "12a456"});
  EXPECT_EQ(q.wait(), 1);
  auto r = spawn({kExe, "server"});  // no PIN anywhere
  EXPECT_EQ(r.wait(), 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(spawn({kExe}).wait(), 0);
  EXPECT_NE(spawn({kExe, "bot"}).wait(), 0);  // --port is required
  EXPECT_NE(spawn({kExe, "bot", "--port", "1", "--script", "x.json", "--random", "4"}).wait(), 0);
  EXPECT_NE(spawn({kExe, "sim"}).wait(), 0);
}

TEST(Cli, SpawnLaunchesSixSeatsThenAdmin) {
  const fs::path dir = scratch("spawn");
  std::ofstream(dir / "cfg.json") << R"({"max_hands": 2, "seed": 3})";
  auto server = spawn({kExe, "server", "--config", (dir / "cfg.json").string(), "--spawn-clients", "--log-dir",
                       dir.string(), "--port", "0"},
                      {"HOLOTABLE_PIN=864200"});
  ASSERT_EQ(server.wait(), 0);

  std::vector<std::string> order;
  std::int64_t first_hand_at = -1, admin_spawn_at = -1;
  std::vector<std::int64_t> spawn_pids;
  for (const json& r : read_jsonl(dir / "server.log")) {
    const std::string ev = r.at("event");
    if (ev == "spawn") {
      order.push_back(r.at("role").get<std::string>() + std::to_string(r.at("index").get<int>()));
      if (r.at("role") == "admin") admin_spawn_at = static_cast<std::int64_t>(order.size());
    }
    if (ev == "seat_join") order.push_back("join" + std::to_string(r.at("seat").get<int>()));
    if (ev == "hand_start" && first_hand_at < 0) first_hand_at = static_cast<std::int64_t>(order.size());
  }
  const std::vector<std::string> expected = {"seat0", "join0", "seat1", "join1", "seat2", "join2", "seat3",
                                             "join3", "seat4", "join4", "seat5", "join5", "admin0"};
  EXPECT_EQ(order, expected);
  EXPECT_EQ(admin_spawn_at, 13);
  EXPECT_EQ(first_hand_at, 13);  // no hand before the admin launch
}

TEST(Cli, BotsReproduceGoldenLog) {
  const auto all = scenarios::all();
  const auto& s = all[0];  // heads-up walk
  ASSERT_EQ(s.name, "heads_up_walk");
  const fs::path dir = scratch("golden");
  std::ofstream(dir / "cfg.json") << R"({"max_hands": 1})";
  for (std::size_t i = 0; i < s.bots.size(); ++i)
    std::ofstream(dir / ("bot" + std::to_string(i) + ".json")) << s.bots[i].to_json().dump();

  auto server = spawn({kExe, "server", "--config", (dir / "cfg.json").string(), "--pin", "111111", "--seats", "2",
                       "--seed", std::to_string(s.config.seed->value), "--log-dir", dir.string()});
  const int port = listening_port(server);
  ASSERT_GT(port, 0);
  std::vector<holotable::testing::Proc> bots;
  for (std::size_t i = 0; i < s.bots.size(); ++i) {
    bots.push_back(spawn({kExe, "bot", "--port", std::to_string(port), "--script",
                          (dir / ("bot" + std::to_string(i) + ".json")).string()}));
    ASSERT_TRUE(wait_for_log(dir / "server.log", "seat_join", static_cast<int>(i) + 1));
  }
  for (auto& b : bots) EXPECT_EQ(b.wait(), 0);
  EXPECT_EQ(server.wait(), 0);
  EXPECT_EQ(scenarios::read_file((dir / "events.jsonl").string()),
            scenarios::read_file(std::string(HOLOTABLE_GOLDEN_DIR) + "/heads_up_walk.jsonl"));
}

TEST(Cli, BotExitCodes) {
  const fs::path dir = scratch("exit");
  auto server = spawn({kExe, "server", "--pin", "111111", "--seats", "2", "--log-dir", dir.string()});
  const int port = listening_port(server);
  ASSERT_GT(port, 0);
  std::ofstream(dir / "seat3.json") << R"({"seat": 3})";
  EXPECT_EQ(spawn({kExe, "bot", "--port", std::to_string(port), "--script", (dir / "seat3.json").string()}).wait(),
            5);  // seat mismatch
  std::ofstream(dir / "bad.json") << R"({"fallback": "bluff"})";
  EXPECT_EQ(spawn({kExe, "bot", "--port", std::to_string(port), "--script", (dir / "bad.json").string()}).wait(), 1);
  ::kill(server.pid, SIGTERM);
  EXPECT_EQ(server.wait(), 0);
  EXPECT_EQ(spawn({kExe, "bot", "--port", std::to_string(port), "--random", "3"}).wait(), 2);
}

TEST(Cli, SimWritesReport) {
  const fs::path dir = scratch("sim");
  auto p = spawn({kExe, "sim", "--hands", "30", "--bots", "random:4", "--seed", "6", "--report",
                  (dir / "report.json").string()});
  const std::string out = p.read_all();
  EXPECT_EQ(p.wait(), 0);
  std::ifstream in(dir / "report.json");
  const json r = json::parse(in);
  EXPECT_EQ(r, json::parse(out));
  EXPECT_EQ(r["hands_played"], 30);
  EXPECT_EQ(r["net"].size(), 4u);
  EXPECT_TRUE(r["violations"].empty());
  EXPECT_EQ(r["digest"].get<std::string>().size(), 64u);

  auto zero = spawn({kExe, "sim", "--hands", "0"});
  const json z = json::parse(zero.read_all());
  EXPECT_EQ(zero.wait(), 0);
  EXPECT_EQ(z["hands_played"], 0);
}

TEST(Cli, AdminShellFromEnvPin) {
  const fs::path dir = scratch("admin");
  auto server = spawn({kExe, "server", "--pin", "222222", "--log-dir", dir.string()});
  const int port = listening_port(server);
  ASSERT_GT(port, 0);
  // stdin is /dev/null: the shell authenticates, then ends at EOF
  auto ok = spawn({kExe, "admin", "--port", std::to_string(port)}, {"HOLOTABLE_PIN=222222"});
  EXPECT_NE(ok.read_all().find("admin session open"), std::string::npos);
  EXPECT_EQ(ok.wait(), 0);
  auto denied = spawn({kExe, "admin", "--port", std::to_string(port), "--pin", "333333"});
  EXPECT_EQ(denied.read_all().rfind("denied: ", 0), 0u);
  EXPECT_EQ(denied.wait(), 3);
  ::kill(server.pid, SIGINT);
  EXPECT_EQ(server.wait(), 0);
}
