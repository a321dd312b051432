// holotable command line: server, admin, bot, sim. Links only the C API.
#include <holotable.h>
#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

// Matches the ops exit statuses.
constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConnect = 2;
constexpr int kExitRefused = 3;
constexpr int kExitProtocol = 4;

int report(ht_status s, const char* what) {
  std::cerr << what << ": " << ht_status_string(s);
  if (*ht_last_error()) std::cerr << ": " << ht_last_error();
  std::cerr << "\n";
  switch (s) {
    case HT_ERR_CONNECT: return kExitConnect;
    case HT_ERR_DENIED:
    case HT_ERR_LOCKED: return kExitRefused;
    case HT_ERR_PROTOCOL: return kExitProtocol;
    default: return kExitFailed;
  }
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pin_from_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("HOLOTABLE_PIN");
  return env ? env : "";
}

struct ServerFlags {
  std::string config_file;
  std::optional<std::string> bind, pin, log_dir;
  std::optional<int> port, seats;
  std::optional<long long> sb, bb, stack, timeout;
  std::optional<unsigned long long> seed;
  bool spawn = false;
};

int run_server(const ServerFlags& f) {
  json cfg = json::object();
  if (!f.config_file.empty()) {
    auto text = read_file(f.config_file);
    if (!text) {
      std::cerr << "cannot read " << f.config_file << "\n";
      return kExitFailed;
    }
    try {
      cfg = json::parse(*text);
    } catch (const json::exception& e) {
      std::cerr << f.config_file << ": " << e.what() << "\n";
      return kExitFailed;
    }
  }
  if (!cfg.contains("pin"))
    if (const char* env = std::getenv("HOLOTABLE_PIN")) cfg["pin"] = env;
  if (f.bind) cfg["bind"] = *f.bind;
  if (f.pin) cfg["pin"] = *f.pin;
  if (f.log_dir) cfg["log_dir"] = *f.log_dir;
  if (f.port) cfg["port"] = *f.port;
  if (f.seats) cfg["seats"] = *f.seats;
  if (f.sb) cfg["sb"] = *f.sb;
  if (f.bb) cfg["bb"] = *f.bb;
  if (f.stack) cfg["stack"] = *f.stack;
  if (f.timeout) cfg["timeout"] = *f.timeout;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.spawn) cfg["spawn_clients"] = true;

  ht_server* server = nullptr;
  if (ht_status s = ht_server_create(cfg.dump().c_str(), &server); s != HT_OK) return report(s, "config");

  // Signals are taken synchronously on a helper thread that asks the loop to stop.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  int port = 0;
  if (ht_status s = ht_server_start(server, &port); s != HT_OK) {
    ht_server_destroy(server);
    return report(s, "start");
  }
  char* info = nullptr;
  if (ht_server_info(server, &info) == HT_OK) {
    const json j = json::parse(info);
    std::cout << "listening on " << j["bind"].get<std::string>() << ":" << port << "\n"
              << "events log " << j["events_log"].get<std::string>() << "\n"
              << "server log " << j["server_log"].get<std::string>() << std::endl;
    ht_string_free(info);
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (sig != 0) ht_server_stop(server);
  });
  const ht_status s = ht_server_run(server);
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  ht_server_destroy(server);
  return s == HT_OK ? kExitOk : report(s, "server");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holotable: six-seat hold'em table server and tools"};
  app.require_subcommand(1);

  ServerFlags sf;
  auto* server = app.add_subcommand("server", "run the table server");
  server->add_option("--config", sf.config_file, "JSON config file; flags override it");
  server->add_option("--bind", sf.bind, "IPv4 address to listen on (default 127.0.0.1)");
  server->add_option("--port", sf.port, "TCP port, 0 for ephemeral");
  server->add_option("--pin", sf.pin, "admin PIN, 6 digits (or HOLOTABLE_PIN)");
  server->add_option("--seats", sf.seats, "seat count, 2..6 (default 6)");
  server->add_option("--sb", sf.sb, "small blind");
  server->add_option("--bb", sf.bb, "big blind");
  server->add_option("--stack", sf.stack, "starting stack");
  server->add_option("--timeout", sf.timeout, "action timeout in seconds");
  server->add_option("--seed", sf.seed, "shuffle seed");
  server->add_flag("--spawn-clients", sf.spawn, "launch one bot per seat, then the admin shell");
  server->add_option("--log-dir", sf.log_dir, "directory for events.jsonl and server.log");

  std::string host = "127.0.0.1";
  int port = 0;
  std::string pin;
  auto* admin = app.add_subcommand("admin", "interactive admin shell");
  admin->add_option("--host", host, "server address");
  admin->add_option("--port", port, "server port")->required();
  admin->add_option("--pin", pin, "admin PIN (or HOLOTABLE_PIN)");

  std::string script_file, fallback;
  std::optional<unsigned long long> random_seed;
  auto* bot = app.add_subcommand("bot", "play one seat");
  bot->add_option("--host", host, "server address");
  bot->add_option("--port", port, "server port")->required();
  auto* script_opt = bot->add_option("--script", script_file, "bot script JSON file");
  bot->add_option("--random", random_seed, "play randomly with this seed")->excludes(script_opt);
  bot->add_option("--fallback", fallback, "check_fold | call_any | random")->excludes(script_opt);

  long long hands = 0;
  std::string spec = "random:6", report_file, sim_log_dir;
  unsigned long long sim_seed = 0;
  auto* sim = app.add_subcommand("sim", "self-play simulation with invariant checks");
  sim->add_option("--hands", hands, "hands to play")->required();
  sim->add_option("--bots", spec, "bot spec, e.g. random:6 or check_fold:2,random:4");
  sim->add_option("--seed", sim_seed, "server seed; bot seeds derive from it");
  sim->add_option("--report", report_file, "write the JSON report here");
  sim->add_option("--log-dir", sim_log_dir, "keep events.jsonl and server.log here");

  CLI11_PARSE(app, argc, argv);

  if (*server) return run_server(sf);

  if (*admin) {
    pin = pin_from_env(pin);
    if (pin.empty()) {
      std::cout << "PIN: " << std::flush;
      std::getline(std::cin, pin);
    }
    int code = kExitFailed;
    if (ht_status s = ht_admin_shell(host.c_str(), port, pin.c_str(), &code); s != HT_OK) return report(s, "admin");
    return code;
  }

  if (*bot) {
    json script = json::object();
    if (!script_file.empty()) {
      auto text = read_file(script_file);
      if (!text) {
        std::cerr << "cannot read " << script_file << "\n";
        return kExitFailed;
      }
      try {
        script = json::parse(*text);
      } catch (const json::exception& e) {
        std::cerr << script_file << ": " << e.what() << "\n";
        return kExitFailed;
      }
    } else if (random_seed) {
      script = {{"fallback", "random"}, {"random_seed", *random_seed}};
    }
    if (!fallback.empty()) script["fallback"] = fallback;
    char* result = nullptr;
    int code = kExitFailed;
    if (ht_status s = ht_bot_run(host.c_str(), port, script.dump().c_str(), &result, &code); s != HT_OK)
      return report(s, "bot");
    std::cerr << result << "\n";
    ht_string_free(result);
    return code;
  }

  json cfg = {{"hands", hands}, {"bots", spec}, {"seed", sim_seed}};
  if (!sim_log_dir.empty()) cfg["log_dir"] = sim_log_dir;
  char* out = nullptr;
  if (ht_status s = ht_sim_run(cfg.dump().c_str(), &out); s != HT_OK) return report(s, "sim");
  const json rep = json::parse(out);
  ht_string_free(out);
  const std::string text = rep.dump(2);
  if (!report_file.empty()) {
    std::ofstream f(report_file);
    f << text << "\n";
    if (!f) {
      std::cerr << "cannot write " << report_file << "\n";
      return kExitFailed;
    }
  }
  std::cout << text << "\n";
  return rep.at("violations").empty() && rep.at("net_sum") == 0 ? kExitOk : kExitFailed;
}
