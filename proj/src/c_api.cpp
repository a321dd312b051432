#include "holotable.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <memory>
#include <system_error>

#include "holotable/net.hpp"
#include "holotable/ops.hpp"

using nlohmann::json;
using namespace holotable;

struct ht_server {
  std::unique_ptr<ServerRunner> runner;
  bool started = false;
};

struct ht_admin {
  std::unique_ptr<ops::AdminSession> session;
};

namespace {

thread_local std::string last_error;

ht_status fail(ht_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

json parse_or_empty(const char* text) {
  if (!text || !*text) return json::object();
  return json::parse(text);
}

// Runs f, mapping exceptions to status codes.
template <typename F>
ht_status guard(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const json::exception& e) {
    return fail(HT_ERR_ARGUMENT, e.what());
  } catch (const ops::AdminDenied& e) {
    return fail(e.code == "pin_locked" ? HT_ERR_LOCKED : HT_ERR_DENIED, e.code + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HT_ERR_CONFIG, e.what());
  } catch (const std::system_error& e) {
    return fail(HT_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HT_ERR_INTERNAL, "unknown exception");
  }
}

json bot_result_json(const ops::BotResult& r) {
  return {{"exit_code", r.exit_code},
          {"seat", r.seat ? json(*r.seat) : json(nullptr)},
          {"prompts", r.prompts},
          {"rejected", r.rejected},
          {"own_timeouts", r.own_timeouts},
          {"hands", r.hands},
          {"error", r.error}};
}

}  // namespace

extern "C" {

int ht_api_version(void) { return HT_API_VERSION; }

const char* ht_status_string(ht_status status) {
  switch (status) {
    case HT_OK: return "ok";
    case HT_ERR_ARGUMENT: return "invalid argument";
    case HT_ERR_CONFIG: return "invalid configuration";
    case HT_ERR_IO: return "i/o error";
    case HT_ERR_CONNECT: return "connection failed";
    case HT_ERR_DENIED: return "access denied";
    case HT_ERR_LOCKED: return "locked out";
    case HT_ERR_PROTOCOL: return "protocol error";
    case HT_ERR_STATE: return "invalid state";
    case HT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ht_last_error(void) { return last_error.c_str(); }

void ht_string_free(char* s) { std::free(s); }

ht_status ht_server_create(const char* config_json, ht_server** out) {
  if (!out) return fail(HT_ERR_ARGUMENT, "out is null");
  *out = nullptr;
  return guard([&] {
    ServerConfig cfg;
    cfg.merge_json(parse_or_empty(config_json));
    auto s = std::make_unique<ht_server>();
    s->runner = std::make_unique<ServerRunner>(std::move(cfg));
    *out = s.release();
    return HT_OK;
  });
}

ht_status ht_server_start(ht_server* server, int* port_out) {
  if (!server) return fail(HT_ERR_ARGUMENT, "server is null");
  if (server->started) return fail(HT_ERR_STATE, "server already started");
  return guard([&] {
    const int port = server->runner->start();
    server->started = true;
    if (port_out) *port_out = port;
    return HT_OK;
  });
}

ht_status ht_server_run(ht_server* server) {
  if (!server) return fail(HT_ERR_ARGUMENT, "server is null");
  if (!server->started) return fail(HT_ERR_STATE, "server not started");
  return guard([&] {
    server->runner->run();
    return HT_OK;
  });
}

ht_status ht_server_stop(ht_server* server) {
  if (!server) return fail(HT_ERR_ARGUMENT, "server is null");
  server->runner->stop();
  return HT_OK;
}

ht_status ht_server_info(ht_server* server, char** info_json) {
  if (!server || !info_json) return fail(HT_ERR_ARGUMENT, "null argument");
  return guard([&] {
    const ServerRunner& r = *server->runner;
    const json info = {{"bind", server->runner->table().config().bind_address},
                       {"port", r.port()},
                       {"events_log", r.events_path()},
                       {"server_log", r.server_log_path()},
                       {"config", server->runner->table().config().to_json()}};
    *info_json = dup(info.dump());
    return HT_OK;
  });
}

void ht_server_destroy(ht_server* server) { delete server; }

ht_status ht_admin_connect(const char* host, int port, const char* pin, ht_admin** out) {
  if (!host || !pin || !out) return fail(HT_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    auto a = std::make_unique<ht_admin>();
    try {
      a->session = std::make_unique<ops::AdminSession>(host, port, pin);
    } catch (const std::system_error& e) {
      return fail(HT_ERR_CONNECT, e.what());
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const ops::AdminDenied*>(&e)) throw;
      return fail(HT_ERR_PROTOCOL, e.what());
    }
    *out = a.release();
    return HT_OK;
  });
}

ht_status ht_admin_command(ht_admin* admin, const char* cmd, const char* args_json, char** result_json) {
  if (!admin || !cmd || !result_json) return fail(HT_ERR_ARGUMENT, "null argument");
  *result_json = nullptr;
  return guard([&] {
    protocol::AdminCmd c{cmd, parse_or_empty(args_json)};
    protocol::AdminResult r;
    try {
      r = admin->session->command(c);
    } catch (const std::runtime_error& e) {
      return fail(HT_ERR_PROTOCOL, e.what());
    }
    *result_json = dup(json{{"ok", r.ok}, {"detail", r.detail}}.dump());
    return HT_OK;
  });
}

void ht_admin_close(ht_admin* admin) { delete admin; }

ht_status ht_admin_shell(const char* host, int port, const char* pin, int* exit_code) {
  if (!host || !pin || !exit_code) return fail(HT_ERR_ARGUMENT, "null argument");
  return guard([&] {
    *exit_code = ops::admin_shell(host, port, pin, std::cin, std::cout);
    return HT_OK;
  });
}

ht_status ht_bot_run(const char* host, int port, const char* script_json, char** result_json, int* exit_code) {
  if (!host) return fail(HT_ERR_ARGUMENT, "host is null");
  return guard([&] {
    const ops::BotScript script = ops::BotScript::from_json(parse_or_empty(script_json));
    const ops::BotResult r = ops::run_bot(host, port, script);
    if (exit_code) *exit_code = r.exit_code;
    if (result_json) *result_json = dup(bot_result_json(r).dump());
    return HT_OK;
  });
}

ht_status ht_sim_run(const char* sim_json, char** report_json) {
  if (!report_json) return fail(HT_ERR_ARGUMENT, "report_json is null");
  *report_json = nullptr;
  return guard([&] {
    const json j = parse_or_empty(sim_json);
    ops::SimConfig cfg;
    cfg.hands = j.value("hands", std::int64_t{0});
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    cfg.seed = Seed{seed};
    cfg.bots = ops::parse_bot_spec(j.value("bots", std::string("random:6")), seed);
    cfg.table.small_blind = j.value("sb", cfg.table.small_blind);
    cfg.table.big_blind = j.value("bb", cfg.table.big_blind);
    cfg.table.starting_stack = j.value("stack", cfg.table.starting_stack);
    if (j.contains("timeout")) cfg.table.action_timeout_ms = j.at("timeout").get<std::int64_t>() * 1000;
    cfg.log_dir = j.value("log_dir", std::string());
    if (cfg.hands < 0) throw std::invalid_argument("hands must be >= 0");
    cfg.table.validate();
    *report_json = dup(ops::simulate(cfg).to_json().dump());
    return HT_OK;
  });
}

}  // extern "C"
