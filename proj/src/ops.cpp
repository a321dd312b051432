#include "holotable/ops.hpp"

#include <chrono>
#include <future>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "holotable/audit.hpp"

namespace holotable::ops {

using nlohmann::json;
namespace pr = protocol;

std::string_view to_string(Fallback f) {
  switch (f) {
    case Fallback::kCheckFold: return "check_fold";
    case Fallback::kCallAny: return "call_any";
    case Fallback::kRandom: return "random";
  }
  return "?";
}

namespace {

std::optional<Fallback> parse_fallback(std::string_view s) {
  for (Fallback f : {Fallback::kCheckFold, Fallback::kCallAny, Fallback::kRandom})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

std::optional<Street> parse_street(std::string_view s) {
  for (Street st : {Street::kPreflop, Street::kFlop, Street::kTurn, Street::kRiver, Street::kShowdown, Street::kComplete})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

void bad(const std::string& what) { throw std::invalid_argument("bot script: " + what); }

}  // namespace

BotScript BotScript::from_json(const json& j) {
  if (!j.is_object()) bad("must be an object");
  BotScript s;
  try {
    if (j.contains("seat") && !j.at("seat").is_null()) s.seat = j.at("seat").get<SeatId>();
    if (j.contains("fallback")) {
      auto f = parse_fallback(j.at("fallback").get<std::string>());
      if (!f) bad("unknown fallback " + j.at("fallback").dump());
      s.fallback = *f;
    }
    if (j.contains("random_seed")) s.random_seed = j.at("random_seed").get<std::uint64_t>();
    if (j.contains("steps")) {
      for (const auto& st : j.at("steps")) {
        BotStep step;
        if (st.contains("when")) {
          const auto& w = st.at("when");
          if (w.contains("hand_id")) step.hand_id = w.at("hand_id").get<std::int64_t>();
          if (w.contains("street")) {
            step.street = parse_street(w.at("street").get<std::string>());
            if (!step.street) bad("unknown street " + w.at("street").dump());
          }
        }
        if (!st.contains("action")) bad("step without action");
        const auto& a = st.at("action");
        if (a.is_string() && a.get<std::string>() == "none") {
          step.action = std::nullopt;
        } else {
          auto kind = parse_action_kind(a.at("kind").get<std::string>());
          if (!kind) bad("unknown action kind " + a.at("kind").dump());
          step.action = Action{*kind, a.value("amount", Chips{0})};
        }
        s.steps.push_back(step);
      }
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }
  return s;
}

json BotScript::to_json() const {
  json steps = json::array();
  for (const auto& st : this->steps) {
    json when = json::object();
    if (st.hand_id) when["hand_id"] = *st.hand_id;
    if (st.street) when["street"] = holotable::to_string(*st.street);
    json action = st.action ? json{{"kind", holotable::to_string(st.action->kind)}, {"amount", st.action->amount}}
                            : json("none");
    steps.push_back({{"when", when}, {"action", action}});
  }
  json j = {{"fallback", ops::to_string(fallback)}, {"random_seed", random_seed}, {"steps", steps}};
  j["seat"] = seat ? json(*seat) : json(nullptr);
  return j;
}

Action choose_action(Fallback policy, const std::vector<ActionTemplate>& legal, SplitMix64& rng) {
  auto find = [&](ActionKind k) -> const ActionTemplate* {
    for (const auto& t : legal)
      if (t.kind == k) return &t;
    return nullptr;
  };
  const ActionTemplate* check = find(ActionKind::kCheck);
  if (policy == Fallback::kCheckFold) return check ? Action{ActionKind::kCheck, 0} : Action{ActionKind::kFold, 0};
  if (policy == Fallback::kCallAny) {
    if (check) return {ActionKind::kCheck, 0};
    if (find(ActionKind::kCall)) return {ActionKind::kCall, 0};
    return {ActionKind::kFold, 0};
  }
  // Weighted choice: folding is skipped when checking is free.
  std::vector<std::pair<const ActionTemplate*, std::uint64_t>> options;
  std::uint64_t total = 0;
  for (const auto& t : legal) {
    std::uint64_t w = 0;
    switch (t.kind) {
      case ActionKind::kFold: w = check ? 0 : 1; break;
      case ActionKind::kCheck: w = 3; break;
      case ActionKind::kCall: w = 3; break;
      case ActionKind::kBet: w = 2; break;
      case ActionKind::kRaiseTo: w = 1; break;
    }
    if (w) options.emplace_back(&t, w);
    total += w;
  }
  if (options.empty()) return {ActionKind::kFold, 0};
  std::uint64_t r = rng.below(total);
  const ActionTemplate* pick = options.back().first;
  for (const auto& [t, w] : options) {
    if (r < w) {
      pick = t;
      break;
    }
    r -= w;
  }
  Action a{pick->kind, 0};
  if (pick->kind == ActionKind::kBet || pick->kind == ActionKind::kRaiseTo) {
    const std::uint64_t size = rng.below(10);
    const auto span = static_cast<std::uint64_t>(pick->max - pick->min);
    if (size < 5) a.amount = pick->min;
    else if (size < 8) a.amount = pick->min + static_cast<Chips>(rng.below(span + 1));
    else a.amount = pick->max;
  }
  return a;
}

BotResult run_bot(const std::string& host, int port, const BotScript& script, const BotOptions& options) {
  BotResult res;
  std::optional<Client> client;
  try {
    client.emplace(host, port);
  } catch (const std::system_error& e) {
    res.exit_code = kExitConnect;
    res.error = e.what();
    return res;
  }
  client->on_bytes = options.tap;
  client->send(pr::Hello{pr::Role::kSeat, std::nullopt});

  SplitMix64 rng(script.random_seed);
  std::size_t next_step = 0;
  std::optional<Street> street;
  std::optional<pr::ActionPrompt> pending;
  bool pending_scripted = false;

  auto answer = [&](const Action& a, std::int64_t prompt_id) {
    client->send(pr::SubmitAction{a, prompt_id});
  };

  while (true) {
    Received r = client->receive(1000);
    if (r.status == RecvStatus::kTimeout) continue;
    if (r.status == RecvStatus::kClosed) {
      if (!res.seat) {
        res.exit_code = kExitProtocol;
        res.error = "connection closed before a seat was assigned";
      }
      return res;
    }
    if (r.status == RecvStatus::kProtocolError) {
      res.exit_code = kExitProtocol;
      res.error = r.error;
      return res;
    }
    const pr::Message& m = r.envelope.message;
    if (const auto* w = std::get_if<pr::Welcome>(&m)) {
      res.seat = w->seat_id;
      if (script.seat && w->seat_id != script.seat) {
        res.exit_code = kExitSeatMismatch;
        res.error = "assigned seat " + std::to_string(w->seat_id.value_or(-1)) + ", script expects " +
                    std::to_string(*script.seat);
        return res;
      }
      if (options.on_seated && w->seat_id) options.on_seated(*w->seat_id);
    } else if (const auto* e = std::get_if<pr::Error>(&m)) {
      if (e->code == "table_full") {
        res.exit_code = kExitRefused;
        res.error = e->code;
        return res;
      }
      if (e->code == "shutdown" || e->code == "kicked") return res;
      res.error = e->code + ": " + e->detail;
    } else if (const auto* s = std::get_if<pr::Snapshot>(&m)) {
      street = s->view.street;
    } else if (const auto* ev = std::get_if<pr::EventMsg>(&m)) {
      if (ev->record.type == "hand_end") ++res.hands;
      if (ev->record.type == "timeout" && ev->record.seat == res.seat) ++res.own_timeouts;
    } else if (const auto* p = std::get_if<pr::ActionPrompt>(&m)) {
      ++res.prompts;
      pending = *p;
      pending_scripted = false;
      if (next_step < script.steps.size()) {
        const BotStep& st = script.steps[next_step];
        const bool hand_ok = !st.hand_id || *st.hand_id == p->hand_id;
        const bool street_ok = !st.street || st.street == street;
        if (hand_ok && street_ok) {
          ++next_step;
          if (!st.action) continue;  // let the clock run
          pending_scripted = true;
          answer(*st.action, p->prompt_id);
          continue;
        }
      }
      answer(choose_action(script.fallback, p->legal, rng), p->prompt_id);
    } else if (const auto* ack = std::get_if<pr::ActionAck>(&m)) {
      if (ack->accepted) continue;
      ++res.rejected;
      if (pending_scripted && pending) {
        pending_scripted = false;
        answer(choose_action(script.fallback, pending->legal, rng), pending->prompt_id);
      }
    }
  }
}

// ---------------------------------------------------------------------------

AdminSession::AdminSession(const std::string& host, int port, const std::string& pin, int timeout_ms)
    : client_(host, port) {
  client_.send(pr::Hello{pr::Role::kAdmin, pin});
  while (true) {
    Received r = client_.receive(timeout_ms);
    if (r.status != RecvStatus::kMessage) throw std::runtime_error("no reply from server");
    if (std::holds_alternative<pr::Welcome>(r.envelope.message)) return;
    if (const auto* e = std::get_if<pr::Error>(&r.envelope.message)) throw AdminDenied(e->code, e->detail);
  }
}

pr::AdminResult AdminSession::command(const pr::AdminCmd& cmd, int timeout_ms) {
  client_.send(cmd);
  while (true) {
    Received r = client_.receive(timeout_ms);
    if (r.status == RecvStatus::kTimeout) throw std::runtime_error("timed out waiting for admin_result");
    if (r.status != RecvStatus::kMessage) throw std::runtime_error("connection closed");
    if (const auto* res = std::get_if<pr::AdminResult>(&r.envelope.message)) return *res;
    if (const auto* e = std::get_if<pr::Error>(&r.envelope.message))
      throw std::runtime_error(e->code + ": " + e->detail);
  }
}

std::variant<pr::AdminCmd, std::string> parse_shell_command(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string word;
  in >> word;
  auto ints = [&](int n) -> std::optional<std::vector<std::int64_t>> {
    std::vector<std::int64_t> v;
    for (int i = 0; i < n; ++i) {
      std::int64_t x;
      if (!(in >> x)) return std::nullopt;
      v.push_back(x);
    }
    std::string extra;
    if (in >> extra) return std::nullopt;
    return v;
  };
  if (word == "status") return pr::AdminCmd{"get_status", json::object()};
  if (word == "pause" || word == "resume" || word == "shutdown") return pr::AdminCmd{word, json::object()};
  if (word == "set-blinds") {
    auto v = ints(2);
    if (!v) return std::string("usage: set-blinds SB BB");
    return pr::AdminCmd{"set_blinds", {{"sb", (*v)[0]}, {"bb", (*v)[1]}}};
  }
  if (word == "set-stack") {
    auto v = ints(1);
    if (!v) return std::string("usage: set-stack CHIPS");
    return pr::AdminCmd{"set_starting_stack", {{"stack", (*v)[0]}}};
  }
  if (word == "set-timeout") {
    double secs = 0;
    if (!(in >> secs)) return std::string("usage: set-timeout SECONDS");
    return pr::AdminCmd{"set_timeout", {{"seconds", secs}}};
  }
  if (word == "kick") {
    auto v = ints(1);
    if (!v) return std::string("usage: kick SEAT");
    return pr::AdminCmd{"kick_seat", {{"seat", (*v)[0]}}};
  }
  if (word == "reveal") {
    std::string mode;
    in >> mode;
    if (mode != "on" && mode != "off") return std::string("usage: reveal on|off");
    return pr::AdminCmd{"set_reveal", {{"on", mode == "on"}}};
  }
  if (word == "raw") {
    std::string name, rest;
    in >> name;
    std::getline(in, rest);
    if (name.empty()) return std::string("usage: raw NAME [JSON]");
    json args = json::object();
    if (rest.find_first_not_of(' ') != std::string::npos) {
      args = json::parse(rest, nullptr, false);
      if (args.is_discarded()) return std::string("raw: arguments are not valid JSON");
    }
    return pr::AdminCmd{name, args};
  }
  return std::string("unknown command: " + word + " (try help)");
}

std::string format_status(const json& st) {
  std::ostringstream os;
  const json& cfg = st.at("config");
  os << "phase " << st.value("phase", "?") << "  hand " << st.value("hand_id", 0) << "  hands played "
     << st.value("hands_played", 0) << "\n";
  if (st.contains("hand_blinds"))
    os << "blinds " << st["hand_blinds"]["sb"] << "/" << st["hand_blinds"]["bb"] << " (next hand " << cfg["small_blind"]
       << "/" << cfg["big_blind"] << ")\n";
  else
    os << "blinds " << cfg["small_blind"] << "/" << cfg["big_blind"] << "\n";
  os << "starting stack " << cfg["starting_stack"] << "  timeout " << cfg["action_timeout_ms"] << " ms\n";
  for (const auto& s : st.at("seats")) {
    os << "seat " << s["seat"] << "  ";
    if (!s["occupied"].get<bool>()) {
      os << "empty\n";
      continue;
    }
    os << "stack " << s["stack"] << "  net " << s["net"] << (s["connected"].get<bool>() ? "" : "  disconnected") << "\n";
  }
  if (st.value("pause_pending", false)) os << "pause pending at hand end\n";
  if (st.value("shutdown_pending", false)) os << "shutdown pending at hand end\n";
  return os.str();
}

int admin_shell(const std::string& host, int port, const std::string& pin, std::istream& in, std::ostream& out) {
  std::optional<AdminSession> session;
  try {
    session.emplace(host, port, pin);
  } catch (const AdminDenied& e) {
    out << (e.code == "pin_locked" ? "locked: " : e.code == "pin_denied" ? "denied: " : e.code + ": ") << e.what()
        << "\n";
    return kExitRefused;
  } catch (const std::system_error& e) {
    out << "error: " << e.what() << "\n";
    return kExitConnect;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitProtocol;
  }
  out << "admin session open. Commands: status, set-blinds SB BB, set-stack N, set-timeout S, pause, resume, "
         "kick SEAT, reveal on|off, shutdown, raw NAME [JSON], quit\n";
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line == "quit" || line == "exit") break;
    if (line == "help") {
      out << "status | set-blinds SB BB | set-stack N | set-timeout S | pause | resume | kick SEAT | reveal on|off | "
             "shutdown | raw NAME [JSON] | quit\n";
      continue;
    }
    auto parsed = parse_shell_command(line);
    if (auto* err = std::get_if<std::string>(&parsed)) {
      out << *err << "\n";
      continue;
    }
    const auto& cmd = std::get<pr::AdminCmd>(parsed);
    try {
      const pr::AdminResult r = session->command(cmd);
      if (r.ok && cmd.cmd == "get_status") {
        out << format_status(r.detail);
      } else if (r.ok) {
        out << "ok " << r.detail.dump() << "\n";
      } else {
        out << "rejected: " << r.detail.value("error", "?") << " " << r.detail.value("detail", "") << "\n";
      }
      if (r.ok && cmd.cmd == "shutdown") break;
    } catch (const std::exception& e) {
      out << "error: " << e.what() << "\n";
      return kExitProtocol;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

Chips SimReport::net_sum() const {
  Chips s = 0;
  for (Chips c : net) s += c;
  return s;
}

json SimReport::to_json() const {
  return {{"hands_played", hands_played},
          {"net", net},
          {"net_sum", net_sum()},
          {"violations", violations},
          {"wall_ms", wall_ms},
          {"digest", digest},
          {"events", events},
          {"timeouts", timeouts},
          {"frames_audited", frames_audited},
          {"card_tokens_audited", card_tokens_audited}};
}

std::vector<BotScript> parse_bot_spec(std::string_view spec, std::uint64_t seed) {
  std::vector<BotScript> bots;
  SplitMix64 seeds(seed ^ 0xB07B07B07B07B07BULL);
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string_view item = spec.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    int count = 1;
    if (auto colon = item.find(':'); colon != std::string_view::npos) {
      try {
        count = std::stoi(std::string(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad bot count in " + std::string(item));
      }
      item = item.substr(0, colon);
    }
    auto policy = parse_fallback(item);
    if (!policy) throw std::invalid_argument("unknown bot policy " + std::string(item));
    if (count < 1) throw std::invalid_argument("bot count must be positive");
    for (int i = 0; i < count; ++i) {
      BotScript b;
      b.fallback = *policy;
      b.random_seed = seeds.next();
      bots.push_back(b);
    }
  }
  if (bots.size() < 2 || bots.size() > static_cast<std::size_t>(kMaxSeats))
    throw std::invalid_argument("need between 2 and 6 bots");
  return bots;
}

namespace {

struct PlayHooks {
  std::function<void(ServerRunner&)> before_run;
  std::function<void(std::size_t, std::string_view)> bot_bytes;
  std::function<void(std::string_view)> spectator_bytes;  // set to record a spectator
};

SessionResult play(ServerConfig sc, const std::vector<BotScript>& scripts, const PlayHooks& hooks) {
  if (sc.max_hands <= 0) throw std::invalid_argument("a played session needs max_hands");
  sc.port = 0;
  ServerRunner runner(sc);
  const int port = runner.start();
  SessionResult out;
  runner.event_observer = [&](const Event& e) { out.events.push_back(e); };
  if (hooks.before_run) hooks.before_run(runner);
  std::thread server([&] { runner.run(); });
  std::mutex mu;
  auto problem = [&](std::string p) {
    std::lock_guard lock(mu);
    out.problems.push_back(std::move(p));
  };

  std::thread spectator;
  if (hooks.spectator_bytes) {
    std::promise<void> ready;
    auto fut = ready.get_future();
    spectator = std::thread([&, ready = std::move(ready)]() mutable {
      bool announced = false;
      try {
        Client c(sc.bind_address, port);
        c.on_bytes = hooks.spectator_bytes;
        c.send(pr::Hello{pr::Role::kSpectator, std::nullopt});
        while (true) {
          Received r = c.receive(1000);
          if (r.status == RecvStatus::kMessage && !announced) {
            announced = true;
            ready.set_value();
          }
          if (r.status == RecvStatus::kClosed) break;
          if (r.status == RecvStatus::kProtocolError) {
            problem("spectator: " + r.error);
            break;
          }
        }
      } catch (const std::exception& e) {
        problem(std::string("spectator: ") + e.what());
      }
      if (!announced) ready.set_value();
    });
    fut.wait();
  }

  out.bots.resize(scripts.size());
  std::vector<std::thread> bots;
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    auto seated = std::make_shared<std::promise<void>>();
    auto fut = seated->get_future();
    bots.emplace_back([&, i, seated] {
      BotOptions o;
      if (hooks.bot_bytes) o.tap = [&, i](std::string_view b) { hooks.bot_bytes(i, b); };
      bool signalled = false;
      o.on_seated = [&](SeatId) {
        signalled = true;
        seated->set_value();
      };
      out.bots[i] = run_bot(sc.bind_address, port, scripts[i], o);
      if (!signalled) seated->set_value();
      if (out.bots[i].exit_code != kExitOk) runner.stop();
    });
    if (fut.wait_for(std::chrono::seconds(10)) != std::future_status::ready) {
      problem("bot " + std::to_string(i) + " did not get a seat");
      runner.stop();
      break;
    }
  }
  for (auto& t : bots) t.join();
  if (spectator.joinable()) spectator.join();
  server.join();

  for (std::size_t i = 0; i < out.bots.size(); ++i) {
    if (out.bots[i].exit_code != kExitOk)
      out.problems.push_back("bot " + std::to_string(i) + " exited " + std::to_string(out.bots[i].exit_code) + ": " +
                             out.bots[i].error);
    else if (out.bots[i].seat != static_cast<SeatId>(i))
      out.problems.push_back("bot " + std::to_string(i) + " got seat " +
                             std::to_string(out.bots[i].seat.value_or(-1)));
  }
  out.hands_played = runner.table().hands_played();
  out.net = runner.table().net_chips();
  return out;
}

}  // namespace

SessionResult run_session(ServerConfig config, const std::vector<BotScript>& bots) {
  if (config.min_players < static_cast<int>(bots.size())) config.min_players = static_cast<int>(bots.size());
  return play(std::move(config), bots, {});
}

SimReport simulate(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SimReport report;
  report.net.assign(cfg.bots.size(), 0);
  if (cfg.hands <= 0) {
    report.digest = audit::log_digest({});
    return report;
  }
  if (cfg.bots.size() < 2 || cfg.bots.size() > static_cast<std::size_t>(kMaxSeats))
    throw std::invalid_argument("need between 2 and 6 bots");

  ServerConfig sc;
  sc.pin = "000000";
  sc.table = cfg.table;
  sc.seed = cfg.seed;
  sc.min_players = static_cast<int>(cfg.bots.size());
  sc.max_hands = cfg.hands;
  sc.auto_rebuy = true;
  sc.log_dir = cfg.log_dir;

  std::vector<std::string> server_violations;
  audit::TranscriptAuditor spectator_audit(std::nullopt);
  std::vector<std::unique_ptr<audit::TranscriptAuditor>> auditors;
  for (std::size_t i = 0; i < cfg.bots.size(); ++i)
    auditors.push_back(std::make_unique<audit::TranscriptAuditor>(static_cast<SeatId>(i)));

  PlayHooks hooks;
  hooks.before_run = [&](ServerRunner& runner) {
    runner.table().on_transition = [&](const HandState& h) {
      for (auto& v : audit::check_state(h)) server_violations.push_back(std::move(v));
    };
    runner.table().on_hand_end = [&](const TableServer& t) {
      Chips sum = 0;
      for (Chips c : t.net_chips()) sum += c;
      if (sum != 0)
        server_violations.push_back("hand " + std::to_string(t.hands_played()) + ": net chips sum " +
                                    std::to_string(sum));
    };
  };
  hooks.bot_bytes = [&](std::size_t i, std::string_view b) { auditors[i]->feed(b); };
  hooks.spectator_bytes = [&](std::string_view b) { spectator_audit.feed(b); };

  SessionResult session = play(sc, cfg.bots, hooks);

  report.violations = std::move(server_violations);
  for (auto& p : session.problems) report.violations.push_back(std::move(p));
  auto add_audit = [&](const audit::TranscriptAuditor& a) {
    for (const auto& v : a.violations()) report.violations.push_back(v);
    report.frames_audited += a.frames();
    report.card_tokens_audited += a.card_tokens();
  };
  add_audit(spectator_audit);
  for (const auto& a : auditors) add_audit(*a);
  for (auto& v : audit::replay_verify(session.events)) report.violations.push_back(std::move(v));

  report.hands_played = session.hands_played;
  if (report.hands_played != cfg.hands)
    report.violations.push_back("played " + std::to_string(report.hands_played) + " of " + std::to_string(cfg.hands) +
                                " hands");
  for (std::size_t i = 0; i < cfg.bots.size(); ++i) report.net[i] = session.net[i];
  report.events = static_cast<std::int64_t>(session.events.size());
  for (const auto& e : session.events) report.timeouts += e.type == "timeout";
  report.digest = audit::log_digest(session.events);
  report.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace holotable::ops
