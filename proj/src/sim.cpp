#include "sim.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "errors.hpp"
#include "rng.hpp"
#include "stream.hpp"

namespace trafficforge {

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::Scan:
      return "SCAN";
    case Stage::Report:
      return "REPORT";
    case Stage::Download:
      return "DOWNLOAD";
    case Stage::C2:
      return "C2";
    case Stage::GeneratedBenign:
      return "GENERATED_BENIGN";
  }
  return "SCAN";
}

bool stage_from_name(const std::string& name, Stage& out) {
  if (name == "SCAN") out = Stage::Scan;
  else if (name == "REPORT") out = Stage::Report;
  else if (name == "DOWNLOAD") out = Stage::Download;
  else if (name == "C2") out = Stage::C2;
  else if (name == "GENERATED_BENIGN") out = Stage::GeneratedBenign;
  else return false;
  return true;
}

std::string serialize_truth(const TruthRecord& rec) {
  nlohmann::ordered_json j;
  j["uid"] = rec.uid;
  j["stage"] = stage_name(rec.stage);
  j["actor"] = rec.actor;
  j["note"] = rec.note;
  return j.dump();
}

TruthRecord parse_truth(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw malformed_line(std::string("truth record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("uid") || !j.contains("stage") ||
      !j.contains("actor"))
    throw malformed_line("truth record needs uid, stage and actor");
  TruthRecord rec;
  rec.uid = j["uid"].get<std::string>();
  if (!stage_from_name(j["stage"].get<std::string>(), rec.stage))
    throw malformed_line("truth record has unknown stage \"" +
                         j["stage"].get<std::string>() + "\"");
  rec.actor = j["actor"].get<std::string>();
  if (j.contains("note")) rec.note = j["note"].get<std::string>();
  return rec;
}

std::string SimSummary::to_json() const {
  nlohmann::ordered_json j;
  j["rng_seed"] = rng_seed;
  j["duration"] = duration;
  j["start_ts"] = start_ts;
  j["pool_size"] = pool_size;
  j["total_records"] = total_records;
  j["final_infected"] = final_infected;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [name, n] : stage_counts) counts[name] = n;
  j["stage_counts"] = std::move(counts);
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& [t, n] : infection_series)
    series.push_back(nlohmann::ordered_json::array({t, n}));
  j["infection_series"] = std::move(series);
  return j.dump(2) + "\n";
}

namespace {

enum class Ev {
  ScanTick,
  Brute,
  Report,
  Download,
  C2Join,
  C2Refresh,
  BenignTick,
};

struct Event {
  int64_t t_us = 0;
  uint64_t seq = 0;
  Ev kind = Ev::ScanTick;
  uint32_t node = 0;  // acting IP
  uint32_t peer = 0;  // victim / counterpart IP
  int attempt = 0;
  int total = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t_us != b.t_us) return a.t_us > b.t_us;
    return a.seq > b.seq;
  }
};

struct Creds {
  std::string user;
  std::string pass;
};

constexpr char kAlnum[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, const SimSinks& sinks)
      : cfg_(cfg),
        sinks_(sinks),
        rng_(cfg.rng_seed),
        duration_us_(std::llround(cfg.duration * 1e6)),
        start_ts_us_(std::llround(cfg.start_ts * 1e6)),
        population_(cfg.benign_population()) {}

  SimSummary run() {
    summary_.rng_seed = cfg_.rng_seed;
    summary_.duration = cfg_.duration;
    summary_.start_ts = cfg_.start_ts;
    summary_.pool_size = cfg_.pool.size();

    for (const IpAddr& seed : cfg_.seed_bots) infected_.insert(seed.v4_value());
    summary_.infection_series.emplace_back(0.0,
                                           static_cast<int>(infected_.size()));
    for (const IpAddr& seed : cfg_.seed_bots)
      push(us(rng_.uniform(0.0, 2.0)), Ev::C2Join, seed.v4_value());

    bool benign_on = cfg_.browse_rate + cfg_.search_rate > 0 &&
                     !population_.empty() && cfg_.delay_max > 0;
    if (benign_on)
      for (uint32_t node : cfg_.pool)
        push(us(rng_.uniform(cfg_.delay_min, cfg_.delay_max)), Ev::BenignTick,
             node);

    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.t_us >= duration_us_) break;
      queue_.pop();
      now_us_ = ev.t_us;
      dispatch(ev);
    }

    summary_.final_infected = static_cast<int>(infected_.size());
    return summary_;
  }

 private:
  int64_t us(double seconds) const {
    int64_t v = std::llround(seconds * 1e6);
    return v < 1 ? 1 : v;
  }

  void push(int64_t t_us, Ev kind, uint32_t node, uint32_t peer = 0,
            int attempt = 0, int total = 0) {
    queue_.push(Event{t_us, seq_++, kind, node, peer, attempt, total});
  }

  void push_in(double seconds, Ev kind, uint32_t node, uint32_t peer = 0,
               int attempt = 0, int total = 0) {
    push(now_us_ + us(seconds), kind, node, peer, attempt, total);
  }

  std::string random_word(int len) {
    std::string word(static_cast<size_t>(len), '\0');
    for (auto& c : word) c = kAlnum[rng_.below(sizeof(kAlnum) - 1)];
    return word;
  }

  uint32_t sample_target(uint32_t self) {
    for (int tries = 0; tries < 10000; ++tries) {
      uint32_t addr = cfg_.allowed.at(rng_.below(cfg_.allowed.size()));
      if (addr == self) continue;
      if (cfg_.excluded.contains_u32(addr)) continue;
      if (cfg_.is_infra(addr)) continue;
      return addr;
    }
    throw config_violation(
        "scan target sampling starved; allowed_scan_ranges too constrained");
  }

  struct Shape {
    std::string conn_state;
    std::string history;
    std::optional<double> duration;
    std::optional<int64_t> orig_bytes;
    std::optional<int64_t> resp_bytes;
    std::optional<int64_t> orig_pkts;
    std::optional<int64_t> resp_pkts;
    std::optional<std::string> service;
  };

  void emit(uint32_t orig, uint32_t resp, uint16_t resp_p, const Shape& shape,
            Stage stage, std::string note) {
    ConnRecord rec;
    rec.ts_us = start_ts_us_ + now_us_;
    rec.uid = make_uid(rng_.next_u64(), rng_.next_u64());
    rec.orig_h = IpAddr::v4(orig);
    rec.orig_p = static_cast<uint16_t>(1024 + rng_.below(64512));
    rec.resp_h = IpAddr::v4(resp);
    rec.resp_p = resp_p;
    rec.proto = Proto::Tcp;
    rec.service = shape.service;
    if (shape.duration) rec.duration_us = us(*shape.duration);
    rec.orig_bytes = shape.orig_bytes;
    rec.resp_bytes = shape.resp_bytes;
    rec.conn_state = shape.conn_state;
    rec.history = shape.history;
    rec.orig_pkts = shape.orig_pkts;
    rec.resp_pkts = shape.resp_pkts;
    sinks_.record(rec);

    TruthRecord truth;
    truth.uid = rec.uid;
    truth.stage = stage;
    truth.actor = rec.orig_h.to_string();
    truth.note = std::move(note);
    sinks_.truth(truth);

    ++summary_.total_records;
    ++summary_.stage_counts[stage_name(stage)];
  }

  Shape completed_shape(double dur, double ob, double rb) {
    Shape s;
    s.conn_state = "SF";
    s.history = "ShADadFf";
    s.duration = dur;
    s.orig_bytes = std::llround(ob);
    s.resp_bytes = std::llround(rb);
    s.orig_pkts = 3 + *s.orig_bytes / 1000 + std::llround(dur / 30.0);
    s.resp_pkts = 2 + *s.resp_bytes / 1200 + std::llround(dur / 30.0);
    return s;
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Ev::ScanTick:
        scan_tick(ev.node);
        break;
      case Ev::Brute:
        brute(ev.node, ev.peer, ev.attempt, ev.total);
        break;
      case Ev::Report:
        report(ev.node, ev.peer);
        break;
      case Ev::Download:
        download(ev.node);
        break;
      case Ev::C2Join:
        keepalive(ev.node);
        push_in(rng_.exponential(1.0 / cfg_.scan_rate), Ev::ScanTick, ev.node);
        break;
      case Ev::C2Refresh:
        keepalive(ev.node);
        break;
      case Ev::BenignTick:
        benign_tick(ev.node);
        break;
    }
  }

  void scan_tick(uint32_t node) {
    uint32_t target = sample_target(node);
    uint16_t port = rng_.below(2) == 0 ? 23 : 2323;

    if (cfg_.in_pool(target) && !infected_.count(target) &&
        !pending_.count(target)) {
      // Fresh vulnerable node: the probe completes and a brute-force chain
      // begins.  Marking it pending immediately keeps two scanners from
      // discovering the same victim.
      Shape s = completed_shape(rng_.uniform(0.4, 1.5), rng_.uniform(10, 40),
                                rng_.uniform(20, 80));
      emit(node, target, port, s, Stage::Scan, "probe open");
      pending_.insert(target);
      chains_[target] =
          Creds{random_word(cfg_.username_len), random_word(cfg_.password_len)};
      int attempts = 3 + static_cast<int>(rng_.below(3));
      double at = 0.0;
      for (int k = 1; k <= attempts; ++k) {
        at += rng_.uniform(0.8, 2.5);
        push(now_us_ + us(at), Ev::Brute, node, target, k, attempts);
      }
    } else if (cfg_.in_pool(target)) {
      // Already infected or mid-infection: telnet no longer accepts.
      Shape s;
      s.conn_state = "REJ";
      s.history = "Sr";
      s.duration = rng_.uniform(0.01, 0.1);
      s.orig_bytes = 0;
      s.resp_bytes = 0;
      s.orig_pkts = 1;
      s.resp_pkts = 1;
      emit(node, target, port, s, Stage::Scan, "probe taken");
    } else if (rng_.chance(cfg_.dial_success_prob)) {
      Shape s;
      s.conn_state = "REJ";
      s.history = "Sr";
      s.duration = rng_.uniform(0.01, 0.1);
      s.orig_bytes = 0;
      s.resp_bytes = 0;
      s.orig_pkts = 1;
      s.resp_pkts = 1;
      emit(node, target, port, s, Stage::Scan, "probe refused");
    } else {
      Shape s;
      s.conn_state = "S0";
      s.history = "S";
      s.duration = rng_.uniform(2.5, 3.5);  // SYN retry window
      s.orig_bytes = 0;
      s.resp_bytes = 0;
      s.orig_pkts = 2;
      s.resp_pkts = 0;
      emit(node, target, port, s, Stage::Scan, "probe silent");
    }

    push_in(rng_.exponential(1.0 / cfg_.scan_rate), Ev::ScanTick, node);
  }

  void brute(uint32_t attacker, uint32_t victim, int attempt, int total) {
    Shape s = completed_shape(rng_.uniform(1.0, 3.0), rng_.uniform(40, 120),
                              rng_.uniform(60, 200));
    bool final = attempt == total;
    Creds creds = final ? chains_[victim]
                        : Creds{random_word(cfg_.username_len),
                                random_word(cfg_.password_len)};
    std::string note = (final ? "brute success user=" : "brute attempt user=") +
                       creds.user + " pass=" + creds.pass;
    emit(attacker, victim, 23, s, Stage::Scan, note);
    if (final) push_in(rng_.uniform(0.5, 2.0), Ev::Report, attacker, victim);
  }

  void report(uint32_t finder, uint32_t victim) {
    Shape s = completed_shape(rng_.uniform(0.05, 0.3), rng_.uniform(60, 180),
                              rng_.uniform(20, 60));
    emit(finder, cfg_.report_server.ip.v4_value(), cfg_.report_server.port, s,
         Stage::Report, "victim=" + IpAddr::v4(victim).to_string());
    push_in(rng_.uniform(1.0, 3.0), Ev::Download, victim);
  }

  void download(uint32_t victim) {
    Shape s = completed_shape(rng_.uniform(1.0, 8.0), rng_.uniform(120, 300),
                              rng_.lognormal(std::log(110000.0), 0.35));
    s.service = "http";
    emit(victim, cfg_.loader.ip.v4_value(), cfg_.loader.port, s,
         Stage::Download, "fetched binary");

    infected_.insert(victim);
    pending_.erase(victim);
    chains_.erase(victim);
    summary_.infection_series.emplace_back(
        static_cast<double>(now_us_) / 1e6, static_cast<int>(infected_.size()));

    push_in(rng_.uniform(0.5, 2.0), Ev::C2Join, victim);
  }

  void keepalive(uint32_t bot) {
    double dur = rng_.lognormal(std::log(1800.0), 0.4);
    Shape s = completed_shape(dur, rng_.uniform(80, 400), rng_.uniform(80, 400));
    emit(bot, cfg_.c2_server.ip.v4_value(), cfg_.c2_server.port, s, Stage::C2,
         "keepalive");
    push(now_us_ + us(dur) + us(rng_.uniform(1.0, 10.0)), Ev::C2Refresh, bot);
  }

  void benign_tick(uint32_t node) {
    double w = cfg_.browse_rate + cfg_.search_rate;
    bool browse = rng_.uniform01() < cfg_.browse_rate / w;
    if (browse) {
      uint32_t target = population_[rng_.below(population_.size())];
      bool tls = rng_.chance(0.7);
      Shape s = completed_shape(rng_.lognormal(std::log(4.0), 0.8),
                                rng_.lognormal(std::log(800.0), 0.6),
                                rng_.lognormal(std::log(40000.0), 1.0));
      s.service = tls ? "ssl" : "http";
      emit(node, target, tls ? 443 : 80, s, Stage::GeneratedBenign, "browse");
    } else {
      size_t engines = population_.size() < 5 ? population_.size() : 5;
      uint32_t target = population_[rng_.below(engines)];
      Shape s = completed_shape(rng_.lognormal(std::log(2.0), 0.5),
                                rng_.lognormal(std::log(600.0), 0.4),
                                rng_.lognormal(std::log(15000.0), 0.8));
      s.service = "ssl";
      emit(node, target, 443, s, Stage::GeneratedBenign, "search");
    }
    push_in(std::max(0.001, rng_.uniform(cfg_.delay_min, cfg_.delay_max)),
            Ev::BenignTick, node);
  }

  const ScenarioConfig& cfg_;
  const SimSinks& sinks_;
  SimRng rng_;
  int64_t duration_us_;
  int64_t start_ts_us_;
  std::vector<uint32_t> population_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  uint64_t seq_ = 0;
  int64_t now_us_ = 0;

  std::unordered_set<uint32_t> infected_;
  std::unordered_set<uint32_t> pending_;
  std::unordered_map<uint32_t, Creds> chains_;
  SimSummary summary_;
};

}  // namespace

SimSummary run_simulation(const ScenarioConfig& config, const SimSinks& sinks) {
  config.validate();
  Simulation sim(config, sinks);
  return sim.run();
}

SimulateResult simulate_to_dir(const ScenarioConfig& config,
                               const std::string& out_dir, LogFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw io_failure("cannot create directory " + out_dir);

  SimulateResult result;
  result.conn_path =
      out_dir + (format == LogFormat::ZeekTsv ? "/conn.log" : "/conn.json");
  result.truth_path = out_dir + "/truth.jsonl";
  result.summary_path = out_dir + "/summary.json";

  {
    ConnWriter conn(result.conn_path, format, Compression::None,
                    LogSchema::default_conn());
    LineWriter truth(result.truth_path, Compression::None);
    SimSinks sinks;
    sinks.record = [&](const ConnRecord& rec) { conn.write(rec); };
    sinks.truth = [&](const TruthRecord& rec) {
      truth.write_line(serialize_truth(rec));
    };
    result.summary = run_simulation(config, sinks);
    conn.close();
    truth.close();
  }

  LineWriter summary(result.summary_path, Compression::None);
  std::string json = result.summary.to_json();
  if (!json.empty() && json.back() == '\n') json.pop_back();
  summary.write_line(json);
  summary.close();
  return result;
}

}  // namespace trafficforge
