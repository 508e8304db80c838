#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "core/envsim.hpp"
#include "core/policies.hpp"

namespace semibandit {

// One logged interaction: the contexts shown, the action the logging policy
// took (0-based here; 1-based on disk) and the observed reward.
struct LogEvent {
  long long t = 0;
  ContextSet contexts;
  int logged_action = 0;
  double reward = 0.0;
};

struct ReplayResult {
  long long matched = 0;          // events accepted into the policy's history
  double total_reward = 0.0;      // G_hat: sum of accepted rewards
  long long events_consumed = 0;  // events read from the stream
  bool truncated = false;         // stream ended before `horizon` matches
};

// Any pull-based stream of events.
using EventSource = std::function<std::optional<LogEvent>()>;

// Writes events in the line format documented in the README: one event per
// line, tab-separated -- t, N, d, action (1-based), reward, then N*d context
// values row-major, all numbers with 17 significant digits so parsing
// reproduces them bitwise.
class LogWriter {
 public:
  explicit LogWriter(std::ostream& out) : out_(out) {}

  void write(const LogEvent& event);
  long long written() const { return written_; }

 private:
  std::ostream& out_;
  long long written_ = 0;
};

// Streaming parser for the log format. Files may be gzip-compressed; plain
// text is detected transparently. Malformed lines raise Error with the
// offending line number; all events in one stream must share (N, d).
class LogReader {
 public:
  explicit LogReader(const std::string& path);
  explicit LogReader(std::unique_ptr<std::istream> stream);
  ~LogReader();

  LogReader(LogReader&&) noexcept;
  LogReader& operator=(LogReader&&) noexcept;
  LogReader(const LogReader&) = delete;
  LogReader& operator=(const LogReader&) = delete;

  std::optional<LogEvent> next();
  long long line_number() const { return line_number_; }

  EventSource as_source() {
    return [this] { return next(); };
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  long long line_number_ = 0;
  int n_arms_ = 0;  // fixed by the first event
  int dim_ = 0;
};

LogEvent parse_log_line(std::string_view line, long long line_number);

// Replays a logged stream against a (possibly learning) policy: an event is
// accepted when the policy's choice matches the logged action, in which case
// the reward is credited, the policy is updated with that round, and the
// match count advances; otherwise the event is discarded with no update.
// Stops after `horizon` matches or at end of stream (flagged as truncated).
// Unbiasedness of total_reward/matched requires a uniform-random logging
// policy.
ReplayResult replay_evaluate(Policy& policy, const EventSource& events,
                             long long horizon);

struct SyntheticLogConfig {
  EnvironmentSpec environment;
  // Replace the Gaussian reward by a {0,1} draw with success probability
  // clamp(nu + b^T mu, 0, 1), for parity with click-style logs.
  bool bernoulli_rewards = false;
};

// Generates `length` events with uniform-random logged actions and rewards
// from the semiparametric model, writing them through `writer`.
long long gen_synthetic_log(const SyntheticLogConfig& config, long long length,
                            Rng& rng, LogWriter& writer);

// In-memory variant of the generator, for evaluation runs that do not need a
// file in between.
EventSource make_synthetic_event_source(const SyntheticLogConfig& config,
                                        Rng& rng);

}  // namespace semibandit
