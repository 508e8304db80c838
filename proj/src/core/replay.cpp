#include "core/replay.hpp"

#include "core/textio.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace semibandit {

namespace {

[[noreturn]] void line_error(long long line_number, const std::string& what) {
  fail(ErrorCode::parse_error,
       "log line " + std::to_string(line_number) + ": " + what);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, long long line_number, const char* what) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    line_error(line_number, std::string("cannot parse ") + what);
  return value;
}

}  // namespace

void LogWriter::write(const LogEvent& event) {
  const int n = event.contexts.n_arms();
  const int d = event.contexts.dim();
  require(event.logged_action >= 0 && event.logged_action < n,
          ErrorCode::invalid_argument, "log write: action out of range");
  out_ << event.t << '\t' << n << '\t' << d << '\t'
       << (event.logged_action + 1) << '\t' << format_g17(event.reward);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out_ << '\t' << format_g17(event.contexts.rows()(i, j));
  out_ << '\n';
  require(out_.good(), ErrorCode::io_error, "log write: sink failure");
  ++written_;
}

LogEvent parse_log_line(std::string_view line, long long line_number) {
  const auto fields = split_tabs(line);
  if (fields.size() < 5) line_error(line_number, "expected at least 5 fields");
  const auto t = parse_field<long long>(fields[0], line_number, "t");
  const auto n = parse_field<int>(fields[1], line_number, "N");
  const auto d = parse_field<int>(fields[2], line_number, "d");
  if (n < 1 || d < 1) line_error(line_number, "N and d must be positive");
  const auto action = parse_field<int>(fields[3], line_number, "action");
  if (action < 1 || action > n)
    line_error(line_number, "action " + std::to_string(action) +
                                " outside [1.." + std::to_string(n) + "]");
  const auto reward = parse_field<double>(fields[4], line_number, "reward");
  const size_t expected = 5 + static_cast<size_t>(n) * static_cast<size_t>(d);
  if (fields.size() != expected)
    line_error(line_number,
               "expected " + std::to_string(expected) + " fields, got " +
                   std::to_string(fields.size()));
  Eigen::MatrixXd rows(n, d);
  size_t k = 5;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      rows(i, j) = parse_field<double>(fields[k++], line_number, "context value");
  try {
    return LogEvent{t, ContextSet(std::move(rows)), action - 1, reward};
  } catch (const Error& e) {
    line_error(line_number, e.what());
  }
}

struct LogReader::Impl {
  gzFile gz = nullptr;
  std::unique_ptr<std::istream> stream;
  std::string path;

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }

  // Returns false at end of input.
  bool next_line(std::string& line) {
    if (stream) return static_cast<bool>(std::getline(*stream, line));
    line.clear();
    char buf[1 << 16];
    while (true) {
      if (gzgets(gz, buf, sizeof(buf)) == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(gz, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
          fail(ErrorCode::io_error, "log read failed (" + path + "): " + msg);
        return !line.empty();
      }
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
  }
};

LogReader::LogReader(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  // zlib reads uncompressed files transparently through the same handle.
  impl_->gz = gzopen(path.c_str(), "rb");
  require(impl_->gz != nullptr, ErrorCode::io_error,
          "cannot open log file: " + path);
}

LogReader::LogReader(std::unique_ptr<std::istream> stream)
    : impl_(std::make_unique<Impl>()) {
  impl_->stream = std::move(stream);
}

LogReader::~LogReader() = default;
LogReader::LogReader(LogReader&&) noexcept = default;
LogReader& LogReader::operator=(LogReader&&) noexcept = default;

std::optional<LogEvent> LogReader::next() {
  std::string line;
  while (true) {
    if (!impl_->next_line(line)) return std::nullopt;
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LogEvent event = parse_log_line(line, line_number_);
    if (n_arms_ == 0) {
      n_arms_ = event.contexts.n_arms();
      dim_ = event.contexts.dim();
    } else if (event.contexts.n_arms() != n_arms_ ||
               event.contexts.dim() != dim_) {
      fail(ErrorCode::parse_error,
           "log line " + std::to_string(line_number_) +
               ": event shape changed mid-stream");
    }
    return event;
  }
}

ReplayResult replay_evaluate(Policy& policy, const EventSource& events,
                             long long horizon) {
  require(horizon >= 1, ErrorCode::invalid_argument,
          "replay: horizon must be >= 1");
  ReplayResult result;
  while (result.matched < horizon) {
    std::optional<LogEvent> event = events();
    if (!event) {
      result.truncated = true;
      break;
    }
    ++result.events_consumed;
    const SelectResult sel = policy.select(event->contexts);
    if (sel.arm != event->logged_action) continue;  // discard, no update
    result.total_reward += event->reward;
    policy.update(event->contexts, sel, event->reward);
    ++result.matched;
  }
  return result;
}

namespace {

LogEvent synth_event(const SyntheticLogConfig& config, long long t, Rng& rng) {
  const EnvironmentSpec& spec = config.environment;
  ContextSet contexts = gen_contexts(spec, rng);
  const Vec values = contexts.rows() * spec.mu;
  const double optimal = values.maxCoeff();
  const double nu = nu_value(spec, t, optimal);
  const int action = rng.uniform_int(spec.n_arms);
  double reward;
  if (config.bernoulli_rewards) {
    const double p = std::min(1.0, std::max(0.0, nu + values[action]));
    reward = rng.bernoulli(p) ? 1.0 : 0.0;
  } else {
    const double mean = nu + values[action];
    reward = spec.sigma > 0.0 ? mean + spec.sigma * rng.normal() : mean;
  }
  return LogEvent{t, std::move(contexts), action, reward};
}

}  // namespace

long long gen_synthetic_log(const SyntheticLogConfig& config, long long length,
                            Rng& rng, LogWriter& writer) {
  require(length >= 0, ErrorCode::invalid_argument,
          "gen_synthetic_log: negative length");
  config.environment.validate();
  for (long long t = 1; t <= length; ++t) writer.write(synth_event(config, t, rng));
  return length;
}

EventSource make_synthetic_event_source(const SyntheticLogConfig& config,
                                        Rng& rng) {
  config.environment.validate();
  auto t = std::make_shared<long long>(0);
  return [config, &rng, t]() -> std::optional<LogEvent> {
    ++*t;
    return synth_event(config, *t, rng);
  };
}

}  // namespace semibandit
