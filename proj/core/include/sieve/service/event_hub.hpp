#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sieve::service {

// One subscriber's queue. Bounded: a subscriber that falls this far behind
// is closed rather than allowed to block the publisher.
class Subscription {
 public:
  explicit Subscription(std::string run_filter, std::size_t capacity = 4096)
      : filter_(std::move(run_filter)), capacity_(capacity) {}

  // Next message, or nullopt on timeout or once closed and drained.
  std::optional<std::string> next(std::chrono::milliseconds timeout);
  bool closed() const;
  bool overflowed() const;
  const std::string& filter() const { return filter_; }

 private:
  friend class EventHub;
  bool push(std::string msg);  // false on overflow
  void close();

  std::string filter_;  // empty: every run
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool closed_{false};
  bool overflowed_{false};
};

// Fan-out of telemetry to any number of subscribers. The latest machine
// snapshot is kept so a subscriber joining mid-run gets it before any live
// event, with nothing missed in between.
class EventHub {
 public:
  EventHub();

  // `snapshot` is the machine/engine state as of the last published event.
  void publish(const std::string& run_id, const nlohmann::json& event, const nlohmann::json& snapshot);
  void set_snapshot(const nlohmann::json& snapshot);

  std::shared_ptr<Subscription> subscribe(const std::string& run_filter = {});
  // A closed subscription pre-filled with `messages`, for finished runs.
  static std::shared_ptr<Subscription> replay(const std::string& run_id, const std::vector<std::string>& messages);

  void unsubscribe(const std::shared_ptr<Subscription>& s);
  void close_all();
  std::size_t subscriber_count() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  nlohmann::json snapshot_;
};

}  // namespace sieve::service
