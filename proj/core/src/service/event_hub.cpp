#include "sieve/service/event_hub.hpp"

#include <algorithm>

namespace sieve::service {

using nlohmann::json;

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

bool Subscription::overflowed() const {
  std::lock_guard lock(mu_);
  return overflowed_;
}

bool Subscription::push(std::string msg) {
  bool ok = true;
  {
    std::lock_guard lock(mu_);
    if (closed_) return true;
    if (queue_.size() >= capacity_) {
      overflowed_ = true;
      closed_ = true;
      ok = false;
    } else {
      queue_.push_back(std::move(msg));
    }
  }
  cv_.notify_all();
  return ok;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

EventHub::EventHub() : snapshot_({{"type", "snapshot"}}) {}

void EventHub::publish(const std::string& run_id, const json& event, const json& snapshot) {
  const auto msg = event.dump();
  std::lock_guard lock(mu_);
  snapshot_ = snapshot;
  for (const auto& s : subs_) {
    if (s->filter().empty() || s->filter() == run_id) s->push(msg);
  }
  std::erase_if(subs_, [](const auto& s) { return s->overflowed(); });
}

void EventHub::set_snapshot(const json& snapshot) {
  std::lock_guard lock(mu_);
  snapshot_ = snapshot;
}

std::shared_ptr<Subscription> EventHub::subscribe(const std::string& run_filter) {
  auto s = std::make_shared<Subscription>(run_filter);
  std::lock_guard lock(mu_);
  s->push(snapshot_.dump());
  subs_.push_back(s);
  return s;
}

std::shared_ptr<Subscription> EventHub::replay(const std::string& run_id, const std::vector<std::string>& messages) {
  auto s = std::make_shared<Subscription>(run_id, messages.size() + 1);
  for (const auto& m : messages) s->push(m);
  s->close();
  return s;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscription>& s) {
  std::lock_guard lock(mu_);
  std::erase(subs_, s);
  s->close();
}

void EventHub::close_all() {
  std::lock_guard lock(mu_);
  for (const auto& s : subs_) s->close();
  subs_.clear();
}

std::size_t EventHub::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subs_.size();
}

}  // namespace sieve::service
