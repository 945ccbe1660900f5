#include "specmon/clock.hpp"

#include <memory>
#include <thread>

#include "specmon/error.hpp"

namespace specmon {

Timestamp WallClock::now() const {
  return std::chrono::time_point_cast<Micros>(std::chrono::system_clock::now());
}

void WallClock::sleep_for(Micros d) { std::this_thread::sleep_for(d); }

Scheduler::TaskId Scheduler::push(Timestamp t, TaskId id, Task task) {
  std::lock_guard lock(mu_);
  queue_.emplace(Key{to_unix_us(t), seq_++}, Entry{id, std::move(task)});
  cv_.notify_all();
  return id;
}

Scheduler::TaskId Scheduler::at(Timestamp t, Task task) {
  TaskId id;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
  }
  return push(t, id, std::move(task));
}

Scheduler::TaskId Scheduler::every(Micros period, Timestamp first, Task task) {
  if (period.count() <= 0) throw InvalidArgument("scheduler: period must be positive");
  TaskId id;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
  }
  auto shared = std::make_shared<Task>(std::move(task));
  auto self = std::make_shared<std::function<void(Timestamp, Timestamp)>>();
  *self = [this, id, period, shared, weak = std::weak_ptr(self)](Timestamp due, Timestamp now) {
    (*shared)(now);
    if (auto s = weak.lock()) {
      const auto next = due + period;
      push(next, id, [s, next](Timestamp n) { (*s)(next, n); });
    }
  };
  // The queue entry owns `self`; the lambda holds only a weak reference to itself.
  return push(first, id, [self, first](Timestamp n) { (*self)(first, n); });
}

Scheduler::TaskId Scheduler::daily(const TimeZone& tz, int hour, Task task) {
  if (hour < 0 || hour > 23) throw InvalidArgument("scheduler: daily hour outside 0..23");
  TaskId id;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
  }
  auto next_occurrence = [tz, hour](Timestamp after) {
    auto d = tz.local_date(after);
    for (int i = 0; i < 3; ++i, d = next_day(d)) {
      auto t = tz.local_time(d, hour);
      if (t >= after) return t;
    }
    return tz.local_time(d, hour);
  };
  auto shared = std::make_shared<Task>(std::move(task));
  auto self = std::make_shared<std::function<void(Timestamp)>>();
  *self = [this, id, shared, next_occurrence, weak = std::weak_ptr(self)](Timestamp now) {
    (*shared)(now);
    if (auto s = weak.lock()) push(next_occurrence(now + Micros{1}), id, [s](Timestamp n) { (*s)(n); });
  };
  return push(next_occurrence(now()), id, [self](Timestamp n) { (*self)(n); });
}

void Scheduler::cancel(TaskId id) {
  std::lock_guard lock(mu_);
  cancelled_.insert(id);
}

void Scheduler::stop() {
  stop_.store(true);
  std::lock_guard lock(mu_);
  cv_.notify_all();
}

std::size_t Scheduler::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

bool Scheduler::wait_until(Timestamp t) {
  if (clock_.simulated()) {
    auto& manual = static_cast<ManualClock&>(clock_);
    const auto prev = manual.now();
    if (acceleration_ > 0.0 && t > prev) {
      const auto real = std::chrono::duration<double, std::micro>(static_cast<double>((t - prev).count()) / acceleration_);
      std::unique_lock lock(mu_);
      cv_.wait_for(lock, real, [this] { return stop_.load(); });
    }
    if (stop_.load()) return false;
    if (t > manual.now()) manual.set(t);
    return true;
  }
  std::unique_lock lock(mu_);
  if (t - clock_.now() > 100 * 365 * kDay) {
    // "Forever": the nanosecond system clock cannot represent the deadline.
    cv_.wait(lock, [this] { return stop_.load(); });
    return false;
  }
  const auto deadline = std::chrono::system_clock::time_point(t.time_since_epoch());
  cv_.wait_until(lock, deadline, [this] { return stop_.load(); });
  return !stop_.load();
}

void Scheduler::run_until(Timestamp end) {
  stop_.store(false);
  while (!stop_.load()) {
    Key key;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty() || queue_.begin()->first.at_us >= to_unix_us(end)) break;
      key = queue_.begin()->first;
    }
    if (!wait_until(from_unix_us(key.at_us))) return;
    Entry entry;
    {
      std::lock_guard lock(mu_);
      auto it = queue_.find(key);
      if (it == queue_.end()) continue;
      entry = std::move(it->second);
      queue_.erase(it);
      if (cancelled_.count(entry.id)) continue;
    }
    entry.task(clock_.now());
  }
  if (!stop_.load()) wait_until(end);
}

}  // namespace specmon
