#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "specmon/time.hpp"

namespace specmon {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
  /// Used for retry backoff. Simulated clocks do not block.
  virtual void sleep_for(Micros d) = 0;
  virtual bool simulated() const = 0;
};

class WallClock final : public Clock {
 public:
  Timestamp now() const override;
  void sleep_for(Micros d) override;
  bool simulated() const override { return false; }
};

/// Simulated time; moved only by set/advance (usually by a Scheduler).
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_(to_unix_us(start)) {}
  Timestamp now() const override { return from_unix_us(now_.load()); }
  void sleep_for(Micros d) override { slept_ += d.count(); }
  bool simulated() const override { return true; }

  void set(Timestamp t) { now_.store(to_unix_us(t)); }
  void advance(Micros d) { now_.fetch_add(d.count()); }
  Micros total_slept() const { return Micros{slept_.load()}; }

 private:
  std::atomic<std::int64_t> now_;
  std::atomic<std::int64_t> slept_{0};
};

/// Discrete-event scheduler. With a ManualClock it jumps simulated time from event to
/// event, optionally paced at `acceleration` x real time; with a WallClock it sleeps
/// until each event is due. Tasks run on the thread calling run_until.
class Scheduler {
 public:
  using Task = std::function<void(Timestamp now)>;
  using TaskId = std::uint64_t;

  explicit Scheduler(Clock& clock, double acceleration = 0.0) : clock_(clock), acceleration_(acceleration) {}

  Clock& clock() { return clock_; }
  Timestamp now() const { return clock_.now(); }

  TaskId at(Timestamp t, Task task);
  /// First run at `first`, then every `period`.
  TaskId every(Micros period, Timestamp first, Task task);
  /// Every day at local `hour`:00 in `tz`, starting with the next occurrence at or after now.
  TaskId daily(const TimeZone& tz, int hour, Task task);
  void cancel(TaskId id);

  /// Runs every event due strictly before `end`, then leaves the clock at `end`.
  void run_until(Timestamp end);
  void run_for(Micros d) { run_until(now() + d); }
  /// Thread-safe; makes run_until return after the in-flight task.
  void stop();
  bool stopped() const { return stop_.load(); }
  std::size_t pending() const;

 private:
  struct Key {
    std::int64_t at_us;
    std::uint64_t seq;
    auto operator<=>(const Key&) const = default;
  };
  struct Entry {
    TaskId id;
    Task task;
  };
  bool wait_until(Timestamp t);
  TaskId push(Timestamp t, TaskId id, Task task);

  Clock& clock_;
  double acceleration_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<Key, Entry> queue_;
  std::set<TaskId> cancelled_;
  std::uint64_t seq_ = 0;
  TaskId next_id_ = 1;
  std::atomic<bool> stop_{false};
};

}  // namespace specmon
