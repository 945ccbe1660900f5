#include "specmon/ops.hpp"

#include "specmon/error.hpp"

namespace specmon {

std::string_view to_string(FailureType type) {
  switch (type) {
    case FailureType::unreachable:
      return "unreachable";
    case FailureType::collection_stopped:
      return "collection_stopped";
    case FailureType::archive_missing:
      return "archive_missing";
  }
  return "unknown";
}

FailureType parse_failure_type(std::string_view name) {
  if (name == "unreachable") return FailureType::unreachable;
  if (name == "collection_stopped") return FailureType::collection_stopped;
  if (name == "archive_missing") return FailureType::archive_missing;
  throw InvalidArgument("unknown failure type: " + std::string(name));
}

std::string_view to_string(Health health) {
  switch (health) {
    case Health::ok:
      return "ok";
    case Health::failed:
      return "failed";
    case Health::stale:
      return "stale";
    case Health::unknown:
      return "unknown";
  }
  return "unknown";
}

Health parse_health(std::string_view name) {
  if (name == "ok") return Health::ok;
  if (name == "failed") return Health::failed;
  if (name == "stale") return Health::stale;
  if (name == "unknown") return Health::unknown;
  throw InvalidArgument("unknown health value: " + std::string(name));
}

std::string summarize(const SiteStatus& s) {
  const Health all[] = {s.reachability, s.collection, s.archive};
  bool all_ok = true;
  bool all_unknown = true;
  for (Health h : all) {
    all_ok = all_ok && h == Health::ok;
    all_unknown = all_unknown && h == Health::unknown;
  }
  if (all_ok) return "ok";
  if (all_unknown) return "unknown";
  return "degraded";
}

}  // namespace specmon
