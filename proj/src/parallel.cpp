#include "exlab/parallel.hpp"

namespace exlab {

namespace {

std::string describe(const std::vector<ReplicaFailure>& failures) {
  std::string msg = std::to_string(failures.size()) + " replica(s) failed";
  if (!failures.empty()) {
    msg += "; first: replica " + std::to_string(failures.front().replica) + ": " + failures.front().message;
  }
  return msg;
}

}  // namespace

EnsembleError::EnsembleError(std::vector<ReplicaFailure> failures)
    : std::runtime_error(describe(failures)), failures_(std::move(failures)) {}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace exlab
