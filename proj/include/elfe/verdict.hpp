#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace elfe {

// SZS-style outcome of one prover run.
enum class ProverStatus {
  Theorem,
  CounterSatisfiable,
  Satisfiable,
  Unknown,
  Timeout,
  Error
};

std::string_view toString(ProverStatus s);

struct ProverVerdict {
  ProverStatus status = ProverStatus::Unknown;
  // Present only for CounterSatisfiable / Satisfiable.
  std::optional<std::string> model;
  std::chrono::milliseconds elapsed{0};
  // Raw prover output or diagnostics, kept for debugging.
  std::string output;

  bool decisive() const {
    return status == ProverStatus::Theorem ||
           status == ProverStatus::CounterSatisfiable ||
           status == ProverStatus::Satisfiable;
  }
};

}  // namespace elfe
