#pragma once

#include <stdexcept>
#include <string>

namespace otafl {

/// Invalid or inconsistent configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (length mismatch, scheduler overspend, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of a formula (d <= 0, alpha <= 0, empty dataset).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Denoising is impossible because every channel amplitude vanished.
class DegenerateChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No device is active, so there is nothing to aggregate this round.
class NoAggregation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed IDX input; the message carries the file name and byte offset.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf appeared in a model or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace otafl
