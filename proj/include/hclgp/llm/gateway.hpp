#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"

namespace hclgp::llm {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Usage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  Usage& operator+=(const Usage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend bool operator==(const Usage&, const Usage&) = default;
};

struct CompletionRequest {
  std::vector<Message> messages;
  std::string model;
  int max_output_tokens = 4096;
  // Accounting tags ("agent", "domain"); never sent to a remote backend.
  std::map<std::string, std::string> metadata;

  // All message contents joined by newlines.
  std::string prompt_text() const;
};

struct CompletionResponse {
  std::string text;
  Usage usage;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message,
                          std::optional<Usage> billed = std::nullopt)
      : Error(message), billed_(billed) {}
  // Tokens charged for the failed attempt, if the backend reports any.
  const std::optional<Usage>& billed() const { return billed_; }

 private:
  std::optional<Usage> billed_;
};

class RateLimitError : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedReplyError : public Error {
 public:
  using Error::Error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct LedgerEntry {
  std::string agent;
  std::string domain;
  Usage usage;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct Pricing {
  double per_m_input = 3.0;
  double per_m_output = 15.0;

  static Pricing from(const EngineConfig& c) {
    return {c.price_per_m_input, c.price_per_m_output};
  }
};

// Prices integer token totals in one step so equal totals give equal costs.
double price(const Usage& total, const Pricing& pricing);

// Append-only, thread-safe usage log.
class CostLedger {
 public:
  void record(LedgerEntry entry);
  std::vector<LedgerEntry> entries() const;
  std::size_t size() const;
  Usage totals() const;
  // Totals over the first `n` entries.
  Usage totals_prefix(std::size_t n) const;

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
  Usage totals_;
};

double cost(const CostLedger& ledger, const Pricing& pricing);

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{4000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Routes every completion through one backend and records usage.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<CostLedger> ledger,
          RetryPolicy retry = {}, Sleeper sleep = {});

  // Retries rate-limit errors up to the attempt cap; each billed attempt is
  // recorded. Other errors propagate immediately.
  CompletionResponse complete(const CompletionRequest& request);

  CostLedger& ledger() { return *ledger_; }
  const CostLedger& ledger() const { return *ledger_; }
  std::shared_ptr<CostLedger> ledger_ptr() const { return ledger_; }
  const Backend& backend() const { return *backend_; }

 private:
  void charge(const CompletionRequest& request, const Usage& usage);

  std::shared_ptr<Backend> backend_;
  std::shared_ptr<CostLedger> ledger_;
  RetryPolicy retry_;
  Sleeper sleep_;
};

}  // namespace hclgp::llm
