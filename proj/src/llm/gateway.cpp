#include "hclgp/llm/gateway.hpp"

#include <algorithm>
#include <thread>

namespace hclgp::llm {

std::string CompletionRequest::prompt_text() const {
  std::string out;
  for (size_t i = 0; i < messages.size(); ++i) {
    if (i) out += "\n";
    out += messages[i].content;
  }
  return out;
}

double price(const Usage& total, const Pricing& pricing) {
  double numerator = static_cast<double>(total.input_tokens) * pricing.per_m_input +
                     static_cast<double>(total.output_tokens) * pricing.per_m_output;
  return numerator / 1e6;
}

void CostLedger::record(LedgerEntry entry) {
  if (entry.usage.input_tokens < 0 || entry.usage.output_tokens < 0) {
    throw InvariantError("negative token usage");
  }
  std::lock_guard<std::mutex> lock(mu_);
  totals_ += entry.usage;
  entries_.push_back(std::move(entry));
}

std::vector<LedgerEntry> CostLedger::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::size_t CostLedger::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

Usage CostLedger::totals() const {
  std::lock_guard<std::mutex> lock(mu_);
  return totals_;
}

Usage CostLedger::totals_prefix(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mu_);
  Usage u;
  for (std::size_t i = 0; i < std::min(n, entries_.size()); ++i) u += entries_[i].usage;
  return u;
}

double cost(const CostLedger& ledger, const Pricing& pricing) {
  return price(ledger.totals(), pricing);
}

Gateway::Gateway(std::shared_ptr<Backend> backend,
                 std::shared_ptr<CostLedger> ledger, RetryPolicy retry,
                 Sleeper sleep)
    : backend_(std::move(backend)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<CostLedger>()),
      retry_(retry),
      sleep_(sleep ? std::move(sleep) : Sleeper([](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
      })) {
  if (!backend_) throw Error("gateway needs a backend");
  if (retry_.max_attempts < 1) throw Error("max_attempts must be at least 1");
}

void Gateway::charge(const CompletionRequest& request, const Usage& usage) {
  auto tag = [&](const char* key) {
    auto it = request.metadata.find(key);
    return it == request.metadata.end() ? std::string() : it->second;
  };
  ledger_->record({tag("agent"), tag("domain"), usage});
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  auto backoff = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      CompletionResponse response = backend_->complete(request);
      charge(request, response.usage);
      return response;
    } catch (const RateLimitError& e) {
      if (e.billed()) charge(request, *e.billed());
      if (attempt >= retry_.max_attempts) {
        throw RateLimitError("rate limited after " + std::to_string(attempt) +
                             " attempts: " + e.what());
      }
      sleep_(backoff);
      backoff = std::min(
          retry_.max_backoff,
          std::chrono::milliseconds(static_cast<long long>(
              static_cast<double>(backoff.count()) * retry_.multiplier)));
    } catch (const TransportError& e) {
      if (e.billed()) charge(request, *e.billed());
      throw;
    }
  }
}

}  // namespace hclgp::llm
