#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hclgp/core/error.hpp"
#include "hclgp/core/value.hpp"

namespace hclgp::retrieval {

// Real vector with L2 norm 1 (to 1e-9).
class UnitVector {
 public:
  UnitVector() = default;

  // Scales to unit length; throws Error on a zero or non-finite vector.
  static UnitVector normalize(std::vector<double> raw);
  // Accepts an already unit-length vector; throws Error otherwise.
  static UnitVector from_normalized(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  const double* data() const { return values_.data(); }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// Dot product of unit vectors, clamped to [-1, 1]. Throws on dim mismatch.
double cosine(const UnitVector& a, const UnitVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws Error on empty text.
  virtual UnitVector embed(const std::string& text) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
};

// Hashed character n-gram frequency vector (FNV-1a mod dim) over the
// lowercased text. Texts shorter than n count as one gram.
class NgramEmbedding : public EmbeddingProvider {
 public:
  explicit NgramEmbedding(std::size_t dim = 256, std::size_t n = 3);
  UnitVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }
  std::string name() const override;

  // Raw counts before normalization.
  std::vector<double> counts(const std::string& text) const;

 private:
  std::size_t dim_;
  std::size_t n_;
};

// OpenAI-compatible /v1/embeddings endpoint.
class HttpEmbedding : public EmbeddingProvider {
 public:
  HttpEmbedding(std::string base_url, std::string model, std::string api_key,
                std::size_t dim);
  UnitVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }
  std::string name() const override { return "http:" + model_; }

  static std::vector<double> parse_reply(const std::string& body);

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
  std::size_t dim_;
};

// kind: "ngram" (default) or "http" (reads HCLGP_EMBED_BASE_URL,
// HCLGP_EMBED_MODEL, HCLGP_EMBED_DIM and HCLGP_API_KEY).
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind);

std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::string_view text);

// Embeds each text; the parallel form uses OpenMP over texts and is
// bit-identical to the serial form for deterministic providers.
std::vector<UnitVector> embed_batch(const NgramEmbedding& provider,
                                    const std::vector<std::string>& texts);
std::vector<UnitVector> embed_batch_serial(const NgramEmbedding& provider,
                                           const std::vector<std::string>& texts);

}  // namespace hclgp::retrieval
