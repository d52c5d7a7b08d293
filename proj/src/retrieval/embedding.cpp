#include "hclgp/retrieval/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "hclgp/net/http.hpp"

namespace hclgp::retrieval {

namespace {

constexpr double kNormTolerance = 1e-9;

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

UnitVector UnitVector::normalize(std::vector<double> raw) {
  double n = norm(raw);
  if (!(n > 0) || !std::isfinite(n)) {
    throw Error("cannot normalize a zero or non-finite vector");
  }
  for (double& x : raw) x /= n;
  return UnitVector(std::move(raw));
}

UnitVector UnitVector::from_normalized(std::vector<double> values) {
  if (std::abs(norm(values) - 1.0) > kNormTolerance) {
    throw Error("vector is not unit length");
  }
  return UnitVector(std::move(values));
}

double cosine(const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim()) {
    throw Error("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                std::to_string(b.dim()));
  }
  double s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.data()[i] * b.data()[i];
  return std::clamp(s, -1.0, 1.0);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

NgramEmbedding::NgramEmbedding(std::size_t dim, std::size_t n) : dim_(dim), n_(n) {
  if (dim_ == 0 || n_ == 0) throw Error("n-gram embedding needs dim, n > 0");
}

std::string NgramEmbedding::name() const {
  return "ngram-" + std::to_string(n_) + "x" + std::to_string(dim_);
}

std::vector<double> NgramEmbedding::counts(const std::string& text) const {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<double> v(dim_, 0.0);
  std::string_view s(lower);
  if (s.size() < n_) {
    v[fnv1a(s) % dim_] += 1.0;
  } else {
    for (std::size_t i = 0; i + n_ <= s.size(); ++i) {
      v[fnv1a(s.substr(i, n_)) % dim_] += 1.0;
    }
  }
  return v;
}

UnitVector NgramEmbedding::embed(const std::string& text) {
  if (text.empty()) throw Error("cannot embed empty text");
  return UnitVector::normalize(counts(text));
}

std::vector<UnitVector> embed_batch(const NgramEmbedding& provider,
                                    const std::vector<std::string>& texts) {
  std::vector<UnitVector> out(texts.size());
  const long n = static_cast<long>(texts.size());
  bool empty = false;
#pragma omp parallel for schedule(dynamic, 8) reduction(|| : empty)
  for (long i = 0; i < n; ++i) {
    if (texts[i].empty()) {
      empty = true;
      continue;
    }
    out[i] = UnitVector::normalize(provider.counts(texts[i]));
  }
  if (empty) throw Error("cannot embed empty text");
  return out;
}

std::vector<UnitVector> embed_batch_serial(const NgramEmbedding& provider,
                                           const std::vector<std::string>& texts) {
  std::vector<UnitVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.empty()) throw Error("cannot embed empty text");
    out.push_back(UnitVector::normalize(provider.counts(t)));
  }
  return out;
}

HttpEmbedding::HttpEmbedding(std::string base_url, std::string model,
                             std::string api_key, std::size_t dim)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      dim_(dim) {}

std::vector<double> HttpEmbedding::parse_reply(const std::string& body) {
  try {
    return Json::parse(body).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed embedding reply: ") + e.what());
  }
}

UnitVector HttpEmbedding::embed(const std::string& text) {
  if (text.empty()) throw Error("cannot embed empty text");
  Json body{{"model", model_}, {"input", text}};
  net::HttpReply res = net::post_json(base_url_, "/v1/embeddings", api_key_, body.dump(), 60);
  if (res.transport_error) throw Error("embedding request failed: " + *res.transport_error);
  if (res.status != 200) {
    throw Error("embedding request failed: HTTP " + std::to_string(res.status));
  }
  std::vector<double> v = parse_reply(res.body);
  if (v.size() != dim_) {
    throw Error("embedding has dimension " + std::to_string(v.size()) +
                ", expected " + std::to_string(dim_));
  }
  return UnitVector::normalize(std::move(v));
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind) {
  if (kind.empty() || kind == "ngram") return std::make_unique<NgramEmbedding>();
  if (kind == "http") {
    auto env = [](const char* name, const char* fallback) {
      const char* v = std::getenv(name);
      return std::string(v && *v ? v : fallback);
    };
    return std::make_unique<HttpEmbedding>(
        env("HCLGP_EMBED_BASE_URL", "https://api.openai.com"),
        env("HCLGP_EMBED_MODEL", "text-embedding-3-small"), env("HCLGP_API_KEY", ""),
        std::stoul(env("HCLGP_EMBED_DIM", "1536")));
  }
  throw Error("unknown embedding provider '" + kind + "'");
}

}  // namespace hclgp::retrieval
