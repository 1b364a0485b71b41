#include "wrag/embedding.hpp"

#include <cmath>

#include "wrag/core.hpp"
#include "wrag/error.hpp"
#include "wrag/text.hpp"

namespace wrag {

EmbeddingVector EmbeddingVector::normalized(std::span<const double> raw) {
  double sum = 0.0;
  for (const double v : raw) {
    if (!std::isfinite(v)) fail(ErrorKind::ProviderFault, "embedding contains a non-finite entry");
    sum += v * v;
  }
  if (sum == 0.0) fail(ErrorKind::EmptyInput, "cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(sum);
  std::vector<float> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) values[i] = static_cast<float>(raw[i] * inv);
  return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
  for (const float v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::ProviderFault, "embedding contains a non-finite entry");
  }
  return EmbeddingVector(std::move(values));
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (const float v : values_) sum += static_cast<double>(v) * v;
  return std::sqrt(sum);
}

std::vector<EmbeddingVector> Embedder::embed_many(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(embed(texts[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), "batch element " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

EmbeddingVector embed_local(const std::string& text, std::size_t dim) {
  if (dim < 8) fail(ErrorKind::InvalidArgument, "local embedding dim must be >= 8");
  if (trim(text).empty()) fail(ErrorKind::EmptyInput, "cannot embed empty text");
  const auto tokens = tokenize(text);
  if (tokens.empty()) fail(ErrorKind::EmptyInput, "text has no alphanumeric tokens");

  std::vector<double> accum(dim, 0.0);
  for (const auto& token : tokens) {
    const std::uint64_t h = fnv1a64(token);
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    accum[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  // Opposite-signed collisions can cancel every bucket.
  try {
    return EmbeddingVector::normalized(accum);
  } catch (const Error&) {
    fail(ErrorKind::EmptyInput, "tokens of '" + text + "' cancel to a zero vector");
  }
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dim)
    : descriptor_{ProviderKind::LocalHash, "local-feature-hash", dim} {
  if (dim < 8) fail(ErrorKind::InvalidArgument, "local embedding dim must be >= 8");
}

EmbeddingVector accept_provider_vector(std::span<const double> raw, std::size_t expected_dim) {
  if (raw.size() != expected_dim) {
    fail(ErrorKind::DimensionMismatch, "provider returned a " + std::to_string(raw.size()) +
                                           "-dim vector, expected " + std::to_string(expected_dim));
  }
  try {
    return EmbeddingVector::normalized(raw);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptyInput) fail(ErrorKind::ProviderFault, "provider returned a zero vector");
    throw;
  }
}

RemoteEmbedder::RemoteEmbedder(const ProviderConfig& provider, std::size_t dim)
    : descriptor_{ProviderKind::Remote, provider.model, dim},
      client_(provider.url, provider.timeout_ms, provider.retries, provider.max_in_flight) {}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
  const std::string one[] = {text};
  return embed_many(one).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_many(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  nlohmann::json body = {{"model", descriptor_.model_name},
                         {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = client_.post(body);

  const auto data = reply.find("data");
  if (data == reply.end() || !data->is_array() || data->size() != texts.size()) {
    fail(ErrorKind::ProviderFault, "embedding reply lacks a 'data' array of " +
                                       std::to_string(texts.size()) + " item(s)");
  }
  std::vector<std::optional<EmbeddingVector>> slots(texts.size());
  for (const auto& item : *data) {
    std::vector<double> values;
    std::size_t index = 0;
    try {
      index = item.at("index").get<std::size_t>();
      values = item.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ProviderFault, std::string("malformed embedding item: ") + e.what());
    }
    if (index >= slots.size() || slots[index]) {
      fail(ErrorKind::ProviderFault, "embedding reply has bad or repeated index " + std::to_string(index));
    }
    slots[index] = accept_provider_vector(values, descriptor_.dim);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

EmbeddingVector embed_remote(const std::string& text, const RemoteEmbedder& embedder) {
  return embedder.embed(text);
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const Embedder& embedder) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trim(texts[i]).empty()) {
      fail(ErrorKind::EmptyInput, "batch element " + std::to_string(i) + ": cannot embed empty text");
    }
  }
  return embedder.embed_many(texts);
}

std::unique_ptr<Embedder> make_embedder(const ProviderConfig& provider, std::size_t dim) {
  if (provider.kind == "remote") return std::make_unique<RemoteEmbedder>(provider, dim);
  return std::make_unique<LocalHashEmbedder>(dim);
}

}  // namespace wrag
