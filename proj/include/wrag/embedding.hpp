#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wrag/config.hpp"
#include "wrag/http_client.hpp"

namespace wrag {

// Unit-L2 vector of finite 32-bit entries.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // Normalizes `raw`. Throws ProviderFault on non-finite entries and
  // EmptyInput on a zero vector.
  static EmbeddingVector normalized(std::span<const double> raw);

  // Wraps values already known to be unit-normalized (e.g. read from an
  // index file). No check beyond finiteness.
  static EmbeddingVector from_unit(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}
  std::vector<float> values_;
};

enum class ProviderKind { LocalHash, Remote };

struct EmbedderDescriptor {
  ProviderKind provider_kind = ProviderKind::LocalHash;
  std::string model_name;
  std::size_t dim = 384;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual const EmbedderDescriptor& descriptor() const noexcept = 0;
  virtual EmbeddingVector embed(const std::string& text) const = 0;
  // Providers with a native batch endpoint override this.
  virtual std::vector<EmbeddingVector> embed_many(std::span<const std::string> texts) const;
};

// Signed feature hashing over the shared tokenizer, then L2 normalization.
// Throws EmptyInput for blank text or text without tokens, InvalidArgument
// for dim < 8.
EmbeddingVector embed_local(const std::string& text, std::size_t dim);

class LocalHashEmbedder final : public Embedder {
 public:
  explicit LocalHashEmbedder(std::size_t dim);

  const EmbedderDescriptor& descriptor() const noexcept override { return descriptor_; }
  EmbeddingVector embed(const std::string& text) const override { return embed_local(text, descriptor_.dim); }

 private:
  EmbedderDescriptor descriptor_;
};

// Checks a provider vector against the expected dimension (fatal Config error
// on mismatch) and finiteness (ProviderFault), then re-normalizes.
EmbeddingVector accept_provider_vector(std::span<const double> raw, std::size_t expected_dim);

// Client for {"model", "input": [...]} -> {"data": [{"index", "embedding"}]}.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(const ProviderConfig& provider, std::size_t dim);

  const EmbedderDescriptor& descriptor() const noexcept override { return descriptor_; }
  EmbeddingVector embed(const std::string& text) const override;
  std::vector<EmbeddingVector> embed_many(std::span<const std::string> texts) const override;

 private:
  EmbedderDescriptor descriptor_;
  JsonHttpClient client_;
};

EmbeddingVector embed_remote(const std::string& text, const RemoteEmbedder& embedder);

// Element i equals embedder.embed(texts[i]). A failing element is rethrown
// with its index in the message; the error kind is preserved.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const Embedder& embedder);

std::unique_ptr<Embedder> make_embedder(const ProviderConfig& provider, std::size_t dim);

}  // namespace wrag
