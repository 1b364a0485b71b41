#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wrag/core.hpp"
#include "wrag/embedding.hpp"

namespace wrag {

struct Neighbor {
  ChunkId chunk_id;
  double distance = 0.0;  // squared L2

  bool operator==(const Neighbor&) const = default;
};

// Squared L2 accumulated in double precision, index order.
double squared_l2(std::span<const float> a, std::span<const float> b) noexcept;

// Exact nearest-neighbour index over one source. Sealed at construction:
// there is no mutation API, so concurrent searches need no locking.
class FlatIndex {
 public:
  FlatIndex() = default;

  // Throws DuplicateId on a repeated id and DimensionMismatch when a vector
  // length differs from dim.
  FlatIndex(SourceId source, std::size_t dim, std::vector<ChunkId> ids,
            std::vector<EmbeddingVector> vectors, std::int64_t build_timestamp = 0);

  const SourceId& source() const noexcept { return source_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::int64_t build_timestamp() const noexcept { return build_timestamp_; }
  const std::vector<ChunkId>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  // min(k, size) closest entries, ascending by (distance, chunk_id).
  // Throws DimensionMismatch when query length != dim.
  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const;
  std::vector<Neighbor> search(const EmbeddingVector& query, std::size_t k) const {
    return search(query.values(), k);
  }

  // Same source, dim, ids and bit-identical vectors in the same order.
  bool operator==(const FlatIndex& other) const;

 private:
  SourceId source_;
  std::size_t dim_ = 0;
  std::vector<ChunkId> ids_;
  std::vector<float> data_;  // row-major, size() x dim_
  std::int64_t build_timestamp_ = 0;
};

// One entry per chunk in input order. Throws InvalidArgument for a chunk of
// another source, DuplicateId for repeated ids; embedding failures are
// rethrown naming the chunk id.
FlatIndex build_index(const SourceId& source, std::span<const Chunk> chunks, const Embedder& embedder);

inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr std::uint8_t kMetricL2Normalized = 0;

// Little-endian "WRAG" file with trailing CRC32. Written to a temporary
// sibling and renamed into place.
void save_index(const FlatIndex& index, const std::filesystem::path& path);
std::string encode_index(const FlatIndex& index);

// Throws CorruptFile (magic, version, metric, trailing bytes), Truncated,
// ChecksumMismatch or Io. Never returns a partial index. The source id
// defaults to the file stem.
FlatIndex load_index(const std::filesystem::path& path, const SourceId& source = {});
FlatIndex decode_index(std::string_view bytes, const SourceId& source);

}  // namespace wrag
