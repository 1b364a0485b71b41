#include "wrag/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <zlib.h>

#include "wrag/error.hpp"

namespace wrag {

double squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

FlatIndex::FlatIndex(SourceId source, std::size_t dim, std::vector<ChunkId> ids,
                     std::vector<EmbeddingVector> vectors, std::int64_t build_timestamp)
    : source_(std::move(source)), dim_(dim), ids_(std::move(ids)), build_timestamp_(build_timestamp) {
  if (dim_ == 0) fail(ErrorKind::InvalidArgument, "index dim must be positive");
  if (ids_.size() != vectors.size()) fail(ErrorKind::InvalidArgument, "ids and vectors differ in length");
  std::unordered_set<std::string_view> seen;
  data_.reserve(ids_.size() * dim_);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!seen.insert(ids_[i]).second) fail(ErrorKind::DuplicateId, "duplicate chunk_id '" + ids_[i] + "'");
    if (vectors[i].dim() != dim_) {
      fail(ErrorKind::DimensionMismatch, "vector for '" + ids_[i] + "' has dim " +
                                             std::to_string(vectors[i].dim()) + ", index dim is " +
                                             std::to_string(dim_));
    }
    const auto v = vectors[i].values();
    data_.insert(data_.end(), v.begin(), v.end());
  }
}

std::vector<Neighbor> FlatIndex::search(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim_) {
    fail(ErrorKind::DimensionMismatch, "query dim " + std::to_string(query.size()) +
                                           " does not match index dim " + std::to_string(dim_));
  }
  struct Candidate {
    double distance;
    std::size_t row;
  };
  std::vector<Candidate> all(size());
  for (std::size_t i = 0; i < size(); ++i) all[i] = {squared_l2(query, vector(i)), i};

  const auto before = [this](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return ids_[a.row] < ids_[b.row];
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), before);

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({ids_[all[i].row], all[i].distance});
  return out;
}

bool FlatIndex::operator==(const FlatIndex& other) const {
  if (source_ != other.source_ || dim_ != other.dim_ || ids_ != other.ids_) return false;
  return data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

FlatIndex build_index(const SourceId& source, std::span<const Chunk> chunks, const Embedder& embedder) {
  std::vector<ChunkId> ids;
  std::vector<EmbeddingVector> vectors;
  std::unordered_set<std::string_view> seen;
  ids.reserve(chunks.size());
  vectors.reserve(chunks.size());
  for (const auto& chunk : chunks) {
    if (chunk.source != source) {
      fail(ErrorKind::InvalidArgument,
           "chunk '" + chunk.chunk_id + "' belongs to '" + chunk.source + "', not '" + source + "'");
    }
    if (!seen.insert(chunk.chunk_id).second) {
      fail(ErrorKind::DuplicateId, "duplicate chunk_id '" + chunk.chunk_id + "'");
    }
    try {
      validate_chunk(chunk);
      vectors.push_back(embedder.embed(chunk.text));
    } catch (const Error& e) {
      throw Error(e.kind(), "embedding chunk '" + chunk.chunk_id + "': " + e.what());
    }
    ids.push_back(chunk.chunk_id);
  }
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return FlatIndex(source, embedder.descriptor().dim, std::move(ids), std::move(vectors),
                   std::chrono::duration_cast<std::chrono::seconds>(now).count());
}

namespace {

constexpr char kMagic[4] = {'W', 'R', 'A', 'G'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T take_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto view = bytes_.substr(pos_, n);
    pos_ += n;
    return view;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      fail(ErrorKind::Truncated, std::string("index file truncated while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in slices for very large files.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), n);
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string encode_index(const FlatIndex& index) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kIndexFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim()));
  put_le<std::uint64_t>(out, index.size());
  out.push_back(static_cast<char>(kMetricL2Normalized));
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& id = index.ids()[i];
    if (id.size() > 0xFFFF) fail(ErrorKind::InvalidArgument, "chunk_id longer than 65535 bytes");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.append(id);
    for (const float v : index.vector(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  put_le<std::uint32_t>(out, crc32_of(out));
  return out;
}

void save_index(const FlatIndex& index, const std::filesystem::path& path) {
  const std::string bytes = encode_index(index);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::Io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot move index into '" + path.string() + "': " + ec.message());
}

FlatIndex decode_index(std::string_view bytes, const SourceId& source) {
  Cursor cur(bytes);
  if (cur.take(4, "magic") != std::string_view(kMagic, 4)) {
    fail(ErrorKind::CorruptFile, "bad magic bytes, not a WRAG index file");
  }
  const auto version = cur.take_le<std::uint32_t>("version");
  if (version != kIndexFormatVersion) {
    fail(ErrorKind::CorruptFile, "unsupported index format version " + std::to_string(version));
  }
  const auto dim = cur.take_le<std::uint32_t>("dim");
  const auto count = cur.take_le<std::uint64_t>("count");
  const auto metric = cur.take_le<std::uint8_t>("metric tag");
  if (dim == 0) fail(ErrorKind::CorruptFile, "index header has dim 0");
  if (metric != kMetricL2Normalized) {
    fail(ErrorKind::CorruptFile, "unknown metric tag " + std::to_string(metric));
  }
  // Each record needs at least 2 + 4*dim bytes; reject absurd counts early.
  if (count > cur.remaining() / (2 + 4ull * dim)) {
    fail(ErrorKind::Truncated, "index file truncated: header claims " + std::to_string(count) + " records");
  }

  std::vector<ChunkId> ids;
  std::vector<EmbeddingVector> vectors;
  ids.reserve(count);
  vectors.reserve(count);
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id_len = cur.take_le<std::uint16_t>("record id length");
    ids.emplace_back(cur.take(id_len, "record id"));
    for (auto& v : values) v = std::bit_cast<float>(cur.take_le<std::uint32_t>("vector"));
    try {
      vectors.push_back(EmbeddingVector::from_unit(values));
    } catch (const Error&) {
      fail(ErrorKind::CorruptFile, "record '" + ids.back() + "' holds a non-finite value");
    }
  }
  const std::size_t body_end = cur.pos();
  const auto stored_crc = cur.take_le<std::uint32_t>("checksum");
  if (cur.remaining() != 0) fail(ErrorKind::CorruptFile, "trailing bytes after checksum");
  if (crc32_of(bytes.substr(0, body_end)) != stored_crc) {
    fail(ErrorKind::ChecksumMismatch, "index checksum mismatch");
  }
  try {
    return FlatIndex(source, dim, std::move(ids), std::move(vectors));
  } catch (const Error& e) {
    fail(ErrorKind::CorruptFile, std::string("index content invalid: ") + e.what());
  }
}

FlatIndex load_index(const std::filesystem::path& path, const SourceId& source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open index file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_index(buffer.str(), source.empty() ? path.stem().string() : source);
}

}  // namespace wrag
