#include "footwork/checkpoint.hpp"

#include <cstring>

#include "footwork/binio.hpp"

namespace footwork::train {

namespace {

void append_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::string& buf, size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
  return v;
}

std::uint64_t read_u64(const std::string& buf, size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
  return v;
}

std::uint32_t crc_of(const std::string& data) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data.data()),
            static_cast<uInt>(data.size())));
}

}  // namespace

void CheckpointWriter::write(const std::string& path) const {
  std::string buf(kCheckpointMagic, sizeof(kCheckpointMagic));
  append_u32(buf, kCheckpointVersion);
  for (const auto& [tag, payload] : sections_) {
    append_u32(buf, static_cast<std::uint32_t>(tag));
    append_u64(buf, payload.size());
    buf += payload;
  }
  append_u32(buf, crc_of(buf));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

CheckpointReader::CheckpointReader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();

  if (buf.size() < sizeof(kCheckpointMagic) + 4 + 4)
    throw CorruptFile("checkpoint too short: " + path);
  if (std::memcmp(buf.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw CorruptFile("bad checkpoint magic: " + path);

  const std::uint32_t stored_crc = read_u32(buf, buf.size() - 4);
  if (crc_of(buf.substr(0, buf.size() - 4)) != stored_crc)
    throw CorruptFile("checkpoint checksum mismatch: " + path);

  size_t at = sizeof(kCheckpointMagic);
  const std::uint32_t version = read_u32(buf, at);
  at += 4;
  if (version != kCheckpointVersion)
    throw VersionMismatch("checkpoint version " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion));

  const size_t end = buf.size() - 4;
  while (at < end) {
    if (at + 12 > end) throw CorruptFile("truncated section header: " + path);
    const auto tag = static_cast<SectionTag>(read_u32(buf, at));
    const std::uint64_t len = read_u64(buf, at + 4);
    at += 12;
    if (at + len > end) throw CorruptFile("truncated section payload: " + path);
    sections_[tag] = buf.substr(at, len);
    at += len;
  }
}

const std::string& CheckpointReader::payload(SectionTag tag) const {
  auto it = sections_.find(tag);
  if (it == sections_.end())
    throw CorruptFile("checkpoint missing section " +
                      std::to_string(static_cast<std::uint32_t>(tag)));
  return it->second;
}

std::string encode_meta(const CheckpointMeta& meta) {
  std::ostringstream os;
  binio::put_i64(os, meta.stage_index);
  binio::put_i64(os, meta.iteration);
  binio::put_u64(os, meta.config_hash);
  binio::put_u64(os, meta.has_discriminator ? 1 : 0);
  return os.str();
}

CheckpointMeta decode_meta(const std::string& payload) {
  std::istringstream is(payload);
  CheckpointMeta meta;
  meta.stage_index = binio::get_i64(is);
  meta.iteration = binio::get_i64(is);
  meta.config_hash = binio::get_u64(is);
  meta.has_discriminator = binio::get_u64(is) != 0;
  return meta;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  CheckpointReader r(path);
  return decode_meta(r.payload(SectionTag::Meta));
}

}  // namespace footwork::train
