#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "footwork/errors.hpp"

namespace footwork::train {

/// Binary checkpoint container: 16-byte magic, u32 version, length-prefixed
/// sections (u32 tag + u64 length + payload), trailing crc32 over everything
/// before it.
constexpr char kCheckpointMagic[16] = {'F', 'O', 'O', 'T', 'W', 'O', 'R', 'K',
                                       '-', 'C', 'K', 'P', 'T', 0, 0, 1};
constexpr std::uint32_t kCheckpointVersion = 1;

enum class SectionTag : std::uint32_t {
  Meta = 1,
  Actor = 2,
  Critic = 3,
  Discriminator = 4,
  Optimizers = 5,
  RngState = 6,
  EnvState = 7,
};

struct CheckpointMeta {
  std::uint32_t version = kCheckpointVersion;
  std::int64_t stage_index = 0;
  std::int64_t iteration = 0;
  std::uint64_t config_hash = 0;
  bool has_discriminator = false;
  bool config_hash_matched = true; // set by the loader
};

class CheckpointWriter {
 public:
  void add(SectionTag tag, std::string payload) {
    sections_.emplace_back(tag, std::move(payload));
  }
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<SectionTag, std::string>> sections_;
};

class CheckpointReader {
 public:
  /// Validates magic, version and checksum. Throws VersionMismatch or
  /// CorruptFile.
  explicit CheckpointReader(const std::string& path);

  bool has(SectionTag tag) const { return sections_.count(tag) > 0; }
  const std::string& payload(SectionTag tag) const;
  std::istringstream stream(SectionTag tag) const {
    return std::istringstream(payload(tag));
  }

 private:
  std::map<SectionTag, std::string> sections_;
};

std::string encode_meta(const CheckpointMeta& meta);
CheckpointMeta decode_meta(const std::string& payload);

/// Persists a trainer plus schedule position. config hash mismatch on load is
/// reported via meta.config_hash_matched (a warning, not an error).
template <class TrainerT>
void save_checkpoint(const std::string& path, const TrainerT& trainer,
                     std::int64_t stage_index, std::uint64_t config_hash) {
  CheckpointWriter w;
  CheckpointMeta meta;
  meta.stage_index = stage_index;
  meta.iteration = trainer.iteration();
  meta.config_hash = config_hash;
  meta.has_discriminator = trainer.has_discriminator();
  w.add(SectionTag::Meta, encode_meta(meta));

  auto dump = [](auto&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
  };
  w.add(SectionTag::Actor, dump([&](std::ostream& os) { trainer.save_networks(os); }));
  // actor+critic live in one networks blob; the critic section stores a
  // marker so readers can tell both are present
  w.add(SectionTag::Critic, "with-actor");
  if (trainer.has_discriminator())
    w.add(SectionTag::Discriminator,
          dump([&](std::ostream& os) { trainer.save_discriminator(os); }));
  w.add(SectionTag::Optimizers,
        dump([&](std::ostream& os) { trainer.save_optimizers(os); }));
  w.add(SectionTag::RngState,
        dump([&](std::ostream& os) { trainer.save_rng_state(os); }));
  w.add(SectionTag::EnvState,
        dump([&](std::ostream& os) { trainer.save_env_state(os); }));
  w.write(path);
}

template <class TrainerT>
CheckpointMeta load_checkpoint(const std::string& path, TrainerT& trainer,
                               std::uint64_t expected_config_hash) {
  CheckpointReader r(path);
  CheckpointMeta meta = decode_meta(r.payload(SectionTag::Meta));
  meta.config_hash_matched = meta.config_hash == expected_config_hash;
  {
    auto is = r.stream(SectionTag::Actor);
    trainer.load_networks(is);
  }
  if (r.has(SectionTag::Discriminator)) {
    auto is = r.stream(SectionTag::Discriminator);
    trainer.load_discriminator(is);
  }
  {
    auto is = r.stream(SectionTag::Optimizers);
    trainer.load_optimizers(is);
  }
  {
    auto is = r.stream(SectionTag::RngState);
    trainer.load_rng_state(is);
  }
  {
    auto is = r.stream(SectionTag::EnvState);
    trainer.load_env_state(is);
  }
  return meta;
}

/// Networks-only load (evaluation does not need optimizer or env state).
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace footwork::train
