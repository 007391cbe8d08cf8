#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "steprl/policy.hpp"

namespace steprl::iolayer {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kRoleTagBytes = 16;

struct CheckpointHeader {
    std::uint32_t version = kCheckpointVersion;
    std::uint32_t step_weight_count = 0;
    std::uint32_t eval_weight_count = 0;
    std::string role;  // at most kRoleTagBytes bytes, zero padded on disk
    std::uint64_t creation_seed = 0;
};

struct Checkpoint {
    CheckpointHeader header;
    policy::PolicyParams params;
};

/* Binary layout, all little-endian: 8-byte magic, u32 version, u32 step
 * weight count, u32 eval weight count, 16-byte role tag, u64 creation seed,
 * then the step weights and eval weights as raw IEEE-754 doubles. */
std::string serialize_checkpoint(const policy::PolicyParams& params,
                                 const std::string& role, std::uint64_t creation_seed);

/* Inverse of serialize_checkpoint. Rejects bad magic, unsupported versions,
 * truncation, and trailing bytes. */
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path,
                     const policy::PolicyParams& params, const std::string& role,
                     std::uint64_t creation_seed);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace steprl::iolayer
