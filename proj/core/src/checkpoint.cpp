#include "steprl/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace steprl::iolayer {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'E', 'P', 'R', 'L', 'C', 'K'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] bool exhausted() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw CheckpointError("checkpoint truncated");
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const policy::PolicyParams& params,
                                 const std::string& role, std::uint64_t creation_seed) {
    if (role.size() > kRoleTagBytes) {
        throw CheckpointError("role tag longer than " + std::to_string(kRoleTagBytes) +
                              " bytes: '" + role + "'");
    }
    std::string out;
    out.reserve(8 + 4 * 3 + kRoleTagBytes + 8 +
                8 * (params.step_weights.size() + params.eval_weights.size()));
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(params.step_weights.size()));
    put_u32(out, static_cast<std::uint32_t>(params.eval_weights.size()));
    out.append(role);
    out.append(kRoleTagBytes - role.size(), '\0');
    put_u64(out, creation_seed);
    for (double w : params.step_weights) put_f64(out, w);
    for (double w : params.eval_weights) put_f64(out, w);
    return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    if (r.raw(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
        throw CheckpointError("bad checkpoint magic");
    }
    Checkpoint ck;
    ck.header.version = r.u32();
    if (ck.header.version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " +
                              std::to_string(ck.header.version));
    }
    ck.header.step_weight_count = r.u32();
    ck.header.eval_weight_count = r.u32();
    if (ck.header.step_weight_count != policy::kStepFeatureCount) {
        throw CheckpointError(
            "step weight dimension mismatch: file has " +
            std::to_string(ck.header.step_weight_count) + ", this build expects " +
            std::to_string(policy::kStepFeatureCount));
    }
    if (ck.header.eval_weight_count != policy::kEvalFeatureCount) {
        throw CheckpointError(
            "eval weight dimension mismatch: file has " +
            std::to_string(ck.header.eval_weight_count) + ", this build expects " +
            std::to_string(policy::kEvalFeatureCount));
    }
    const std::string role_raw = r.raw(kRoleTagBytes);
    ck.header.role = role_raw.substr(0, role_raw.find('\0'));
    ck.header.creation_seed = r.u64();

    ck.params.step_weights.assign(ck.header.step_weight_count, 0.0);
    ck.params.eval_weights.assign(ck.header.eval_weight_count, 0.0);
    for (auto& w : ck.params.step_weights) w = r.f64();
    for (auto& w : ck.params.eval_weights) w = r.f64();
    if (!r.exhausted()) {
        throw CheckpointError("trailing bytes after checkpoint payload");
    }
    return ck;
}

void save_checkpoint(const std::filesystem::path& path,
                     const policy::PolicyParams& params, const std::string& role,
                     std::uint64_t creation_seed) {
    const std::string bytes = serialize_checkpoint(params, role, creation_seed);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    try {
        return parse_checkpoint(bytes);
    } catch (const CheckpointError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
}

}  // namespace steprl::iolayer
