#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "qgergo/integrator.hpp"

// Checkpoint format (all integers and floats little-endian):
//   magic   8 bytes  "QGERGO01"
//   version u32      currently 1
//   N       u32      truncation
//   step    u64      time steps taken
//   t       f64      model time
//   omega   N*N f64  vorticity coefficients, m-major
//   z       N*N f64  stochastic-convolution coefficients, m-major
//   seed    u64      ensemble seed
//   counter u64      noise-stream position (equals step in this scheme)
// The member id is not part of the state: a checkpoint resumes under
// whatever member stream the caller names, which is how the original run
// launched it in the first place.

namespace qgergo {

inline constexpr char kCheckpointMagic[8] = {'Q', 'G', 'E', 'R', 'G', 'O', '0', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(buf, bits);
}

class ByteReader {
public:
    ByteReader(const std::string& buf, std::size_t offset) : buf_(buf), pos_(offset) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw CheckpointError("checkpoint truncated");
    }

    const std::string& buf_;
    std::size_t pos_;
};

} // namespace detail

struct CheckpointData {
    FlowState state;
    std::uint64_t seed = 0;

    explicit CheckpointData(int truncation) : state(truncation) {}
};

inline std::string serialize_checkpoint(const FlowState& state, std::uint64_t seed) {
    const auto nn = state.omega.size();
    std::string buf;
    buf.reserve(48 + 16 * nn);
    buf.append(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::put_u32(buf, kCheckpointVersion);
    detail::put_u32(buf, static_cast<std::uint32_t>(state.omega.truncation()));
    detail::put_u64(buf, state.step);
    detail::put_f64(buf, state.t);
    for (std::size_t i = 0; i < nn; ++i) detail::put_f64(buf, state.omega.data()[i]);
    for (std::size_t i = 0; i < nn; ++i) detail::put_f64(buf, state.z.data()[i]);
    detail::put_u64(buf, seed);
    detail::put_u64(buf, state.step); // noise-stream counter
    return buf;
}

inline CheckpointData deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof kCheckpointMagic ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
        throw CheckpointError("checkpoint has bad magic");
    detail::ByteReader rd(bytes, sizeof kCheckpointMagic);
    const std::uint32_t version = rd.u32();
    if (version != kCheckpointVersion)
        throw CheckpointError("checkpoint version " + std::to_string(version) +
                              " is not supported");
    const std::uint32_t nt = rd.u32();
    if (nt < 1 || nt > 4096) throw CheckpointError("checkpoint truncation is implausible");
    const std::size_t expected = 48 + 16 * static_cast<std::size_t>(nt) * nt;
    if (bytes.size() != expected)
        throw CheckpointError(bytes.size() < expected ? "checkpoint truncated"
                                                      : "checkpoint has trailing bytes");

    CheckpointData data(static_cast<int>(nt));
    data.state.step = rd.u64();
    data.state.t = rd.f64();
    const std::size_t nn = data.state.omega.size();
    for (std::size_t i = 0; i < nn; ++i) data.state.omega.data()[i] = rd.f64();
    for (std::size_t i = 0; i < nn; ++i) data.state.z.data()[i] = rd.f64();
    data.seed = rd.u64();
    const std::uint64_t counter = rd.u64();
    if (counter != data.state.step)
        throw CheckpointError("checkpoint noise counter does not match its step count");
    if (!data.state.omega.finite() || !data.state.z.finite())
        throw CheckpointError("checkpoint holds non-finite coefficients");
    return data;
}

inline void save_checkpoint(const std::string& path, const FlowState& state,
                            std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    const std::string bytes = serialize_checkpoint(state, seed);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw CheckpointError("checkpoint read failed: " + path);
    return deserialize_checkpoint(bytes);
}

} // namespace qgergo
