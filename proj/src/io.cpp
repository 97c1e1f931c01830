#include "mfunc/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mfunc/error.hpp"

namespace mfunc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::incomplete_data: return "incomplete-data";
        case ErrorKind::data_corruption: return "data-corruption";
        case ErrorKind::singularity: return "singularity";
        case ErrorKind::accuracy: return "accuracy";
        case ErrorKind::cutoff_too_small: return "cutoff-too-small";
        case ErrorKind::inversion_quality: return "inversion-quality";
        case ErrorKind::coverage: return "coverage";
        case ErrorKind::grid_too_small: return "grid-too-small";
        case ErrorKind::internal_consistency: return "internal-consistency";
        case ErrorKind::resource: return "resource";
    }
    return "unknown";
}

namespace io {

std::string format_double(double value, int significant) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, significant);
    if (ec != std::errc{}) fail(ErrorKind::internal_consistency, "format_double: buffer too small");
    return std::string(buf.data(), end);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::resource, "cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) fail(ErrorKind::resource, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::incomplete_data, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const std::filesystem::path& path, const Json& json) {
    write_text(path, json.dump(2) + "\n");
}

}  // namespace io
}  // namespace mfunc
