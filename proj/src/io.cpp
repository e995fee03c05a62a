#include "soar/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace soar::io {

namespace {

using json = nlohmann::json;

constexpr char kTensorMagic[6] = {'S', 'O', 'A', 'R', 'T', '\x01'};
constexpr char kMaskMagic[7] = {'S', 'O', 'A', 'R', 'M', '\x01', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f64(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
}

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw FormatError("cannot open file: " + path);
    }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

    void bytes(char* out, std::size_t n, const char* what) {
        in_.read(out, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw LengthError(std::string("truncated ") + what + " in " + path_);
        }
    }

    std::uint8_t u8(const char* what) {
        char c;
        bytes(&c, 1, what);
        return static_cast<std::uint8_t>(c);
    }

    std::uint32_t u32(const char* what) {
        char b[4];
        bytes(b, 4, what);
        return static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 8) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 16) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(b[3])) << 24);
    }

    double f64(const char* what) {
        char b[8];
        bytes(b, 8, what);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) {
            bits = (bits << 8) | static_cast<unsigned char>(b[i]);
        }
        return std::bit_cast<double>(bits);
    }

private:
    std::string path_;
    std::ifstream in_;
};

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path);
}

std::string encode_tensor(const Tensor& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > 6) {
        throw ParameterError("tensor rank must be in [1, 6]");
    }
    std::size_t count = 1;
    for (std::uint32_t d : tensor.dims) count *= d;
    if (count != tensor.values.size()) {
        throw ShapeError("tensor value count does not match dims");
    }
    for (double v : tensor.values) {
        if (!std::isfinite(v)) throw ValueError("tensor contains non-finite values");
    }
    std::string out;
    out.reserve(7 + 4 * tensor.dims.size() + 8 * tensor.values.size());
    out.append(kTensorMagic, sizeof(kTensorMagic));
    out.push_back(static_cast<char>(tensor.dims.size()));
    for (std::uint32_t d : tensor.dims) put_u32(out, d);
    for (double v : tensor.values) put_f64(out, v);
    return out;
}

Tensor decode_tensor(Reader& reader) {
    char magic[6];
    reader.bytes(magic, sizeof(magic), "tensor magic");
    if (std::memcmp(magic, kTensorMagic, sizeof(magic)) != 0) {
        throw FormatError("bad tensor magic");
    }
    const std::uint8_t rank = reader.u8("tensor rank");
    if (rank == 0 || rank > 6) throw FormatError("tensor rank out of range");
    Tensor t;
    t.dims.resize(rank);
    std::size_t count = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
        t.dims[i] = reader.u32("tensor dims");
        count *= t.dims[i];
    }
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.values[i] = reader.f64("tensor payload");
    return t;
}

} // namespace

void write_tensor(const std::string& path, const Tensor& tensor) {
    write_file(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::string& path) {
    Reader reader(path);
    Tensor t = decode_tensor(reader);
    if (!reader.at_eof()) throw FormatError("trailing data after tensor in " + path);
    return t;
}

void write_tensors(const std::string& path, const std::vector<Tensor>& tensors) {
    std::string out;
    for (const Tensor& t : tensors) out += encode_tensor(t);
    write_file(path, out);
}

std::vector<Tensor> read_tensors(const std::string& path) {
    Reader reader(path);
    std::vector<Tensor> tensors;
    while (!reader.at_eof()) tensors.push_back(decode_tensor(reader));
    return tensors;
}

void write_detections(const std::string& path, const DetectionSet& detections) {
    std::string out;
    for (int t = 0; t < detections.frames(); ++t) {
        for (const BoundingBox& b : detections.frame(t)) {
            json line;
            line["frame"] = t;
            line["cx"] = b.cx;
            line["cy"] = b.cy;
            line["sx"] = b.sx;
            line["sy"] = b.sy;
            out += line.dump();
            out += '\n';
        }
    }
    write_file(path, out);
}

DetectionSet read_detections(const std::string& path, int frames) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    DetectionSet set(frames);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("bad detection line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        if (!obj.contains("frame") || !obj.contains("cx") || !obj.contains("cy") ||
            !obj.contains("sx") || !obj.contains("sy")) {
            throw FormatError("detection line " + std::to_string(line_no) +
                              " is missing fields");
        }
        const int frame = obj["frame"].get<int>();
        if (frame < 0) {
            throw FormatError("detection line " + std::to_string(line_no) +
                              " has a negative frame index");
        }
        const double sx = obj["sx"].get<double>();
        const double sy = obj["sy"].get<double>();
        if (!(sx > 0.0) || !(sy > 0.0)) {
            throw FormatError("detection line " + std::to_string(line_no) +
                              " has a non-positive size");
        }
        set.add(frame, BoundingBox(obj["cx"].get<double>(), obj["cy"].get<double>(), sx, sy));
    }
    return set;
}

void write_mask(const std::string& path, const MaskSpec& mask) {
    const PatchGeometry& g = mask.geometry;
    const std::uint32_t n = static_cast<std::uint32_t>(g.token_count());
    std::string out;
    out.append(kMaskMagic, sizeof(kMaskMagic));
    put_u32(out, n);
    for (int v : {g.frames, g.channels, g.height, g.width, g.patch_t, g.patch_h, g.patch_w}) {
        put_u32(out, static_cast<std::uint32_t>(v));
    }
    std::vector<std::uint8_t> bits((n + 7) / 8, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (mask.visible[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
    write_file(path, out);
}

MaskSpec read_mask(const std::string& path) {
    Reader reader(path);
    char magic[7];
    reader.bytes(magic, sizeof(magic), "mask magic");
    if (std::memcmp(magic, kMaskMagic, sizeof(magic)) != 0) {
        throw FormatError("bad mask magic");
    }
    const std::uint32_t n = reader.u32("mask token count");
    std::uint32_t dims[7];
    for (std::uint32_t& d : dims) d = reader.u32("mask geometry");
    PatchGeometry g(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                    static_cast<int>(dims[2]), static_cast<int>(dims[3]),
                    static_cast<int>(dims[4]), static_cast<int>(dims[5]),
                    static_cast<int>(dims[6]));
    if (n != static_cast<std::uint32_t>(g.token_count())) {
        throw FormatError("mask token count disagrees with geometry");
    }
    std::vector<char> bits((n + 7) / 8);
    reader.bytes(bits.data(), bits.size(), "mask bitset");
    // Trailing bits of the last byte must be zero.
    if (n % 8 != 0) {
        const unsigned char last = static_cast<unsigned char>(bits.back());
        if ((last >> (n % 8)) != 0) throw FormatError("mask has nonzero trailing bits");
    }
    if (!reader.at_eof()) throw FormatError("trailing data after mask in " + path);

    std::vector<std::uint8_t> visible(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        const unsigned char byte = static_cast<unsigned char>(bits[i / 8]);
        visible[i] = (byte >> (i % 8)) & 1u;
    }
    return MaskSpec(g, std::move(visible));
}

void write_weights_jsonl(const std::string& path, const LossWeights& weights) {
    std::string out;
    json header;
    header["format"] = "soar-weights";
    header["version"] = 1;
    header["mu_used"] = weights.mu_used;
    header["mu"] = weights.mu_value;
    out += header.dump();
    out += '\n';
    for (std::size_t j = 0; j < weights.tokens.size(); ++j) {
        json line;
        line["token"] = weights.tokens[j];
        line["weight"] = weights.weights[j];
        out += line.dump();
        out += '\n';
    }
    write_file(path, out);
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeError("pgm value count does not match dimensions");
    }
    double lo = 0.0;
    double hi = 0.0;
    if (!values.empty()) {
        lo = values[0];
        hi = values[0];
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi - lo;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                      "\n255\n";
    for (double v : values) {
        const long byte = span > 0.0 ? std::lround(255.0 * (v - lo) / span) : 0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(byte)));
    }
    write_file(path, out);
}

} // namespace soar::io
