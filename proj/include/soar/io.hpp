#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soar/core_types.hpp"
#include "soar/loss.hpp"

namespace soar::io {

// Binary tensor container, little-endian everywhere:
//   magic "SOART\x01" (6 bytes) | rank u8 (<= 6) | dims rank x u32 |
//   payload product(dims) x f64, row-major.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
};

void write_tensor(const std::string& path, const Tensor& tensor);
Tensor read_tensor(const std::string& path);

// Several containers concatenated in one file (model checkpoints).
void write_tensors(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_tensors(const std::string& path);

// Detection file: JSON lines, one box per line:
//   {"frame": t, "cx": _, "cy": _, "sx": _, "sy": _}
// Lines may appear in any order; absent frames are empty. The writer emits
// frames in ascending order.
void write_detections(const std::string& path, const DetectionSet& detections);
DetectionSet read_detections(const std::string& path, int frames);

// Mask file:
//   prologue "SOARM\x01\0" (7 bytes) | N u32 | geometry 7 x u32
//   (T,C,H,W,t,h,w) | bitset ceil(N/8) bytes, token i at byte i/8 bit
//   i%8, 1 = visible, trailing bits zero.
void write_mask(const std::string& path, const MaskSpec& mask);
MaskSpec read_mask(const std::string& path);

// Loss weights as JSON lines: a version header line, then one
// {"token": i, "weight": w} per invisible token, ascending.
void write_weights_jsonl(const std::string& path, const LossWeights& weights);

// Presentation-only 8-bit binary PGM; values min-max scaled, an all-equal
// grid maps to black.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<double>& values);

} // namespace soar::io
