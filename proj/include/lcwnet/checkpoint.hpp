#pragma once

#include <string>

#include "lcwnet/network.hpp"

namespace lcw {

/// Model checkpoint, single file. Byte layout (everything little-endian):
///
///   offset 0   8 bytes   magic "LCWNET01"
///   offset 8   u32       format version (1)
///   offset 12  u32       layer count
///   then per layer:
///     u32 layer tag: 1 dense, 2 sigmoid, 3 relu, 4 batchnorm
///     dense:     u32 mode (0 standard, 1 lcw), u32 in, u32 out,
///                then f64 blobs: standard -> W row-major (out*in), bias (out)
///                                lcw      -> v per neuron (out*(in-1)), bias (out)
///     batchnorm: u32 features, f64 epsilon, f64 momentum,
///                then f64 blobs: gamma, beta, running mean, running variance
///     sigmoid/relu: no payload
///
/// f64 values are raw IEEE-754 bits, so a save/load round trip is bit-exact.
void save_checkpoint(Network& net, const std::string& path);

Network load_checkpoint(const std::string& path);

}  // namespace lcw
