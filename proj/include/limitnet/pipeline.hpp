#pragma once

#include <memory>
#include <string>
#include <variant>

#include "limitnet/bitstream.hpp"
#include "limitnet/builtin_transform.hpp"
#include "limitnet/convnet.hpp"
#include "limitnet/reconstruct.hpp"
#include "limitnet/saliency.hpp"

namespace limitnet {

using Analysis = std::variant<SpaceToDepthTransform, ConvNetSpec>;

LatentTensor analyze(const Analysis& analysis, const Image& image);

// Saliency provider from a textual choice: "spectral", "cnn:<weights>", "file:<map>".
std::unique_ptr<SaliencyProvider> make_saliency_provider(const std::string& choice);

struct EncodeResult {
  EncodedImage encoded;
  LatentTensor latent;
  SaliencyMap saliency;
};

// Analysis transform, saliency detection and serialization in one call. The codec's
// transform_block/image_channels fields are filled from the analysis and image.
EncodeResult encode_image(const Image& image, const Analysis& analysis, const SaliencyProvider& provider,
                          CodecConfig config);

// Synthesis matching a header: the built-in transform when transform_block > 0, otherwise
// the supplied decoder network (ConfigError when absent).
Synthesis synthesis_for(const StreamHeader& header, const ConvNetSpec* decoder = nullptr);

struct DecodeResult {
  PartialLatent latent;
  Image image;
};

DecodeResult decode_delivered(const StreamHeader& header, std::span<const Packet> delivered,
                              const Synthesis& synthesis);

}  // namespace limitnet
