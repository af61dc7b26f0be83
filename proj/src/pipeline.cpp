#include "limitnet/pipeline.hpp"

#include "limitnet/errors.hpp"
#include "limitnet/weights_io.hpp"

namespace limitnet {

LatentTensor analyze(const Analysis& analysis, const Image& image) {
  if (const auto* builtin = std::get_if<SpaceToDepthTransform>(&analysis)) return builtin->forward(image);
  return LatentTensor(conv_forward(std::get<ConvNetSpec>(analysis), image.pixels()));
}

std::unique_ptr<SaliencyProvider> make_saliency_provider(const std::string& choice) {
  if (choice.empty() || choice == "spectral") return std::make_unique<SpectralResidualProvider>();
  if (choice.starts_with("cnn:")) return std::make_unique<CnnSaliencyProvider>(CnnSaliencyProvider::from_file(choice.substr(4)));
  if (choice.starts_with("file:")) return std::make_unique<FileSaliencyProvider>(FileSaliencyProvider::from_file(choice.substr(5)));
  throw ConfigError("unknown saliency provider '" + choice + "'");
}

EncodeResult encode_image(const Image& image, const Analysis& analysis, const SaliencyProvider& provider,
                          CodecConfig config) {
  config.image_channels = image.channels();
  if (const auto* builtin = std::get_if<SpaceToDepthTransform>(&analysis)) {
    config.transform_block = builtin->block();
  } else {
    config.transform_block = 0;
  }
  LatentTensor latent = analyze(analysis, image);
  SaliencyMap map = provider.detect(image, latent);
  EncodedImage encoded = serialize(latent, map, config);
  return {std::move(encoded), std::move(latent), std::move(map)};
}

Synthesis synthesis_for(const StreamHeader& header, const ConvNetSpec* decoder) {
  if (header.transform_block > 0) return SpaceToDepthTransform(header.transform_block);
  if (!decoder) throw ConfigError("bitstream needs an external decoder network");
  return *decoder;
}

DecodeResult decode_delivered(const StreamHeader& header, std::span<const Packet> delivered,
                              const Synthesis& synthesis) {
  DecodeResult r;
  r.latent = rebuild_latent(header, delivered);
  r.image = inverse_transform(synthesis, r.latent, header.image_channels);
  return r;
}

}  // namespace limitnet
