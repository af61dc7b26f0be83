"""Saliency-prioritized progressive image offloading over LPWAN links."""

from ._core import (
    ConfigError,
    LimitnetError,
    bd_quality,
    bd_rate,
    bitstream_info,
    decode,
    encode,
    gradual_scoring,
    mse,
    priority_order,
    salient_mse,
    simulate,
    spectral_saliency,
    synthetic_scene,
    wire_saliency,
)

__all__ = [
    "ConfigError",
    "LimitnetError",
    "bd_quality",
    "bd_rate",
    "bitstream_info",
    "decode",
    "encode",
    "gradual_scoring",
    "mse",
    "priority_order",
    "salient_mse",
    "simulate",
    "spectral_saliency",
    "synthetic_scene",
    "wire_saliency",
]
