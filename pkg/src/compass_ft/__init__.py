"""Fault-tolerant syndrome extraction and decoding for compass codes."""

from .code_model import CompassCode, Coloring, build_code, elongated_coloring, validate
from .circuits import build_memory_circuit
from .noise import NoiseParams
from .decoder_graph import DecoderGraph, build_graph
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "Coloring",
    "CompassCode",
    "DecoderGraph",
    "NoiseParams",
    "build_code",
    "build_graph",
    "build_memory_circuit",
    "elongated_coloring",
    "validate",
]
__version__ = "0.1.0"
