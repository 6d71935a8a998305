"""Iterative decoders for non-binary LDPC codes over GF(2^p)."""

from .gf import Field, FieldError, field_from_q, field_new
from .code import (
    Code,
    CodeError,
    Encoder,
    ParseError,
    enumerate_codewords,
    parse_code_file,
    random_regular_code,
    random_tree_code,
    serialize_code_file,
    syndrome,
)
from .channel import Convention, IntrinsicInfo, ebno_to_sigma, intrinsic
from .decoders import DecodeResult, Decoder, DecoderConfig, Rule, decode

__version__ = "0.1.0"
