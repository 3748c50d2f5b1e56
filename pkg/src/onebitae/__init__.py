"""LDPC + autoencoder error correction for one-bit quantized FTN channels."""

__version__ = "0.1.0"
