"""An interpreter, typechecker and simulated component runtime for a small
ML-like language whose module system is built from COM-style components."""

__version__ = "0.1.0"
