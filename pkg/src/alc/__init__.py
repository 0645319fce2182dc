"""Measurable objects of lossless linear analog compression: fractal
dimension estimators, random measurement operators, and zero-error
recovery experiments at desk scale."""

__version__ = "0.1.0"
