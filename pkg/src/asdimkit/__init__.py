"""Finite, certificate-producing experiments on asymptotic dimension of groups acting on trees."""

__version__ = "0.1.0"
