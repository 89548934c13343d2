"""relulab: embed trained ReLU networks into linear programs and solve them in-house."""

__version__ = "0.1.0"
