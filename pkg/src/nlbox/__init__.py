"""Laboratory for CHSH non-locality: boxes, wirings, distillation search,
two-qubit quantum simulation and distillability bounds."""

__version__ = "0.1.0"
