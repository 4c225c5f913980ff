"""skewlab: a desk-scale laboratory for randomly driven circle extensions.

Subpackages cover: finite-type shifts with Markov measures (sft_core),
circle rotations and roof functions (circle_dynamics), the driven skew
product itself (skew_product), the law of weighted fair-sign sums by exact,
Fourier and Monte Carlo routes (distribution_lab), return-time and limit
statistics (ergodic_stats), and a config-driven scenario runner
(cli_runner / scenarios).
"""

__version__ = "0.1.0"

from .kernels import backend_name

__all__ = ["__version__", "backend_name"]
