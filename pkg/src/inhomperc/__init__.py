"""Monte Carlo laboratory for 2D inhomogeneous percolation."""

import os

# prefer OpenMP threads; numba's TBB layer needs a TBB build that is often absent
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

__version__ = "0.1.0"
