"""HTTP service wrapping the decomposition pipeline."""
