"""Open one-dimensional Schelling segregation: simulation and analysis."""
