"""curvlens: numerics for spectral projectors, resolvents and mixed-norm
operator estimates on the sphere and hyperbolic space."""

__version__ = "0.1.0"
